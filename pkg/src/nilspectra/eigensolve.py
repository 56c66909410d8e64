"""Finite-difference discretizations and low-lying eigenvalues.

Operators are discretized on uniform tensor grids with homogeneous Dirichlet
data outside the box [-L_1, L_1] x ... .  Eigenvalues come either from a
dense LAPACK solve (small problems, and the oracle for everything else) or
from a block Krylov method applied to the shift-inverted matrix, with every
reported pair checked by an explicit residual.

The H_1 oscillator is discretized straight from its symbolic expansion: each
term c(t) d^alpha with a monomial coefficient that does not involve the
differentiated variables becomes a Kronecker product of one-dimensional
stencils.  Even-order factors use symmetric stencils and odd-order factors
skew ones, and every term of the oscillator has an even total number of odd
factors, so the matrix is exactly symmetric.  It is also positive
semidefinite: per (t_2, t_3)-line pair the X_1 part is a constant-coefficient
form whose symbol satisfies s^2 <= a, and likewise for X_2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import IncompatibleOperands, InvalidGrid, InvalidParameter, NotConverged

DENSE_LIMIT = 4000

# centered stencils, coefficients for offsets -m..m
SECOND = {
    2: [1.0, -2.0, 1.0],
    4: [-1 / 12, 16 / 12, -30 / 12, 16 / 12, -1 / 12],
    6: [2 / 180, -27 / 180, 270 / 180, -490 / 180, 270 / 180, -27 / 180, 2 / 180],
}
FIRST = {
    2: [-0.5, 0.0, 0.5],
    4: [1 / 12, -8 / 12, 0.0, 8 / 12, -1 / 12],
    6: [-1 / 60, 9 / 60, -45 / 60, 0.0, 45 / 60, -9 / 60, 1 / 60],
}


@dataclass(frozen=True)
class GridSpec:
    dims: int
    N: int
    half_width: tuple[float, ...]

    def __post_init__(self):
        hw = self.half_width
        if isinstance(hw, (int, float)):
            hw = (float(hw),) * self.dims
        hw = tuple(float(x) for x in hw)
        object.__setattr__(self, "half_width", hw)
        if self.dims not in (1, 3):
            raise InvalidGrid("grids are one- or three-dimensional", dims=self.dims)
        if len(hw) != self.dims:
            raise InvalidGrid("one half-width per axis is required", dims=self.dims, half_width=hw)
        if self.N < 16:
            raise InvalidGrid("need at least 16 points per axis", N=self.N)
        if any(not L > 0 for L in hw):
            raise InvalidGrid("half-widths must be positive", half_width=hw)

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(2 * L / (self.N - 1) for L in self.half_width)

    def axis(self, j: int = 0) -> np.ndarray:
        L = self.half_width[j]
        return np.linspace(-L, L, self.N)

    @property
    def size(self) -> int:
        return self.N**self.dims

    def to_json(self) -> dict:
        return {"dims": self.dims, "N": self.N, "half_width": list(self.half_width), "spacing": list(self.spacing)}


@dataclass
class SparseOperator:
    matrix: sp.csr_matrix
    grid: GridSpec
    provenance: dict
    sectors: list | None = field(default=None, repr=False)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def symmetry_defect(self) -> float:
        A = self.matrix
        d = abs(A - A.T).max() if A.nnz else 0.0
        return float(d) / max(float(abs(A).max()), 1e-300)


def band(N: int, coeffs: Sequence[float]) -> sp.csr_matrix:
    m = len(coeffs) // 2
    offs = [o for o, c in zip(range(-m, m + 1), coeffs) if c != 0 and abs(o) < N]
    vals = [np.full(N - abs(o), coeffs[o + m]) for o in offs]
    return sp.diags(vals, offs, shape=(N, N), format="csr")


def second_difference(N: int, h: float, order: int = 2) -> sp.csr_matrix:
    """Symmetric approximation of d^2/dt^2 with zero Dirichlet data."""
    if order not in SECOND:
        raise InvalidParameter("stencil order must be 2, 4 or 6", order=order)
    return band(N, SECOND[order]) / h**2


def first_difference(N: int, h: float, order: int = 2) -> sp.csr_matrix:
    """Skew-symmetric approximation of d/dt with zero Dirichlet data."""
    if order not in FIRST:
        raise InvalidParameter("stencil order must be 2, 4 or 6", order=order)
    return band(N, FIRST[order]) / h


def discretize_1d(theta1: int, theta2: int, rho: float, grid: GridSpec, order: int = 2) -> SparseOperator:
    """(-1)^theta2 d^(2 theta2) + (2 pi |rho| t)^(2 theta1) on a 1D grid.

    The derivative part is the theta2-th power of minus the second
    difference matrix, so it stays symmetric positive definite.
    """
    if grid.dims != 1:
        raise InvalidGrid("discretize_1d needs a one-dimensional grid")
    if int(theta1) != theta1 or int(theta2) != theta2 or theta1 < 1 or theta2 < 1:
        raise InvalidParameter("theta1 and theta2 must be positive integers")
    t = grid.axis()
    K = -second_difference(grid.N, grid.spacing[0], order)
    P = K
    for _ in range(int(theta2) - 1):
        P = P @ K
    V = sp.diags((2 * math.pi * abs(rho) * t) ** (2 * int(theta1)))
    A = (P + V).tocsr()
    A = ((A + A.T) * 0.5).tocsr()
    prov = {"problem": "euclid1d" if theta1 == theta2 == 1 else "anharm1d", "theta1": int(theta1),
            "theta2": int(theta2), "rho": float(rho), "order": order, "grid": grid.to_json()}
    return SparseOperator(A, grid, prov)


def _kron_all(mats):
    out = mats[0]
    for m in mats[1:]:
        out = sp.kron(out, m, format="csr")
    return out


def discretize_operator(op, grid: GridSpec, order: int = 6) -> sp.csr_matrix:
    """Kronecker-product discretization of a polynomial-coefficient operator.

    Index order is C order over (t_1, .., t_d).  Each term's coefficient
    monomials may not involve a variable that the term differentiates, and
    derivative orders per variable are limited to two.
    """
    d = op.nvars
    if grid.dims != d:
        raise IncompatibleOperands("grid and operator dimensions differ", grid=grid.dims, operator=d)
    axes = [grid.axis(j) for j in range(d)]
    hs = grid.spacing
    N = grid.N
    stencils = {}

    def factor(j, power, deriv):
        key = (j, power, deriv)
        if key not in stencils:
            D = sp.identity(N, format="csr")
            if deriv == 1:
                D = first_difference(N, hs[j], order)
            elif deriv == 2:
                D = second_difference(N, hs[j], order)
            elif deriv > 2:
                raise InvalidParameter("derivative order above two per variable is not supported")
            if power:
                D = sp.diags(axes[j] ** power) @ D
            stencils[key] = D.tocsr()
        return stencils[key]

    A = sp.csr_matrix((N**d, N**d))
    for alpha, poly in op.terms.items():
        for e, c in poly.terms.items():
            c = complex(c)
            if abs(c.imag) > 1e-14 * max(1.0, abs(c)):
                raise InvalidParameter("only real coefficients can be discretized")
            if any(p and a for p, a in zip(e, alpha)):
                raise InvalidParameter("coefficient depends on a differentiated variable", term=(e, alpha))
            A = A + c.real * _kron_all([factor(j, e[j], alpha[j]) for j in range(d)])
    return A.tocsr()


def hho_symbolic(rho: float):
    """Symbolic H_1 oscillator obtained from the Dynin-Folland sub-Laplacian."""
    from .homogeneous import canonical_dilations
    from .lie import build_dynin_folland
    from .oscillators.rockland import assemble_operator, sublaplacian_form, validate_rockland_classical

    alg = build_dynin_folland(1)
    form = validate_rockland_classical(sublaplacian_form(alg), canonical_dilations(alg))
    return assemble_operator(form, rho)


def discretize_hho_h1(rho: float, grid: GridSpec, order: int = 6, scheme: str = "direct",
                      symmetry: bool = True) -> SparseOperator:
    """Discretize the harmonic oscillator on H_1 on a 3D grid.

    ``scheme="direct"`` expands the operator term by term (see the module
    docstring).  ``scheme="vector-field"`` instead assembles
    X_1^T X_1 + X_2^T X_2 + M^2 from skew central differences; it is kept for
    comparison because its checkerboard modes pollute the low spectrum.
    """
    if grid.dims != 3:
        raise InvalidGrid("discretize_hho_h1 needs a three-dimensional grid")
    if rho == 0:
        raise InvalidParameter("rho must be nonzero")
    if scheme == "direct":
        A = discretize_operator(hho_symbolic(rho), grid, order)
    elif scheme == "vector-field":
        A = _vector_field_scheme(rho, grid)
        order = 2
    else:
        raise InvalidParameter(f"unknown scheme {scheme!r}")
    A = ((A + A.T) * 0.5).tocsr()
    prov = {"problem": "hho-h1", "rho": float(rho), "order": order, "scheme": scheme, "grid": grid.to_json()}
    sectors = reflection_sectors(grid.N) if symmetry else None
    return SparseOperator(A, grid, prov, sectors)


def _vector_field_scheme(rho, grid):
    N = grid.N
    I = sp.identity(N, format="csr")
    t = [grid.axis(j) for j in range(3)]
    D = [first_difference(N, h) for h in grid.spacing]
    D1 = _kron_all([D[0], I, I])
    D2 = _kron_all([I, D[1], I])
    D3 = _kron_all([I, I, D[2]])
    C1 = _kron_all([sp.diags(t[0]), I, I])
    C2 = _kron_all([I, sp.diags(t[1]), I])
    X1 = D1 - 0.25 * (C2 @ D3 + D3 @ C2)
    X2 = D2 + 0.25 * (C1 @ D3 + D3 @ C1)
    M = _kron_all([I, I, sp.diags(2 * math.pi * abs(rho) * t[2])])
    return (X1.T @ X1 + X2.T @ X2 + M @ M).tocsr()


def reflection_sectors(N: int) -> list[sp.csr_matrix]:
    """Isometries onto the four character spaces of two commuting reflections.

    The oscillator commutes with (t1, t2, t3) -> (-t1, t2, -t3) and
    (t1, t2, t3) -> (t1, -t2, -t3); on a grid symmetric about the origin
    these are index reflections.  Column blocks of the returned matrices
    together form an orthonormal basis of R^(N^3).
    """
    idx = np.arange(N**3).reshape(N, N, N)
    r = slice(None, None, -1)
    g1 = idx[r, :, r].ravel()
    g2 = idx[:, r, r].ravel()
    g12 = idx[r, r, :].ravel()
    flat = idx.ravel()
    rep = (flat <= g1) & (flat <= g2) & (flat <= g12)
    p = flat[rep]
    images = [p, g1[rep], g2[rep], g12[rep]]
    out = []
    for s1 in (1, -1):
        for s2 in (1, -1):
            chars = [1.0, s1, s2, s1 * s2]
            rows = np.concatenate(images)
            cols = np.tile(np.arange(p.size), 4)
            vals = np.concatenate([np.full(p.size, c) for c in chars])
            P = sp.csc_matrix((vals, (rows, cols)), shape=(N**3, p.size))
            P.sum_duplicates()
            P.eliminate_zeros()
            norms = np.sqrt(np.asarray(P.multiply(P).sum(axis=0)).ravel())
            keep = np.nonzero(norms > 0)[0]
            P = P[:, keep] @ sp.diags(1.0 / norms[keep])
            out.append(P.tocsr())
    return out


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    residuals: np.ndarray
    converged: np.ndarray
    provenance: dict
    method: str = ""

    def __len__(self):
        return len(self.eigenvalues)

    def to_rows(self):
        return [
            (i + 1, float(v), float(r), bool(c))
            for i, (v, r, c) in enumerate(zip(self.eigenvalues, self.residuals, self.converged))
        ]


def _residuals(A, vals, vecs):
    R = A @ vecs - vecs * vals
    return np.linalg.norm(R, axis=0) / np.linalg.norm(vecs, axis=0)


def _dense(A: sp.spmatrix, k: int):
    M = A.toarray()
    vals, vecs = sla.eigh(M, subset_by_index=[0, k - 1])
    return vals, _residuals(A, vals, vecs)


def block_lanczos(A: sp.spmatrix, k: int, tol: float = 1e-8, sigma: float = 0.0, block: int = 4,
                  max_dim: int | None = None, seed: int = 0):
    """Smallest k eigenpairs of a symmetric matrix by shift-inverted block Krylov.

    The Krylov basis of (A - sigma)^-1 is kept fully orthogonal (two passes
    of classical Gram-Schmidt per block) and the Rayleigh-Ritz problem is
    solved on the whole basis; a block size above one also resolves
    multiplicities.  Returns (values, residuals, converged, basis_size).
    """
    n = A.shape[0]
    if not 0 < k < n:
        raise InvalidParameter("need 0 < k < dimension", k=k, n=n)
    lu = spla.splu((A - sigma * sp.identity(n)).tocsc())
    rng = np.random.default_rng(seed)
    b = max(1, min(block, n // 4))
    max_dim = min(n, max_dim or max(6 * k + 60, 200))
    V, _ = np.linalg.qr(rng.standard_normal((n, b)))
    basis = np.empty((n, max_dim))
    images = np.empty((n, max_dim))
    m = 0
    check_at = min(max_dim, 2 * k + 2 * b)
    vals = res = None
    while True:
        W = lu.solve(V)
        basis[:, m:m + V.shape[1]] = V
        images[:, m:m + V.shape[1]] = W
        m += V.shape[1]
        if m >= check_at or m + b > max_dim:
            Q, BQ = basis[:, :m], images[:, :m]
            H = Q.T @ BQ
            H = (H + H.T) * 0.5
            theta, S = np.linalg.eigh(H)
            # largest theta of the inverse are the eigenvalues nearest sigma
            order = np.argsort(-theta)[:k]
            theta, S = theta[order], S[:, order]
            pos = theta > 0
            lam = np.where(pos, sigma + 1.0 / np.where(pos, theta, 1.0), np.inf)
            Y = Q @ S
            res = _residuals(A, lam, Y)
            good = res <= tol * np.maximum(1.0, np.abs(lam))
            srt = np.argsort(lam)
            vals, res, good = lam[srt], res[srt], good[srt]
            if good.all() or m + b > max_dim:
                return vals, res, good, m
            check_at = m + max(b, k // 2)
        W = W - basis[:, :m] @ (basis[:, :m].T @ W)
        W = W - basis[:, :m] @ (basis[:, :m].T @ W)
        V, R = np.linalg.qr(W)
        weak = np.abs(np.diag(R)) < 1e-10 * max(1.0, float(np.abs(R).max()))
        if weak.any():
            fresh = rng.standard_normal((n, int(weak.sum())))
            fresh -= basis[:, :m] @ (basis[:, :m].T @ fresh)
            V[:, weak] = fresh
            V, _ = np.linalg.qr(V - basis[:, :m] @ (basis[:, :m].T @ V))


def _solve_block(A, k, tol, method, sigma, seed):
    n = A.shape[0]
    k = min(k, n - 1) if n > 1 else 1
    if method == "dense" or (method == "auto" and n <= DENSE_LIMIT):
        vals, res = _dense(A, k)
        return vals, res, np.ones(k, dtype=bool), "dense"
    vals, res, good, _m = block_lanczos(A, k, tol=tol, sigma=sigma, seed=seed)
    return vals, res, good, "krylov"


def lowest_eigenvalues(op: SparseOperator, k: int, tol: float = 1e-8, method: str = "auto",
                       sigma: float = 0.0, seed: int = 0, use_sectors: bool = True) -> SpectrumResult:
    """k smallest eigenvalues with residual norms and convergence flags.

    ``method`` is "auto" (dense LAPACK when the (sector) dimension is at most
    4000, block Krylov otherwise), "dense" or "iterative".  When the operator
    carries symmetry sectors, each sector is solved separately and the
    results are merged; a sector is re-solved with a larger request until its
    largest computed value exceeds the merged k-th value.
    """
    if not 0 < k < op.dimension:
        raise InvalidParameter("need 0 < k < dimension", k=k, dimension=op.dimension)
    if method not in ("auto", "dense", "iterative"):
        raise InvalidParameter(f"unknown method {method!r}")
    A = op.matrix
    if not (use_sectors and op.sectors):
        vals, res, good, used = _solve_block(A, k, tol, method, sigma, seed)
        return SpectrumResult(vals, res, good, dict(op.provenance), used)
    blocks = [(P.T @ A @ P).tocsr() for P in op.sectors]
    want = [min(b.shape[0] - 1, math.ceil(k / len(blocks)) + 4) for b in blocks]
    found: list = [None] * len(blocks)
    while True:
        for i, B in enumerate(blocks):
            if found[i] is None or len(found[i][0]) < want[i]:
                found[i] = _solve_block(B, want[i], tol, method, sigma, seed + i)
        vals = np.concatenate([f[0] for f in found])
        kth = np.sort(vals)[min(k, len(vals)) - 1]
        grow = False
        for i, B in enumerate(blocks):
            if found[i][0][-1] < kth and want[i] < B.shape[0] - 1:
                want[i] = min(B.shape[0] - 1, 2 * want[i])
                grow = True
        if not grow:
            break
    vals = np.concatenate([f[0] for f in found])
    res = np.concatenate([f[1] for f in found])
    good = np.concatenate([f[2] for f in found])
    srt = np.argsort(vals, kind="stable")[:k]
    methods = sorted({f[3] for f in found})
    prov = dict(op.provenance, sectors=len(blocks))
    return SpectrumResult(vals[srt], res[srt], good[srt], prov, "+".join(methods))


def harmonic_reference(k: int, rho: float = 1.0, n: int = 1) -> np.ndarray:
    """First k eigenvalues 2 pi |rho| (2|s| + n), s in N_0^n, with multiplicity."""
    out = []
    total = 0
    while len(out) < k:
        mult = math.comb(total + n - 1, n - 1)
        out += [2 * math.pi * abs(rho) * (2 * total + n)] * mult
        total += 1
    return np.array(out[:k])


@dataclass
class ConvergenceReport:
    Ns: list
    values: np.ndarray
    rel_change: np.ndarray
    stable_digits: np.ndarray
    window: int
    richardson: np.ndarray | None
    order: int
    observed_ratio: np.ndarray | None = None
    monotone: bool = False

    def to_json(self) -> dict:
        return {
            "Ns": list(self.Ns),
            "window": int(self.window),
            "order": self.order,
            "monotone": bool(self.monotone),
            "rel_change": [float(x) for x in self.rel_change],
            "stable_digits": [int(x) for x in self.stable_digits],
            "richardson": None if self.richardson is None else [float(x) for x in self.richardson],
        }


def stable_digits(a: float, b: float) -> int:
    """Number of leading significant digits on which a and b agree after rounding."""
    if a == b:
        return 16
    scale = max(abs(a), abs(b))
    digits = 0
    for d in range(1, 17):
        q = 10.0 ** (math.floor(math.log10(scale)) - d + 1)
        if round(a / q) != round(b / q):
            break
        digits = d
    return digits


def grid_convergence(results: Sequence[SpectrumResult], threshold: float = 0.01) -> ConvergenceReport:
    """Compare eigenvalues across grid refinements.

    ``window`` is the largest s such that the first s eigenvalues all moved by
    less than ``threshold`` (relative) between the two finest grids.
    Richardson extrapolation assumes the scheme order stored in the
    provenance (default 2).
    """
    if len(results) < 2:
        raise InvalidParameter("grid_convergence needs at least two refinements")
    keys = ("problem", "rho", "theta1", "theta2", "order", "scheme")
    base = {key: results[0].provenance.get(key) for key in keys}
    hw = results[0].provenance.get("grid", {}).get("half_width")
    for r in results[1:]:
        if {key: r.provenance.get(key) for key in keys} != base or r.provenance.get("grid", {}).get("half_width") != hw:
            raise IncompatibleOperands("results come from different problems")
    res = sorted(results, key=lambda r: r.provenance["grid"]["N"])
    Ns = [r.provenance["grid"]["N"] for r in res]
    m = min(len(r) for r in res)
    vals = np.array([r.eigenvalues[:m] for r in res])
    fine, coarse = vals[-1], vals[-2]
    rel = np.abs(fine - coarse) / np.abs(fine)
    bad = np.nonzero(rel >= threshold)[0]
    window = int(bad[0]) if bad.size else m
    digits = np.array([stable_digits(a, b) for a, b in zip(coarse, fine)])
    p = int(base.get("order") or 2)
    hs = [r.provenance["grid"]["spacing"][0] for r in res]
    ratio = (hs[-2] / hs[-1]) ** p
    rich = fine + (fine - coarse) / (ratio - 1)
    observed = None
    if len(res) >= 3:
        d1 = vals[-2] - vals[-3]
        d2 = vals[-1] - vals[-2]
        with np.errstate(divide="ignore", invalid="ignore"):
            observed = d1 / d2
    diffs = np.diff(vals, axis=0)
    monotone = bool(np.all(diffs[:, :window] <= 0) or np.all(diffs[:, :window] >= 0)) if window else False
    return ConvergenceReport(Ns, vals, rel, digits, window, rich, p, observed, monotone)


def require_converged(result: SpectrumResult):
    if not np.all(result.converged):
        bad = [int(i) + 1 for i in np.nonzero(~result.converged)[0]]
        raise NotConverged("some eigenpairs did not reach the residual tolerance", indices=bad)

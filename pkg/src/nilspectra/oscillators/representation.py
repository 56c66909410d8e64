"""Generic representations and their infinitesimal tables.

Dynin-Folland family, acting on functions of t = (t_1, .., t_{2n+1}):

    Z       -> 2 pi i rho
    Y_j     -> 2 pi i rho t_j
    X_j     -> d_j - 1/2 t_{n+j} d_{2n+1}      (j <= n)
    X_{n+j} -> d_{n+j} + 1/2 t_j d_{2n+1}      (j <= n)
    X_{2n+1}-> d_{2n+1}

and the group acts by (pi(z, y, x) f)(t) = e^{2 pi i rho z} e^{2 pi i rho <t, y>} f(t.x)
with t.x the Heisenberg product.  Heisenberg family (Schroedinger
representation on functions of n variables): X_j -> d_j,
X_{n+j} -> 2 pi i rho t_j, X_{2n+1} -> 2 pi i rho.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from ..errors import DegenerateRepresentation, IncompatibleOperands, InvalidChart, InvalidParameter
from ..lie import (
    SPLIT,
    AlgebraElement,
    GradedLieAlgebra,
    GroupElement,
    _df_unpack,
    bracket,
    build_dynin_folland,
    build_heisenberg,
    df_group_multiply,
)
from .operators import DiffOperator, apply, commutator
from .polynomial import Poly, PolyExpFunction, random_function, sample_points

HALF = Fraction(1, 2)


def _i2pi(rho) -> complex:
    return complex(0.0, 2.0 * math.pi * float(rho))


def _resolve(index, algebra: GradedLieAlgebra) -> int:
    if isinstance(index, str):
        return algebra.index(index)
    if not 0 <= int(index) < algebra.dim:
        raise InvalidParameter("basis index out of range", index=index, dim=algebra.dim)
    return int(index)


def representation_dim(algebra: GradedLieAlgebra) -> int:
    if algebra.family == "dynin-folland":
        return 2 * algebra.n + 1
    if algebra.family == "heisenberg":
        return algebra.n
    raise IncompatibleOperands("no generic representation table for this algebra", family=algebra.family)


def dpi_basis(index, rho, n: int, family: str = "dynin-folland") -> DiffOperator:
    """Image of one basis vector; ``index`` is a label or a zero-based position."""
    if rho == 0:
        raise DegenerateRepresentation("rho must be nonzero")
    alg = build_dynin_folland(n) if family == "dynin-folland" else build_heisenberg(n)
    return _dpi_on(alg, _resolve(index, alg), rho)


def _dpi_on(alg: GradedLieAlgebra, i: int, rho) -> DiffOperator:
    n = alg.n
    label = alg.labels[i]
    if alg.family == "dynin-folland":
        m = 2 * n + 1
        if label == "Z":
            return DiffOperator.multiplication(_i2pi(rho), m)
        kind, j = label[0], int(label[2:])
        if kind == "Y":
            return DiffOperator.multiplication(Poly.var(m, j - 1, _i2pi(rho)))
        if j == m:
            return DiffOperator.partial(m, m - 1)
        if j <= n:
            return DiffOperator.partial(m, j - 1) + DiffOperator.partial(m, m - 1, Poly.var(m, n + j - 1, -HALF))
        return DiffOperator.partial(m, j - 1) + DiffOperator.partial(m, m - 1, Poly.var(m, j - n - 1, HALF))
    if alg.family == "heisenberg":
        j = int(label[2:])
        if j <= n:
            return DiffOperator.partial(n, j - 1)
        if j <= 2 * n:
            return DiffOperator.multiplication(Poly.var(n, j - n - 1, _i2pi(rho)))
        return DiffOperator.multiplication(_i2pi(rho), n)
    raise IncompatibleOperands("no generic representation table for this algebra", family=alg.family)


def dpi_element(X: AlgebraElement, rho) -> DiffOperator:
    """Linear extension of the table to an arbitrary algebra element."""
    alg = X.algebra
    if rho == 0:
        raise DegenerateRepresentation("rho must be nonzero")
    out = DiffOperator(representation_dim(alg))
    for i, c in enumerate(X.coeffs):
        if c != 0:
            out = out + _dpi_on(alg, i, rho) * c
    return out


def rep_action(g: GroupElement, rho, f: PolyExpFunction) -> PolyExpFunction:
    if g.chart != SPLIT:
        raise InvalidChart("rep_action expects split-exponential coordinates")
    if rho == 0:
        raise DegenerateRepresentation("rho must be nonzero")
    n = g.algebra.n
    m = 2 * n + 1
    if f.nvars != m:
        raise IncompatibleOperands("function has the wrong number of variables", expected=m)
    z, y, x = (list(map(float, v)) if isinstance(v, list) else float(v) for v in _df_unpack(g.coords, n))
    # t -> t.x is affine: identity plus a last row picking up the symplectic term
    A = [[1.0 if r == c else 0.0 for c in range(m)] for r in range(m)]
    for j in range(n):
        A[m - 1][j] += 0.5 * x[n + j]
        A[m - 1][n + j] -= 0.5 * x[j]
    h = f.substitute_affine(A, x)
    k = _i2pi(rho)
    h = h.modulate(Poly.linear([k * v for v in y], 0))
    return h.times(complex(np.exp(k * z)))


def battery(nvars: int, count: int = 4, seed: int = 11) -> list[PolyExpFunction]:
    rng = np.random.default_rng(seed)
    out = [PolyExpFunction.gaussian(nvars)]
    out += [random_function(nvars, rng, degree=2) for _ in range(count - 1)]
    return out


def _relres(a: np.ndarray, b: np.ndarray, scale: float) -> float:
    return float(np.max(np.abs(a - b))) / max(scale, 1e-300)


def commutator_residuals(rho, n: int, points: np.ndarray | None = None, family: str = "dynin-folland") -> dict:
    """Residual of [dpi(V), dpi(W)] - dpi([V, W]) for every basis pair.

    Each residual operator is built symbolically, applied to a fixed battery
    of test functions and sampled at ``points``; residuals are relative to
    the size of dpi(V) dpi(W) f.
    """
    alg = build_dynin_folland(n) if family == "dynin-folland" else build_heisenberg(n)
    m = representation_dim(alg)
    pts = sample_points(m) if points is None else np.asarray(points)
    images = [_dpi_on(alg, i, rho) for i in range(alg.dim)]
    funcs = battery(m)
    out = {}
    for i in range(alg.dim):
        for j in range(i + 1, alg.dim):
            lhs = commutator(images[i], images[j])
            rhs = dpi_element(bracket(alg.basis(i), alg.basis(j)), rho)
            worst = 0.0
            for f in funcs:
                a = apply(lhs, f).evaluate(pts)
                b = apply(rhs, f).evaluate(pts)
                vw = apply(images[i], apply(images[j], f)).evaluate(pts)
                wv = apply(images[j], apply(images[i], f)).evaluate(pts)
                scale = max(np.max(np.abs(vw)), np.max(np.abs(wv)), np.max(np.abs(b)))
                worst = max(worst, _relres(a, b, scale))
            out[(alg.labels[i], alg.labels[j])] = worst
    return out


def verify_commutators(rho, n: int, sample_points: np.ndarray | None = None, family: str = "dynin-folland") -> float:
    if rho == 0:
        raise DegenerateRepresentation("rho must be nonzero")
    return max(commutator_residuals(rho, n, sample_points, family).values())


def random_split_element(n: int, rng: np.random.Generator, scale: float = 1.0) -> GroupElement:
    alg = build_dynin_folland(n)
    return GroupElement(alg, SPLIT, tuple(rng.uniform(-scale, scale, alg.dim)))


def homomorphism_trial(rho, n: int, seed: int, trial: int, points=None) -> float:
    rng = np.random.default_rng([seed, trial])
    g = random_split_element(n, rng)
    gp = random_split_element(n, rng)
    f = random_function(2 * n + 1, rng)
    pts = sample_points(2 * n + 1) if points is None else points
    lhs = rep_action(g, rho, rep_action(gp, rho, f)).evaluate(pts)
    rhs = rep_action(df_group_multiply(g, gp), rho, f).evaluate(pts)
    return _relres(lhs, rhs, float(np.max(np.abs(rhs))))


def verify_homomorphism(rho, n: int, trials: int, seed: int = 0) -> float:
    """Max relative gap between pi(g) pi(g') f and pi(g g') f over random trials."""
    if trials < 1:
        raise InvalidParameter("trials must be >= 1", trials=trials)
    if rho == 0:
        raise DegenerateRepresentation("rho must be nonzero")
    pts = sample_points(2 * n + 1)
    return max(homomorphism_trial(rho, n, seed, t, pts) for t in range(trials))

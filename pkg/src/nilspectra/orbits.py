"""Flat coadjoint orbits, orbital ball measures and the Engel orbit list.

For a group with one-dimensional center spanned by Z and a nondegenerate
skew form (X, Y) -> rho Z*([X, Y]) on the complement, the orbit through
rho Z* is the affine hyperplane rho Z* + (all non-central directions).  Its
orbital measure is Lebesgue measure divided by the formal dimension
d_pi = |Pf(rho Z*)|.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np

from .errors import DegenerateOrbit, IncompatibleOperands, InvalidParameter, UnsupportedAlgebra
from .homogeneous import DilationFamily, DualVector, quasinorm_array
from .lie import AlgebraElement, GradedLieAlgebra

MC_CHUNK = 1 << 16


def thread_count() -> int:
    env = os.environ.get("NILSPECTRA_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def skew_form(algebra: GradedLieAlgebra, l, indices=None) -> list[list]:
    """Matrix B[a][b] = l([X_a, X_b]) restricted to ``indices``.

    ``l`` is a sequence of dual coordinates; exact entries stay exact.
    """
    idx = list(range(algebra.dim)) if indices is None else list(indices)
    out = [[0] * len(idx) for _ in idx]
    for i, j, k, c in algebra.nonzero_constants():
        if i in idx and j in idx and l[k] != 0:
            a, b = idx.index(i), idx.index(j)
            out[a][b] += c * l[k]
            out[b][a] -= c * l[k]
    return out


def _det_exact(m: list[list]) -> Fraction:
    a = [[Fraction(x) for x in row] for row in m]
    n = len(a)
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det *= a[col][col]
        for r in range(col + 1, n):
            f = a[r][col] / a[col][col]
            if f:
                for c in range(col, n):
                    a[r][c] -= f * a[col][c]
    return det


def _sqrt_exact(q: Fraction):
    q = abs(q)
    rn, rd = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if rn * rn == q.numerator and rd * rd == q.denominator:
        return Fraction(rn, rd)
    return math.sqrt(q)


def abs_pfaffian(matrix: list[list]):
    """|Pf(B)| = sqrt|det B|; exact for rational entries."""
    if len(matrix) % 2:
        return 0
    exact = all(isinstance(x, Rational) for row in matrix for x in row)
    if exact:
        return _sqrt_exact(_det_exact(matrix))
    return math.sqrt(abs(float(np.linalg.det(np.array(matrix, dtype=float)))))


@dataclass(frozen=True)
class FlatOrbit:
    algebra: GradedLieAlgebra
    rho: float | Fraction
    span_indices: tuple[int, ...]
    pfaffian: float | Fraction

    @property
    def formal_dimension(self):
        return self.pfaffian

    @property
    def center_index(self) -> int:
        return self.algebra.central_indices()[0]

    @property
    def rho_power(self) -> Fraction:
        # Pf(rho Z*) is homogeneous of degree (d - 1) / 2 in rho
        return -Fraction(len(self.span_indices), 2)


def flat_orbit(algebra: GradedLieAlgebra, rho) -> FlatOrbit:
    if rho == 0:
        raise DegenerateOrbit("the central parameter rho must be nonzero")
    center = algebra.central_indices()
    if len(center) != 1:
        raise UnsupportedAlgebra("flat orbits need a one-dimensional center", center=len(center))
    span = tuple(i for i in range(algebra.dim) if i != center[0])
    l = [0] * algebra.dim
    l[center[0]] = rho
    pf = abs_pfaffian(skew_form(algebra, l, span))
    if pf == 0:
        raise UnsupportedAlgebra(
            "the skew form of rho Z* is degenerate; generic orbits are not flat", family=algebra.family
        )
    return FlatOrbit(algebra, rho, span, pf)


@dataclass(frozen=True)
class OrbitalMeasure:
    """Volume of {l in orbit : |l| <= lam} as prefactor * |rho|^rho_power * lam^lambda_power."""

    prefactor: int
    rho_power: Fraction
    lambda_power: int
    value: float
    threshold: float

    def to_json(self) -> dict:
        return {
            "prefactor": self.prefactor,
            "rho_power": self.rho_power,
            "lambda_power": self.lambda_power,
            "value": self.value,
            "threshold": self.threshold,
        }


def _check(orbit: FlatOrbit, D: DilationFamily):
    if orbit.algebra != D.algebra:
        raise IncompatibleOperands("orbit and dilation family live on different algebras")


def ball_orbit_measure_closed(orbit: FlatOrbit, lam: float, D: DilationFamily) -> OrbitalMeasure:
    _check(orbit, D)
    if not lam > 0:
        raise InvalidParameter("lam must be positive", lam=lam)
    wz = D.weights[orbit.center_index]
    threshold = abs(float(orbit.rho)) ** (1.0 / wz)
    span = orbit.span_indices
    if threshold > lam:
        value = 0.0
    else:
        value = 1.0 / float(orbit.pfaffian)
        for j in span:
            value *= 2.0 * lam ** D.weights[j]
    return OrbitalMeasure(
        prefactor=2 ** len(span),
        rho_power=orbit.rho_power,
        lambda_power=D.Q - D.Q_center,
        value=value,
        threshold=threshold,
    )


def _mc_chunk(seed, chunk, count, center, rho, span, half, weights, lam):
    gen = np.random.Generator(np.random.Philox(key=np.array([seed, chunk], dtype=np.uint64)))
    pts = np.zeros((count, len(weights)))
    pts[:, center] = rho
    pts[:, span] = gen.uniform(-1.0, 1.0, size=(count, len(span))) * half
    return int(np.count_nonzero(quasinorm_array(pts, weights) <= lam))


def ball_orbit_measure_mc(
    orbit: FlatOrbit,
    lam: float,
    D: DilationFamily,
    samples: int = 1_000_000,
    seed: int = 0,
    inflate: float = 1.25,
    workers: int | None = None,
) -> tuple[float, float]:
    """Rejection-sampling estimate of the orbital ball measure.

    Points are drawn uniformly from the box with half-sides
    ``inflate * lam**theta_j`` and kept when the full dual vector
    rho Z* + l has quasi-norm at most ``lam``.  Each block of
    ``MC_CHUNK`` samples has its own Philox stream keyed by (seed, block),
    and hit counts are summed as integers, so the estimate does not depend
    on the number of worker threads.
    """
    _check(orbit, D)
    if samples < 10_000:
        raise InvalidParameter("Monte Carlo needs at least 10^4 samples", samples=samples)
    if not inflate >= 1:
        raise InvalidParameter("inflate must be >= 1", inflate=inflate)
    span = np.array(orbit.span_indices)
    half = inflate * lam ** np.array([D.weights[j] for j in span], dtype=float)
    volume = float(np.prod(2 * half)) / float(orbit.pfaffian)
    counts = [MC_CHUNK] * (samples // MC_CHUNK)
    if samples % MC_CHUNK:
        counts.append(samples % MC_CHUNK)
    args = (orbit.center_index, float(orbit.rho), span, half, D.weights, lam)
    nw = workers or thread_count()
    if nw > 1:
        with ThreadPoolExecutor(nw) as ex:
            hits = sum(ex.map(lambda c: _mc_chunk(seed, c, counts[c], *args), range(len(counts))))
    else:
        hits = sum(_mc_chunk(seed, c, cnt, *args) for c, cnt in enumerate(counts))
    p = hits / samples
    return volume * p, volume * math.sqrt(p * (1 - p) / samples)


def coadjoint_action(X: AlgebraElement, l: DualVector) -> DualVector:
    """Ad*(exp X) l = l o exp(-ad X)."""
    alg = X.algebra
    if l.algebra != alg:
        raise IncompatibleOperands("element and dual vector live on different algebras")
    d = alg.dim
    ad = np.zeros((d, d))
    x = [float(c) for c in X.coeffs]
    for i, j, k, c in alg.nonzero_constants():
        # [X, e_j] picks up x_i c_ij^k e_k and [X, e_i] picks up -x_j c_ij^k e_k
        ad[k, j] += x[i] * float(c)
        ad[k, i] -= x[j] * float(c)
    E = np.eye(d)
    term = np.eye(d)
    for m in range(1, d + 1):
        term = term @ (-ad) / m
        E = E + term
    return DualVector(alg, l.coeffs @ E)


@dataclass(frozen=True)
class EngelOrbit:
    kind: str
    params: tuple[float, ...]

    def __str__(self):
        return f"{self.kind}({', '.join(f'{p:g}' for p in self.params)})"


def engel_orbit_family(l: DualVector, tol: float = 0.0) -> EngelOrbit:
    """Classify the coadjoint orbit of an Engel functional.

    With l = alpha X_1* + beta X_2* + gamma X_3* + delta X_4* the orbits are
    parabolic cylinders for delta != 0 (labelled by delta and the value of
    beta - gamma^2 / (2 delta), which is constant on the orbit), planes
    through gamma X_3* for delta = 0 != gamma, and single points otherwise.
    """
    if l.algebra.family != "engel":
        raise IncompatibleOperands("engel_orbit_family needs a functional on the Engel algebra")
    alpha, beta, gamma, delta = (float(v) for v in l.coeffs)
    if abs(delta) > tol:
        return EngelOrbit("cylinder", (delta, beta - gamma**2 / (2 * delta)))
    if abs(gamma) > tol:
        return EngelOrbit("plane", (gamma,))
    return EngelOrbit("point", (alpha, beta))

"""Dilation families, homogeneous dimensions and quasi-norms on the dual.

A dilation family is stored as one positive integer weight per basis
vector; the basis is assumed to diagonalize the generator.  Weight tuples
are gcd-reduced on construction because proportional tuples give the same
family up to reparametrising r.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from itertools import product
from math import gcd
from typing import Sequence

import numpy as np

from .errors import IncompatibleOperands, InvalidParameter, InvalidWeights, NotAnAutomorphism
from .lie import GradedLieAlgebra, dynin_folland_layout


@dataclass(frozen=True)
class DilationFamily:
    algebra: GradedLieAlgebra
    weights: tuple[int, ...]
    raw_weights: tuple[int, ...]

    @property
    def Q(self) -> int:
        return sum(self.weights)

    @property
    def Q_center(self) -> int:
        return sum(self.weights[i] for i in self.algebra.central_indices())

    @property
    def max_weight(self) -> int:
        return max(self.weights)

    def weight(self, label: str) -> int:
        return self.weights[self.algebra.index(label)]

    @property
    def thetas(self) -> tuple[int, ...] | None:
        """Dynin-Folland parameters (theta_1, .., theta_{2n+1}).

        theta_j is the weight of X_j for j <= 2n and theta_{2n+1} that of
        Y_{2n+1}; ``None`` for other families.
        """
        if self.algebra.family != "dynin-folland":
            return None
        n = self.algebra.n
        _z, Y, X = dynin_folland_layout(n)
        return tuple(self.weights[X[j]] for j in range(2 * n)) + (self.weights[Y[2 * n]],)

    def generator(self) -> np.ndarray:
        """Diagonal matrix A with D_r = exp(A log r)."""
        return np.diag(np.array(self.weights, dtype=float))

    def to_json(self) -> dict:
        return {"weights": list(self.weights), "raw_weights": list(self.raw_weights), "Q": self.Q, "Q_center": self.Q_center}


def df_weight_vector(n: int, thetas: Sequence[int]) -> tuple[int, ...]:
    """Expand (theta_1, .., theta_{2n+1}) into one weight per basis vector.

    X_{2n+1} receives theta_1 + theta_{n+1}; when the thetas violate the
    pairing constraint the resulting tuple is rejected by the bracket check.
    """
    m = 2 * n + 1
    if len(thetas) != m:
        raise InvalidWeights(f"expected {m} Dynin-Folland parameters", got=len(thetas))
    th = [int(t) for t in thetas]
    pair = th[0] + th[n]
    top = th[2 * n]
    z, Y, X = dynin_folland_layout(n)
    w = [0] * (2 * m + 1)
    w[z] = pair + top
    for j in range(n):
        w[Y[j]] = th[n + j] + top
        w[Y[n + j]] = th[j] + top
        w[X[j]] = th[j]
        w[X[n + j]] = th[n + j]
    w[Y[2 * n]] = top
    w[X[2 * n]] = pair
    return tuple(w)


def _as_ints(weights) -> tuple[int, ...]:
    out = []
    for w in weights:
        try:
            f = Fraction(w) if not isinstance(w, float) else Fraction(w).limit_denominator(10**6)
        except (TypeError, ValueError):
            raise InvalidWeights("weights must be positive integers", weights=list(map(str, weights))) from None
        if f.denominator != 1 or f < 1:
            raise InvalidWeights("weights must be positive integers", weights=list(map(str, weights)))
        out.append(int(f))
    return tuple(out)


def validate_weights(algebra: GradedLieAlgebra, weights: Sequence[int]) -> DilationFamily:
    """Check that the weights define Lie algebra automorphisms D_r.

    ``weights`` has one entry per basis vector, or for the Dynin-Folland
    family it may be the short tuple (theta_1, .., theta_{2n+1}).
    """
    raw = _as_ints(weights)
    if algebra.family == "dynin-folland" and len(raw) == 2 * algebra.n + 1 and len(raw) != algebra.dim:
        raw = df_weight_vector(algebra.n, raw)
    if len(raw) != algebra.dim:
        raise InvalidWeights("one weight per basis vector is required", expected=algebra.dim, got=len(raw))
    for i, j, k, _c in algebra.nonzero_constants():
        if raw[i] + raw[j] != raw[k]:
            lab = algebra.labels
            raise NotAnAutomorphism(
                f"weight of [{lab[i]}, {lab[j]}] must equal weight({lab[i]}) + weight({lab[j]})",
                triple=(lab[i], lab[j], lab[k]),
                weights=(raw[i], raw[j], raw[k]),
            )
    g = reduce(gcd, raw)
    return DilationFamily(algebra, tuple(w // g for w in raw), raw)


def canonical_dilations(algebra: GradedLieAlgebra) -> DilationFamily:
    return validate_weights(algebra, algebra.strata)


def enumerate_df_weights(n: int, max_weight: int) -> list[DilationFamily]:
    """All gcd-normalized admissible Dynin-Folland tuples with entries <= max_weight."""
    from .lie import build_dynin_folland

    if max_weight < 1:
        raise InvalidParameter("max_weight must be >= 1", max_weight=max_weight)
    alg = build_dynin_folland(n)
    seen = set()
    out = []
    for th in product(range(1, max_weight + 1), repeat=2 * n + 1):
        if reduce(gcd, th) != 1:
            continue
        if len({th[j] + th[n + j] for j in range(n)}) != 1:
            continue
        fam = validate_weights(alg, th)
        if fam.weights not in seen:
            seen.add(fam.weights)
            out.append(fam)
    return out


@dataclass(frozen=True)
class DualVector:
    algebra: GradedLieAlgebra
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (self.algebra.dim,):
            raise IncompatibleOperands("dual vector has the wrong length", expected=self.algebra.dim)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def basis(cls, algebra, label):
        c = np.zeros(algebra.dim)
        c[algebra.index(label)] = 1.0
        return cls(algebra, c)

    def __add__(self, other):
        return DualVector(self.algebra, self.coeffs + other.coeffs)

    def __mul__(self, s):
        return DualVector(self.algebra, s * self.coeffs)

    __rmul__ = __mul__


def _check_pair(l: DualVector, D: DilationFamily):
    if l.algebra != D.algebra:
        raise IncompatibleOperands("dual vector and dilation family live on different algebras")


def quasinorm(l: DualVector, D: DilationFamily) -> float:
    """max_j |l_j|^(1/theta_j)."""
    _check_pair(l, D)
    w = np.asarray(D.weights, dtype=float)
    return float(np.max(np.abs(l.coeffs) ** (1.0 / w)))


def quasinorm_array(coords: np.ndarray, weights: Sequence[int]) -> np.ndarray:
    """Row-wise quasi-norm of an ``(m, d)`` coordinate array."""
    w = np.asarray(weights, dtype=float)
    return np.max(np.abs(coords) ** (1.0 / w), axis=-1)


def dilate_dual(l: DualVector, r: float, D: DilationFamily) -> DualVector:
    """Coordinate j is scaled by r**theta_j."""
    _check_pair(l, D)
    if not r > 0:
        raise InvalidParameter("dilation parameter must be positive", r=r)
    w = np.asarray(D.weights, dtype=float)
    return DualVector(l.algebra, l.coeffs * r**w)

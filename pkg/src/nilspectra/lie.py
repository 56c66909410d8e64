"""Graded nilpotent Lie algebras with exact rational structure constants.

Three families are built in:

* ``heisenberg(n)`` with basis ``X_1 .. X_{2n+1}`` and ``[X_j, X_{n+j}] = X_{2n+1}``;
* ``dynin_folland(n)`` with basis ``Z, Y_1 .. Y_{2n+1}, X_{2n+1} .. X_1``;
* ``engel()`` with basis ``X_1 .. X_4``.

Basis order is the order of ``labels`` and every coordinate vector in the
package (algebra elements, group elements, dual vectors, weights) follows it.
Structure constants are stored as ``{(i, j): ((k, c), ...)}`` with zero-based
``i < j`` and :class:`fractions.Fraction` values, so the Jacobi and gradation
checks are exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    GradationViolation,
    IncompatibleOperands,
    InvalidChart,
    InvalidParameter,
    JacobiViolation,
    MalformedAlgebra,
    UnsupportedStep,
)

HALF = Fraction(1, 2)


@dataclass(frozen=True, eq=False)
class GradedLieAlgebra:
    labels: tuple[str, ...]
    constants: Mapping[tuple[int, int], tuple[tuple[int, Fraction], ...]]
    strata: tuple[int, ...]
    step: int
    family: str = "custom"
    n: int | None = None
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {lab: i for i, lab in enumerate(self.labels)})
        d = len(self.labels)
        if len(self._index) != d:
            raise MalformedAlgebra("duplicate basis labels")
        if len(self.strata) != d or any(s < 1 for s in self.strata):
            raise MalformedAlgebra("strata must be positive integers, one per basis vector")
        for (i, j), terms in self.constants.items():
            if not (0 <= i < j < d):
                raise MalformedAlgebra("bracket indices must satisfy i < j within range", pair=(i + 1, j + 1))
            for k, c in terms:
                if not 0 <= k < d:
                    raise MalformedAlgebra("bracket target out of range", triple=(i + 1, j + 1, k + 1))
                if self.strata[k] != self.strata[i] + self.strata[j]:
                    raise GradationViolation(
                        "bracket does not respect the gradation",
                        triple=(self.labels[i], self.labels[j], self.labels[k]),
                    )

    @property
    def dim(self) -> int:
        return len(self.labels)

    def __eq__(self, other):
        if not isinstance(other, GradedLieAlgebra):
            return NotImplemented
        return (
            self.labels == other.labels
            and self.strata == other.strata
            and _canon(self.constants) == _canon(other.constants)
        )

    def __hash__(self):
        return hash((self.labels, self.strata))

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise InvalidParameter(f"unknown basis label {label!r}") from None

    def structure_constant(self, i: int, j: int, k: int) -> Fraction:
        """c_{ij}^k for zero-based indices, antisymmetry applied."""
        if i == j:
            return Fraction(0)
        sign = 1
        if i > j:
            i, j, sign = j, i, -1
        for kk, c in self.constants.get((i, j), ()):
            if kk == k:
                return sign * c
        return Fraction(0)

    def nonzero_constants(self) -> Iterable[tuple[int, int, int, Fraction]]:
        for (i, j), terms in sorted(self.constants.items()):
            for k, c in terms:
                if c != 0:
                    yield i, j, k, c

    def central_indices(self) -> tuple[int, ...]:
        """Basis vectors that bracket trivially with everything.

        For the built-in algebras this is a basis of the center.
        """
        touched = set()
        for i, j, _k, _c in self.nonzero_constants():
            touched.add(i)
            touched.add(j)
        return tuple(i for i in range(self.dim) if i not in touched)

    def basis(self, i: int | str) -> "AlgebraElement":
        if isinstance(i, str):
            i = self.index(i)
        coeffs = [Fraction(0)] * self.dim
        coeffs[i] = Fraction(1)
        return AlgebraElement(self, tuple(coeffs))

    def element(self, coeffs: Sequence | Mapping[str, object]) -> "AlgebraElement":
        if isinstance(coeffs, Mapping):
            vals = [Fraction(0)] * self.dim
            for lab, c in coeffs.items():
                vals[self.index(lab)] = c
            coeffs = vals
        coeffs = tuple(coeffs)
        if len(coeffs) != self.dim:
            raise IncompatibleOperands("coefficient vector has the wrong length", expected=self.dim, got=len(coeffs))
        return AlgebraElement(self, coeffs)

    def zero(self) -> "AlgebraElement":
        return AlgebraElement(self, (Fraction(0),) * self.dim)

    # JSON document: indices are 1-based positions in ``labels``.
    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "labels": list(self.labels),
            "step": self.step,
            "strata": list(self.strata),
            "brackets": [
                {"i": i + 1, "j": j + 1, "k": k + 1, "num": c.numerator, "den": c.denominator}
                for i, j, k, c in self.nonzero_constants()
            ],
        }

    @classmethod
    def from_json(cls, doc: Mapping) -> "GradedLieAlgebra":
        try:
            labels = tuple(str(x) for x in doc["labels"])
            strata = tuple(int(s) for s in doc["strata"])
            dim = int(doc.get("dim", len(labels)))
            raw = doc.get("brackets", [])
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedAlgebra(f"algebra document is missing or has bad fields: {exc}") from None
        if dim != len(labels):
            raise MalformedAlgebra("dim does not match the number of labels", dim=dim, labels=len(labels))
        table: dict[tuple[int, int], dict[int, Fraction]] = {}
        for b in raw:
            i, j, k = int(b["i"]) - 1, int(b["j"]) - 1, int(b["k"]) - 1
            c = Fraction(int(b["num"]), int(b.get("den", 1)))
            if i == j:
                raise MalformedAlgebra("diagonal bracket entry", pair=(i + 1, j + 1))
            if i > j:
                i, j, c = j, i, -c
            row = table.setdefault((i, j), {})
            row[k] = row.get(k, Fraction(0)) + c
        constants = {key: tuple(sorted((k, c) for k, c in row.items() if c != 0)) for key, row in table.items()}
        constants = {key: v for key, v in constants.items() if v}
        step = int(doc.get("step", max(strata) if strata else 1))
        alg = cls(labels, constants, strata, step)
        res = jacobi_residual(alg)
        if res != 0:
            raise JacobiViolation("structure constants violate the Jacobi identity", residual=str(res))
        return alg


def _canon(constants):
    return sorted((key, tuple(sorted(v))) for key, v in constants.items() if v)


@dataclass(frozen=True)
class AlgebraElement:
    algebra: GradedLieAlgebra
    coeffs: tuple

    def __post_init__(self):
        if len(self.coeffs) != self.algebra.dim:
            raise IncompatibleOperands("coefficient vector has the wrong length")

    def _check(self, other):
        if not isinstance(other, AlgebraElement) or other.algebra != self.algebra:
            raise IncompatibleOperands("elements belong to different algebras")

    def __add__(self, other):
        self._check(other)
        return AlgebraElement(self.algebra, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other):
        self._check(other)
        return AlgebraElement(self.algebra, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self):
        return AlgebraElement(self.algebra, tuple(-a for a in self.coeffs))

    def __mul__(self, s):
        return AlgebraElement(self.algebra, tuple(s * a for a in self.coeffs))

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return all(a == 0 for a in self.coeffs)

    def array(self) -> np.ndarray:
        return np.array([float(a) for a in self.coeffs])

    def __repr__(self):
        parts = [f"{c}*{lab}" for c, lab in zip(self.coeffs, self.algebra.labels) if c != 0]
        return " + ".join(parts) if parts else "0"


def bracket(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    """Bilinear extension of the structure constants.

    Stays exact when both inputs carry rational coordinates.
    """
    if not isinstance(a, AlgebraElement) or not isinstance(b, AlgebraElement) or a.algebra != b.algebra:
        raise IncompatibleOperands("bracket of elements from different algebras")
    out = [Fraction(0)] * a.algebra.dim
    x, y = a.coeffs, b.coeffs
    for (i, j), terms in a.algebra.constants.items():
        w = x[i] * y[j] - x[j] * y[i]
        if w:
            for k, c in terms:
                out[k] += c * w
    return AlgebraElement(a.algebra, tuple(out))


def _sparse_table(algebra: GradedLieAlgebra) -> dict[tuple[int, int], dict[int, Fraction]]:
    table: dict[tuple[int, int], dict[int, Fraction]] = {}
    for i, j, k, c in algebra.nonzero_constants():
        table.setdefault((i, j), {})[k] = c
        table.setdefault((j, i), {})[k] = -c
    return table


def jacobi_residual(algebra: GradedLieAlgebra) -> Fraction:
    """Largest absolute coordinate of the Jacobiator over all basis triples.

    Works on the sparse exact table, so only triples with some nonzero
    inner bracket cost anything.
    """
    table = _sparse_table(algebra)
    worst = Fraction(0)

    def outer(inner: dict[int, Fraction], c: int, acc: dict[int, Fraction]):
        for m, cm in inner.items():
            for p, cp in table.get((m, c), {}).items():
                acc[p] = acc.get(p, 0) + cm * cp

    for i, j, k in combinations(range(algebra.dim), 3):
        ij, jk, ki = table.get((i, j)), table.get((j, k)), table.get((k, i))
        if not (ij or jk or ki):
            continue
        acc: dict[int, Fraction] = {}
        if ij:
            outer(ij, k, acc)
        if jk:
            outer(jk, i, acc)
        if ki:
            outer(ki, j, acc)
        for v in acc.values():
            worst = max(worst, abs(Fraction(v)))
    return worst


def gradation_defects(algebra: GradedLieAlgebra) -> list[tuple[int, int, int]]:
    s = algebra.strata
    return [(i, j, k) for i, j, k, _c in algebra.nonzero_constants() if s[k] != s[i] + s[j]]


def _table(entries):
    """Turn ``[(i, j, k, c), ...]`` (zero-based, any order of i, j) into constants."""
    table: dict[tuple[int, int], dict[int, Fraction]] = {}
    for i, j, k, c in entries:
        c = Fraction(c)
        if i > j:
            i, j, c = j, i, -c
        row = table.setdefault((i, j), {})
        row[k] = row.get(k, Fraction(0)) + c
    return {key: tuple(sorted(row.items())) for key, row in table.items()}


def build_heisenberg(n: int) -> GradedLieAlgebra:
    if not isinstance(n, int) or n < 1:
        raise InvalidParameter("Heisenberg algebra needs n >= 1", n=n)
    labels = tuple(f"X_{j}" for j in range(1, 2 * n + 2))
    top = 2 * n
    constants = _table((j, n + j, top, 1) for j in range(n))
    strata = (1,) * (2 * n) + (2,)
    return GradedLieAlgebra(labels, constants, strata, 2, "heisenberg", n)


def dynin_folland_layout(n: int) -> tuple[int, list[int], list[int]]:
    """Zero-based positions of Z, Y_1..Y_{2n+1} and X_1..X_{2n+1}."""
    m = 2 * n + 1
    z = 0
    ys = list(range(1, m + 1))
    # X_{2n+1} .. X_1 follow the Y block, so X_j sits at 2m + 1 - j
    xs = [2 * m + 1 - j for j in range(1, m + 1)]
    return z, ys, xs


def build_dynin_folland(n: int) -> GradedLieAlgebra:
    if not isinstance(n, int) or n < 1:
        raise InvalidParameter("Dynin-Folland algebra needs n >= 1", n=n)
    m = 2 * n + 1
    z, Y, X = dynin_folland_layout(n)
    labels = ["Z"] + [f"Y_{j}" for j in range(1, m + 1)] + [f"X_{j}" for j in range(m, 0, -1)]
    e = []
    for j in range(m):
        e.append((X[j], Y[j], z, 1))
    for j in range(n):
        e.append((X[j], X[n + j], X[2 * n], 1))
        e.append((X[j], Y[2 * n], Y[n + j], -HALF))
        e.append((X[n + j], Y[2 * n], Y[j], HALF))
    strata = [0] * (2 * m + 1)
    strata[z] = 3
    for j in range(2 * n):
        strata[Y[j]] = 2
        strata[X[j]] = 1
    strata[X[2 * n]] = 2
    strata[Y[2 * n]] = 1
    return GradedLieAlgebra(tuple(labels), _table(e), tuple(strata), 3, "dynin-folland", n)


def build_engel() -> GradedLieAlgebra:
    labels = ("X_1", "X_2", "X_3", "X_4")
    constants = _table([(0, 1, 2, 1), (0, 2, 3, 1)])
    return GradedLieAlgebra(labels, constants, (1, 1, 2, 3), 3, "engel", None)


def build_algebra(group: str, n: int | None = None) -> GradedLieAlgebra:
    g = group.lower().replace("_", "-")
    if g in ("heisenberg", "h", "hn"):
        return build_heisenberg(n if n is not None else 1)
    if g in ("df", "dynin-folland", "dyninfolland"):
        return build_dynin_folland(n if n is not None else 1)
    if g == "engel":
        return build_engel()
    raise InvalidParameter(f"unknown group family {group!r}")


def bch_multiply(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    """Product exp(a) exp(b) = exp(c) in exponential coordinates.

    The Baker-Campbell-Hausdorff series is cut after the degree three
    brackets, which is exact for algebras of step at most three.
    """
    if a.algebra != b.algebra:
        raise IncompatibleOperands("elements belong to different algebras")
    if a.algebra.step > 3:
        raise UnsupportedStep("truncated BCH is only exact up to step 3", step=a.algebra.step)
    ab = bracket(a, b)
    third = bracket(a, ab) + bracket(b, bracket(b, a))
    return a + b + ab * HALF + third * Fraction(1, 12)


EXPONENTIAL = "exponential"
SPLIT = "split-exponential"


@dataclass(frozen=True)
class GroupElement:
    algebra: GradedLieAlgebra
    chart: str
    coords: tuple

    def __post_init__(self):
        if self.chart not in (EXPONENTIAL, SPLIT):
            raise InvalidChart(f"unknown chart {self.chart!r}")
        if self.chart == SPLIT and self.algebra.family != "dynin-folland":
            raise InvalidChart("split-exponential coordinates exist only for the Dynin-Folland family")
        if len(self.coords) != self.algebra.dim:
            raise IncompatibleOperands("coordinate vector has the wrong length")

    @classmethod
    def identity(cls, algebra, chart=EXPONENTIAL):
        return cls(algebra, chart, (0,) * algebra.dim)

    def array(self) -> np.ndarray:
        return np.array([float(a) for a in self.coords])


def _heis_product(x, xp, n):
    """Heisenberg law on ascending coordinates (x_1, .., x_{2n+1})."""
    out = [a + b for a, b in zip(x, xp)]
    s = 0
    for j in range(n):
        s += x[j] * xp[n + j] - xp[j] * x[n + j]
    out[2 * n] += s * HALF if isinstance(s, (int, Fraction)) else 0.5 * s
    return out


def heisenberg_multiply(g: GroupElement, gp: GroupElement) -> GroupElement:
    alg = g.algebra
    if alg.family != "heisenberg" or gp.algebra != alg:
        raise IncompatibleOperands("heisenberg_multiply needs two elements of the same Heisenberg group")
    if g.chart != EXPONENTIAL or gp.chart != EXPONENTIAL:
        raise InvalidChart("Heisenberg law is stated in exponential coordinates")
    return GroupElement(alg, EXPONENTIAL, tuple(_heis_product(g.coords, gp.coords, alg.n)))


def _df_unpack(coords, n):
    z, Y, X = dynin_folland_layout(n)
    return coords[z], [coords[i] for i in Y], [coords[i] for i in X]


def _df_pack(zc, y, x, n):
    z, Y, X = dynin_folland_layout(n)
    out = [0] * (4 * n + 3)
    out[z] = zc
    for i, v in zip(Y, y):
        out[i] = v
    for i, v in zip(X, x):
        out[i] = v
    return tuple(out)


def _half(v):
    return v * HALF if isinstance(v, (int, Fraction)) else 0.5 * v


def df_group_multiply(g: GroupElement, gp: GroupElement) -> GroupElement:
    """Dynin-Folland group law in split-exponential coordinates.

    With g = exp(zZ + <y, Y>) exp(<x, X>) the product is
    (z + z' + <x, y'>, y + y' + 1/2 coad(x) y', x.x') where x.x' is the
    Heisenberg law and coad(x) only moves y'_{2n+1} into the first 2n slots.
    """
    alg = g.algebra
    if alg.family != "dynin-folland" or gp.algebra != alg:
        raise IncompatibleOperands("df_group_multiply needs two elements of the same Dynin-Folland group")
    if g.chart != SPLIT or gp.chart != SPLIT:
        raise InvalidChart("Dynin-Folland law is stated in split-exponential coordinates")
    n = alg.n
    z, y, x = _df_unpack(g.coords, n)
    zp, yp, xp = _df_unpack(gp.coords, n)
    zz = z + zp + sum(a * b for a, b in zip(x, yp))
    yy = [a + b for a, b in zip(y, yp)]
    top = yp[2 * n]
    for j in range(n):
        yy[j] += _half(top * x[n + j])
        yy[n + j] -= _half(top * x[j])
    xx = _heis_product(x, xp, n)
    return GroupElement(alg, SPLIT, _df_pack(zz, yy, xx, n))


def df_group_inverse(g: GroupElement) -> GroupElement:
    alg = g.algebra
    if g.chart != SPLIT or alg.family != "dynin-folland":
        raise InvalidChart("df_group_inverse needs split-exponential coordinates")
    n = alg.n
    z, y, x = _df_unpack(g.coords, n)
    xi = [-a for a in x]
    yi = [-a for a in y]
    top = y[2 * n]
    for j in range(n):
        yi[j] += _half(top * x[n + j])
        yi[n + j] -= _half(top * x[j])
    zi = -z - sum(a * b for a, b in zip(x, yi))
    return GroupElement(alg, SPLIT, _df_pack(zi, yi, xi, n))


def split_to_exponential(g: GroupElement) -> GroupElement:
    """exp(p) exp(q) -> log of the product, computed with the BCH product."""
    alg = g.algebra
    if g.chart != SPLIT:
        raise InvalidChart("expected split-exponential coordinates")
    z, y, x = _df_unpack(g.coords, alg.n)
    zeros = [0] * len(y)
    p = alg.element(_df_pack(z, y, zeros, alg.n))
    q = alg.element(_df_pack(0, zeros, x, alg.n))
    return GroupElement(alg, EXPONENTIAL, bch_multiply(p, q).coeffs)


def exponential_to_split(g: GroupElement) -> GroupElement:
    """Inverse of :func:`split_to_exponential`.

    The span of Z and the Y's is an ideal, so projecting log(g) onto the X
    block along it is a homomorphism; that projection is the x part and the
    remainder is recovered with one more BCH product.
    """
    alg = g.algebra
    if g.chart != EXPONENTIAL or alg.family != "dynin-folland":
        raise InvalidChart("expected exponential coordinates on a Dynin-Folland group")
    n = alg.n
    _z, y, x = _df_unpack(g.coords, n)
    zeros = [0] * len(y)
    q = alg.element(_df_pack(0, zeros, x, n))
    p = bch_multiply(alg.element(g.coords), -q)
    zp, yp, _ = _df_unpack(p.coeffs, n)
    return GroupElement(alg, SPLIT, _df_pack(zp, yp, x, n))


def is_stratified(algebra: GradedLieAlgebra) -> bool:
    """True when the stratum-1 basis vectors generate the whole algebra."""
    first = [algebra.basis(i) for i, s in enumerate(algebra.strata) if s == 1]
    layer = list(first)
    found = list(first)
    for _ in range(max(algebra.strata)):
        layer = [bracket(a, b) for a in first for b in layer]
        layer = [v for v in layer if not v.is_zero()]
        found += layer
    if not found:
        return False
    rank = np.linalg.matrix_rank(np.array([v.array() for v in found]))
    return int(rank) == algebra.dim

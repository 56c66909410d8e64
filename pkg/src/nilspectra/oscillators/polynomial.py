"""Sparse multivariate polynomials and the class p(t) exp(q(t)).

Coefficients may be ints, Fractions, floats or complex numbers; rational
inputs stay rational until they meet a float.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Number
from typing import Iterable, Mapping, Sequence

import numpy as np

from ..errors import IncompatibleOperands, InvalidFunction


def _is_zero(c) -> bool:
    return c == 0


class Poly:
    """Polynomial in ``nvars`` variables stored as {exponent tuple: coefficient}."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[tuple, Number] | None = None):
        self.nvars = nvars
        clean = {}
        for e, c in (terms or {}).items():
            e = tuple(int(x) for x in e)
            if len(e) != nvars or any(x < 0 for x in e):
                raise InvalidFunction("bad exponent tuple", exponent=e, nvars=nvars)
            if not _is_zero(c):
                clean[e] = clean.get(e, 0) + c
        self.terms = {e: c for e, c in clean.items() if not _is_zero(c)}

    @classmethod
    def constant(cls, nvars, c) -> "Poly":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def var(cls, nvars, j, c=1) -> "Poly":
        e = [0] * nvars
        e[j] = 1
        return cls(nvars, {tuple(e): c})

    @classmethod
    def linear(cls, coeffs: Sequence, const=0) -> "Poly":
        nv = len(coeffs)
        out = {(0,) * nv: const}
        for j, c in enumerate(coeffs):
            e = [0] * nv
            e[j] = 1
            out[tuple(e)] = c
        return cls(nv, out)

    def _check(self, other: "Poly"):
        if other.nvars != self.nvars:
            raise IncompatibleOperands("polynomials in different numbers of variables")

    def __add__(self, other):
        if isinstance(other, Number):
            other = Poly.constant(self.nvars, other)
        self._check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return Poly(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Number):
            if _is_zero(other):
                return Poly(self.nvars)
            return Poly(self.nvars, {e: c * other for e, c in self.terms.items()})
        self._check(other)
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return Poly(self.nvars, out)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, Number):
            other = Poly.constant(self.nvars, other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def coefficient(self, exponent: Sequence[int]):
        return self.terms.get(tuple(exponent), 0)

    def derivative(self, j: int) -> "Poly":
        out = {}
        for e, c in self.terms.items():
            if e[j]:
                f = list(e)
                f[j] -= 1
                out[tuple(f)] = c * e[j]
        return Poly(self.nvars, out)

    def derivative_multi(self, alpha: Sequence[int]) -> "Poly":
        p = self
        for j, a in enumerate(alpha):
            for _ in range(a):
                p = p.derivative(j)
        return p

    def close_to(self, other: "Poly", atol=1e-12, rtol=1e-12) -> bool:
        self._check(other)
        scale = max([abs(c) for c in self.terms.values()] + [abs(c) for c in other.terms.values()] + [0.0])
        for e in set(self.terms) | set(other.terms):
            if abs(self.coefficient(e) - other.coefficient(e)) > atol + rtol * scale:
                return False
        return True

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points))
        if pts.shape[1] != self.nvars:
            raise IncompatibleOperands("points have the wrong dimension")
        out = np.zeros(pts.shape[0], dtype=complex)
        powers: dict = {}
        for e, c in self.terms.items():
            v = np.full(pts.shape[0], complex(c))
            for j, a in enumerate(e):
                if a:
                    key = (j, a)
                    if key not in powers:
                        powers[key] = pts[:, j] ** a
                    v = v * powers[key]
            out += v
        return out

    def compose_affine(self, A: Sequence[Sequence], b: Sequence) -> "Poly":
        """p(A t + b), with A given row by row."""
        nv = self.nvars
        if len(A) != nv or len(b) != nv:
            raise IncompatibleOperands("affine map has the wrong shape")
        m = len(A[0]) if nv else 0
        forms = [Poly.linear(list(A[j]), b[j]) for j in range(nv)]
        cache: dict = {}

        def power(j, a):
            key = (j, a)
            if key not in cache:
                cache[key] = Poly.constant(m, 1) if a == 0 else power(j, a - 1) * forms[j]
            return cache[key]

        out = Poly(m)
        for e, c in self.terms.items():
            term = Poly.constant(m, c)
            for j, a in enumerate(e):
                if a:
                    term = term * power(j, a)
            out = out + term
        return out

    def quadratic_matrix(self) -> np.ndarray:
        """Symmetric S with sum of the degree-two terms equal to t^T S t."""
        S = np.zeros((self.nvars, self.nvars), dtype=complex)
        for e, c in self.terms.items():
            if sum(e) != 2:
                continue
            idx = [j for j, a in enumerate(e) for _ in range(a)]
            i, j = idx
            if i == j:
                S[i, i] += c
            else:
                S[i, j] += complex(c) / 2
                S[j, i] += complex(c) / 2
        return S

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in sorted(self.terms.items(), key=lambda kv: (sum(kv[0]), kv[0])):
            mono = "*".join(f"t{j + 1}" + (f"^{a}" if a > 1 else "") for j, a in enumerate(e) if a)
            parts.append(f"({c})" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)


class PolyExpFunction:
    """f(t) = p(t) exp(q(t)) with deg q <= 2 and Re q negative definite at top order."""

    __slots__ = ("nvars", "poly", "exponent")

    def __init__(self, poly: Poly, exponent: Poly, check: bool = True):
        if poly.nvars != exponent.nvars:
            raise IncompatibleOperands("polynomial and exponent use different numbers of variables")
        self.nvars = poly.nvars
        self.poly = poly
        self.exponent = exponent
        if check:
            if exponent.degree > 2:
                raise InvalidFunction("exponent must have degree at most two", degree=exponent.degree)
            S = exponent.quadratic_matrix().real
            if self.nvars and not np.all(np.linalg.eigvalsh((S + S.T) / 2) < 0):
                raise InvalidFunction("real part of the quadratic exponent must be negative definite")

    @classmethod
    def gaussian(cls, nvars: int, poly: Poly | None = None, scale: float = 0.5):
        q = Poly(nvars, {tuple(2 if k == j else 0 for k in range(nvars)): -scale for j in range(nvars)})
        return cls(poly if poly is not None else Poly.constant(nvars, 1), q)

    def derivative(self, j: int) -> "PolyExpFunction":
        p = self.poly.derivative(j) + self.poly * self.exponent.derivative(j)
        return PolyExpFunction(p, self.exponent, check=False)

    def times(self, c: Poly | Number) -> "PolyExpFunction":
        return PolyExpFunction(self.poly * c, self.exponent, check=False)

    def __add__(self, other: "PolyExpFunction") -> "PolyExpFunction":
        if other.exponent != self.exponent:
            raise InvalidFunction("only functions with identical exponents can be added symbolically")
        return PolyExpFunction(self.poly + other.poly, self.exponent, check=False)

    def modulate(self, linear: Poly) -> "PolyExpFunction":
        """Multiply by exp(linear)."""
        if linear.degree > 1:
            raise InvalidFunction("modulation must be affine")
        return PolyExpFunction(self.poly, self.exponent + linear, check=False)

    def substitute_affine(self, A, b) -> "PolyExpFunction":
        """t -> f(A t + b); A must be invertible to keep the decay."""
        return PolyExpFunction(self.poly.compose_affine(A, b), self.exponent.compose_affine(A, b))

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        return self.poly.evaluate(points) * np.exp(self.exponent.evaluate(points))

    def __repr__(self):
        return f"({self.poly}) * exp({self.exponent})"


def random_function(nvars: int, rng: np.random.Generator, degree: int = 2) -> PolyExpFunction:
    """A random member of the class with moderate coefficients."""
    terms = {}
    for e in _exponents(nvars, degree):
        terms[e] = complex(rng.normal(), rng.normal())
    M = rng.normal(size=(nvars, nvars)) * 0.15
    S = -(0.5 * np.eye(nvars) + M @ M.T)
    B = rng.normal(size=(nvars, nvars)) * 0.2
    B = (B + B.T) / 2
    q = {}
    for i in range(nvars):
        for j in range(i, nvars):
            e = [0] * nvars
            e[i] += 1
            e[j] += 1
            w = 1 if i == j else 2
            q[tuple(e)] = complex(w * S[i, j], w * B[i, j])
    for j in range(nvars):
        e = [0] * nvars
        e[j] = 1
        q[tuple(e)] = complex(0.3 * rng.normal(), rng.normal())
    return PolyExpFunction(Poly(nvars, terms), Poly(nvars, q))


def _exponents(nvars: int, degree: int) -> Iterable[tuple]:
    def rec(prefix, left, k):
        if k == nvars:
            yield tuple(prefix)
            return
        for a in range(left + 1):
            yield from rec(prefix + [a], left - a, k + 1)

    yield from rec([], degree, 0)


def sample_points(nvars: int, count: int = 128, seed: int = 20240101) -> np.ndarray:
    """Fixed battery of evaluation points in [-2, 2]^nvars."""
    return np.random.default_rng(seed).uniform(-2.0, 2.0, size=(count, nvars))

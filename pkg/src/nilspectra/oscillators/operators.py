"""Differential operators with polynomial coefficients.

An operator is sum_alpha c_alpha(t) d^alpha, stored as a map from the
derivative multi-index alpha to the coefficient polynomial c_alpha.  Terms
are merged by alpha on construction, which is the canonical form used for
coefficient-level comparisons.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product
from math import comb
from numbers import Number
from typing import Mapping

from ..errors import IncompatibleOperands, InvalidParameter
from .polynomial import Poly, PolyExpFunction


class DiffOperator:
    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[tuple, Poly] | None = None):
        self.nvars = nvars
        merged: dict[tuple, Poly] = {}
        for alpha, c in (terms or {}).items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != nvars:
                raise IncompatibleOperands("derivative multi-index has the wrong length")
            if isinstance(c, Number):
                c = Poly.constant(nvars, c)
            if c.nvars != nvars:
                raise IncompatibleOperands("coefficient uses a different number of variables")
            merged[alpha] = merged[alpha] + c if alpha in merged else c
        self.terms = {a: c for a, c in merged.items() if not c.is_zero()}

    # constructors
    @classmethod
    def identity(cls, nvars):
        return cls(nvars, {(0,) * nvars: Poly.constant(nvars, 1)})

    @classmethod
    def multiplication(cls, c: Poly | Number, nvars: int | None = None):
        if isinstance(c, Number):
            return cls(nvars, {(0,) * nvars: Poly.constant(nvars, c)})
        return cls(c.nvars, {(0,) * c.nvars: c})

    @classmethod
    def partial(cls, nvars, j, coeff: Poly | Number = 1):
        alpha = [0] * nvars
        alpha[j] = 1
        return cls(nvars, {tuple(alpha): coeff})

    def _check(self, other):
        if not isinstance(other, DiffOperator) or other.nvars != self.nvars:
            raise IncompatibleOperands("operators act on different numbers of variables")

    def __add__(self, other):
        self._check(other)
        out = dict(self.terms)
        for a, c in other.terms.items():
            out[a] = out[a] + c if a in out else c
        return DiffOperator(self.nvars, out)

    def __neg__(self):
        return DiffOperator(self.nvars, {a: -c for a, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, s):
        if isinstance(s, DiffOperator):
            return self.compose(s)
        return DiffOperator(self.nvars, {a: c * s for a, c in self.terms.items()})

    def __rmul__(self, s):
        return DiffOperator(self.nvars, {a: c * s for a, c in self.terms.items()})

    def __eq__(self, other):
        if not isinstance(other, DiffOperator):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash(tuple(sorted(self.terms)))

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def order(self) -> int:
        return max((sum(a) for a in self.terms), default=-1)

    def coefficient(self, alpha) -> Poly:
        return self.terms.get(tuple(alpha), Poly(self.nvars))

    def close_to(self, other: "DiffOperator", atol=1e-12, rtol=1e-12) -> bool:
        self._check(other)
        return all(
            self.coefficient(a).close_to(other.coefficient(a), atol, rtol) for a in set(self.terms) | set(other.terms)
        )

    def compose(self, other: "DiffOperator") -> "DiffOperator":
        """(self o other), expanded with the Leibniz rule."""
        self._check(other)
        out: dict[tuple, Poly] = {}
        for alpha, a in self.terms.items():
            for beta, b in other.terms.items():
                for gamma in product(*(range(k + 1) for k in alpha)):
                    db = b.derivative_multi(gamma)
                    if db.is_zero():
                        continue
                    w = 1
                    for k, g in zip(alpha, gamma):
                        w *= comb(k, g)
                    key = tuple(x - g + y for x, g, y in zip(alpha, gamma, beta))
                    term = a * db * w
                    out[key] = out[key] + term if key in out else term
        return DiffOperator(self.nvars, out)

    def power(self, k: int) -> "DiffOperator":
        if k < 0:
            raise InvalidParameter("negative operator power", k=k)
        out = DiffOperator.identity(self.nvars)
        base = self
        while k:
            if k & 1:
                out = out.compose(base)
            k >>= 1
            if k:
                base = base.compose(base)
        return out

    def is_real(self, tol: float = 0.0) -> bool:
        return all(abs(complex(c).imag) <= tol for p in self.terms.values() for c in p.terms.values())

    def to_json(self) -> list[dict]:
        out = []
        for alpha in sorted(self.terms):
            for e, c in sorted(self.terms[alpha].terms.items()):
                out.append({"derivative": list(alpha), "monomial": list(e), "coeff": _num(c)})
        return out

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for alpha, c in sorted(self.terms.items(), key=lambda kv: (sum(kv[0]), kv[0])):
            d = "".join(f"d{j + 1}" + (f"^{a}" if a > 1 else "") for j, a in enumerate(alpha) if a)
            parts.append(f"[{c}]" + (f" {d}" if d else ""))
        return " + ".join(parts)


def _num(c):
    if isinstance(c, (int, Fraction)):
        return {"num": int(Fraction(c).numerator), "den": int(Fraction(c).denominator)}
    c = complex(c)
    if c.imag == 0:
        return c.real
    return {"re": c.real, "im": c.imag}


def commutator(A: DiffOperator, B: DiffOperator) -> DiffOperator:
    return A.compose(B) - B.compose(A)


def apply(op: DiffOperator, f: PolyExpFunction) -> PolyExpFunction:
    """Exact action of ``op`` on ``f``; the result stays in the class."""
    if op.nvars != f.nvars:
        raise IncompatibleOperands("operator and function use different numbers of variables")
    cache: dict[tuple, PolyExpFunction] = {(0,) * f.nvars: f}

    def deriv(alpha):
        if alpha not in cache:
            j = next(i for i, a in enumerate(alpha) if a)
            parent = list(alpha)
            parent[j] -= 1
            cache[alpha] = deriv(tuple(parent)).derivative(j)
        return cache[alpha]

    poly = Poly(f.nvars)
    for alpha, c in op.terms.items():
        poly = poly + deriv(alpha).poly * c
    return PolyExpFunction(poly, f.exponent, check=False)

"""Sum-of-powers forms  P = sum_j sign_j c_j V_j^{p_j}  and their operator images.

A form is *classical* under a dilation family when every term has the same
homogeneous degree nu = p_j theta_j, nu_0 = nu / 2 is a multiple of each
theta_j, the signs follow (-1)^(nu_0 / theta_j), the coefficients are
positive, and the terms cover the whole basis or, on a stratified algebra,
the first stratum.  Such forms are positive Rockland forms.  Homogeneous
forms outside this pattern are labelled ``homogeneous-unverified``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Mapping, Sequence

from ..errors import IncompatibleOperands, InvalidForm, NotHomogeneous
from ..homogeneous import DilationFamily
from ..lie import GradedLieAlgebra, is_stratified
from .operators import DiffOperator
from .representation import _dpi_on, representation_dim

VERIFIED = "verified-classical"
UNVERIFIED = "homogeneous-unverified"


@dataclass(frozen=True)
class FormTerm:
    coeff: Fraction | float
    sign: int
    basis: int
    power: int


@dataclass(frozen=True)
class RocklandForm:
    algebra: GradedLieAlgebra
    terms: tuple[FormTerm, ...]
    nu: int | None = None
    nu0: int | None = None
    status: str | None = None

    def __post_init__(self):
        if not self.terms:
            raise InvalidForm("a form needs at least one term")
        for t in self.terms:
            if not t.coeff > 0:
                raise InvalidForm("coefficients must be strictly positive", basis=self.algebra.labels[t.basis])
            if t.sign not in (1, -1):
                raise InvalidForm("signs must be +1 or -1", sign=t.sign)
            if t.power < 2 or t.power % 2:
                raise InvalidForm("powers must be positive even integers", power=t.power)
            if not 0 <= t.basis < self.algebra.dim:
                raise InvalidForm("basis index out of range", basis=t.basis)

    @classmethod
    def from_json(cls, algebra: GradedLieAlgebra, doc: Mapping) -> "RocklandForm":
        """``{"terms": [{"coeff", "sign", "basis", "power"}]}``; basis is a label or a 1-based index."""
        try:
            raw = doc["terms"]
            terms = []
            for t in raw:
                b = t["basis"]
                idx = algebra.index(b) if isinstance(b, str) else int(b) - 1
                c = t.get("coeff", 1)
                c = Fraction(c["num"], c.get("den", 1)) if isinstance(c, Mapping) else Fraction(str(c))
                terms.append(FormTerm(c, int(t.get("sign", 1)), idx, int(t["power"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidForm(f"malformed form document: {exc}") from None
        return cls(algebra, tuple(terms))

    def to_json(self) -> dict:
        return {
            "terms": [
                {"coeff": _frac(t.coeff), "sign": t.sign, "basis": self.algebra.labels[t.basis], "power": t.power}
                for t in self.terms
            ]
        }

    def describe(self) -> str:
        parts = []
        for t in self.terms:
            s = "-" if t.sign < 0 else "+"
            c = "" if t.coeff == 1 else f"{t.coeff}*"
            parts.append(f"{s} {c}{self.algebra.labels[t.basis]}^{t.power}")
        return " ".join(parts).lstrip("+ ")


def _frac(c):
    c = Fraction(c)
    return {"num": c.numerator, "den": c.denominator}


def sublaplacian_form(algebra: GradedLieAlgebra) -> RocklandForm:
    """Negative sum of squares over the first stratum."""
    terms = tuple(FormTerm(Fraction(1), -1, i, 2) for i, s in enumerate(algebra.strata) if s == 1)
    return RocklandForm(algebra, terms)


def classical_form(D: DilationFamily, nu0: int | None = None, indices: Sequence[int] | None = None,
                   coeffs: Sequence | None = None) -> RocklandForm:
    """sum_j (-1)^(nu0/theta_j) c_j V_j^(2 nu0 / theta_j).

    ``indices`` defaults to the first stratum; ``nu0`` defaults to the least
    common multiple of their weights.
    """
    from math import lcm

    alg = D.algebra
    idx = list(indices) if indices is not None else [i for i, s in enumerate(alg.strata) if s == 1]
    if nu0 is None:
        nu0 = lcm(*(D.weights[i] for i in idx))
    cs = list(coeffs) if coeffs is not None else [1] * len(idx)
    terms = []
    for i, c in zip(idx, cs):
        q, r = divmod(nu0, D.weights[i])
        if r:
            raise InvalidForm("nu0 must be a multiple of every weight used", weight=D.weights[i], nu0=nu0)
        terms.append(FormTerm(Fraction(c), -1 if q % 2 else 1, i, 2 * q))
    return RocklandForm(alg, tuple(terms))


def validate_rockland_classical(form: RocklandForm, D: DilationFamily) -> RocklandForm:
    """Return ``form`` with nu, nu0 and status filled in.

    Raises :class:`NotHomogeneous` naming two terms of different degree.
    """
    if form.algebra != D.algebra:
        raise IncompatibleOperands("form and dilation family live on different algebras")
    labels = form.algebra.labels
    degrees = [t.power * D.weights[t.basis] for t in form.terms]
    for t, deg in zip(form.terms, degrees):
        if deg != degrees[0]:
            first = form.terms[0]
            raise NotHomogeneous(
                "terms have different homogeneous degrees",
                terms=(f"{labels[first.basis]}^{first.power}", f"{labels[t.basis]}^{t.power}"),
                degrees=(degrees[0], deg),
            )
    nu = degrees[0]
    nu0 = nu // 2
    ok = True
    seen = set()
    for t in form.terms:
        q, r = divmod(nu0, D.weights[t.basis])
        if r or t.sign != (-1) ** q or t.basis in seen:
            ok = False
        seen.add(t.basis)
    first = {i for i, s in enumerate(form.algebra.strata) if s == 1}
    if is_stratified(form.algebra):
        ok = ok and first <= seen
    else:
        ok = ok and seen == set(range(form.algebra.dim))
    return replace(form, nu=nu, nu0=nu0, status=VERIFIED if ok else UNVERIFIED)


def assemble_operator(form: RocklandForm, rho, n: int | None = None) -> DiffOperator:
    """dpi_rho(P) as an explicit differential operator."""
    if form.status is None:
        raise InvalidForm("validate the form against a dilation family before assembling it")
    alg = form.algebra
    if n is not None and alg.n != n:
        raise IncompatibleOperands("n does not match the form's algebra", n=n, algebra_n=alg.n)
    out = DiffOperator(representation_dim(alg))
    cache: dict = {}
    for t in form.terms:
        if t.basis not in cache:
            cache[t.basis] = _dpi_on(alg, t.basis, rho)
        out = out + cache[t.basis].power(t.power) * (t.sign * t.coeff)
    return out

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nilspectra.errors import (
    DegenerateRepresentation,
    IncompatibleOperands,
    InvalidChart,
    InvalidForm,
    InvalidFunction,
    InvalidParameter,
    NotHomogeneous,
)
from nilspectra.homogeneous import canonical_dilations, enumerate_df_weights, validate_weights
from nilspectra.lie import EXPONENTIAL, SPLIT, GroupElement, bracket, build_dynin_folland, build_heisenberg
from nilspectra.oscillators import (
    DiffOperator,
    FormTerm,
    Poly,
    PolyExpFunction,
    RocklandForm,
    apply,
    assemble_operator,
    classical_form,
    commutator,
    dpi_basis,
    dpi_element,
    rep_action,
    sublaplacian_form,
    validate_rockland_classical,
    verify_commutators,
    verify_homomorphism,
)
from nilspectra.oscillators.polynomial import sample_points
from nilspectra.oscillators.rockland import UNVERIFIED, VERIFIED

PTS1 = sample_points(1)
PTS3 = sample_points(3)


def d(j, nv=3, c=1):
    return DiffOperator.partial(nv, j, c)


def mul(p):
    return DiffOperator.multiplication(p)


def t(j, c=1, nv=3):
    return Poly.var(nv, j, c)


def mono(e, c):
    return Poly(3, {e: c})


def hand_expanded_oscillator(rho):
    """-(d1 - t2 d3 / 2)^2 - (d2 + t1 d3 / 2)^2 + (2 pi rho t3)^2, expanded by hand."""
    terms = {
        (2, 0, 0): Poly.constant(3, -1),
        (0, 2, 0): Poly.constant(3, -1),
        (0, 0, 2): mono((2, 0, 0), Fraction(-1, 4)) + mono((0, 2, 0), Fraction(-1, 4)),
        (1, 0, 1): mono((0, 1, 0), 1),
        (0, 1, 1): mono((1, 0, 0), -1),
        (0, 0, 0): mono((0, 0, 2), 4 * math.pi**2 * rho**2),
    }
    return DiffOperator(3, terms)


def reference_expansion(rho):
    """The explicit expansion with the mixed term +(t1 d2 - t2 d1) d3."""
    terms = dict(hand_expanded_oscillator(rho).terms)
    terms[(1, 0, 1)] = mono((0, 1, 0), -1)
    terms[(0, 1, 1)] = mono((1, 0, 0), 1)
    return DiffOperator(3, terms)


# ---------------------------------------------------------------- symbolic calculus

def test_apply_basics():
    f = PolyExpFunction(Poly.constant(1, 1), Poly(1, {(2,): -1}))
    assert np.allclose(apply(DiffOperator.identity(1), f).evaluate(PTS1), f.evaluate(PTS1))
    df = apply(DiffOperator.partial(1, 0), f).evaluate(PTS1)
    x = PTS1[:, 0]
    assert np.allclose(df, -2 * x * np.exp(-x * x))
    g = PolyExpFunction(Poly.var(1, 0), Poly(1, {(2,): -1}))
    tdt = apply(DiffOperator.partial(1, 0, Poly.var(1, 0)), g).evaluate(PTS1)
    assert np.allclose(tdt, (x - 2 * x**3) * np.exp(-x * x))


def test_function_class_checks():
    with pytest.raises(InvalidFunction):
        PolyExpFunction(Poly.constant(1, 1), Poly(1, {(2,): 1}))
    with pytest.raises(InvalidFunction):
        PolyExpFunction(Poly.constant(1, 1), Poly(1, {(4,): -1}))
    with pytest.raises(IncompatibleOperands):
        apply(DiffOperator.identity(2), PolyExpFunction.gaussian(1))
    with pytest.raises(InvalidParameter):
        DiffOperator.identity(1).power(-1)


first_order_coeffs = st.lists(st.integers(-3, 3), min_size=4, max_size=4)


def first_order(c):
    """c0 t1 d1 + c1 d2 + c2 t2 t3 d3 + c3 t1."""
    return (d(0, c=t(0, c[0])) + d(1, c=c[1]) + d(2, c=mono((0, 1, 1), c[2]))
            + mul(t(0, c[3])))


@given(first_order_coeffs, first_order_coeffs)
def test_compose_matches_sequential_application(a, b):
    A, B = first_order(a), first_order(b)
    f = PolyExpFunction.gaussian(3, Poly.linear([1, -2, 0.5], 1))
    lhs = apply(A.compose(B), f)
    rhs = apply(A, apply(B, f))
    assert lhs.exponent == rhs.exponent
    assert lhs.poly.close_to(rhs.poly)


def test_power_is_repeated_composition():
    X = d(0) + d(2, c=t(1, Fraction(-1, 2)))
    assert X.power(3) == X.compose(X).compose(X)
    assert X.power(0) == DiffOperator.identity(3)


# ---------------------------------------------------------------- representation table

def test_dpi_table_n1():
    rho = 1
    i2pi = 2j * math.pi
    assert dpi_basis("X_1", rho, 1) == d(0) + d(2, c=t(1, Fraction(-1, 2)))
    assert dpi_basis("X_2", rho, 1) == d(1) + d(2, c=t(0, Fraction(1, 2)))
    assert dpi_basis("X_3", rho, 1) == d(2)
    assert dpi_basis("Y_2", rho, 1) == mul(t(1, i2pi))
    assert dpi_basis("Z", rho, 1) == mul(Poly.constant(3, i2pi))
    with pytest.raises(DegenerateRepresentation):
        dpi_basis("Z", 0, 1)


@pytest.mark.parametrize("n", [1, 2])
@pytest.mark.parametrize("rho", [1, -2, 0.5])
def test_commutators_and_homomorphism(n, rho):
    assert verify_commutators(rho, n) <= 1e-10
    assert verify_homomorphism(rho, n, trials=10, seed=7) <= 1e-9


@pytest.mark.parametrize("n", [1, 2])
def test_schroedinger_commutators(n):
    assert verify_commutators(1.5, n, family="heisenberg") <= 1e-10


def test_commutator_pair_examples():
    alg = build_dynin_folland(1)
    X1, Y1, X2, X3 = (dpi_element(alg.basis(lab), 1) for lab in ("X_1", "Y_1", "X_2", "X_3"))
    assert commutator(X1, Y1).close_to(mul(Poly.constant(3, 2j * math.pi)))
    assert commutator(X3, X2).is_zero()
    assert commutator(X1, X2) == X3


def test_wrong_sign_table_is_detected():
    alg = build_dynin_folland(1)
    X1 = dpi_element(alg.basis("X_1"), 1)
    bad_X2 = d(1) + d(2, c=t(0, Fraction(-1, 2)))
    target = dpi_element(bracket(alg.basis("X_1"), alg.basis("X_2")), 1)
    residual = commutator(X1, bad_X2) - target
    f = PolyExpFunction.gaussian(3, Poly.linear([1, 1, 1], 1))
    assert np.max(np.abs(apply(residual, f).evaluate(PTS3))) > 0.1


def test_rep_action_examples():
    alg = build_dynin_folland(1)
    f = PolyExpFunction.gaussian(3, Poly.linear([1, 0.5, -1], 2))
    e = GroupElement.identity(alg, SPLIT)
    assert np.allclose(rep_action(e, 1, f).evaluate(PTS3), f.evaluate(PTS3))
    z = GroupElement(alg, SPLIT, (0.3, 0, 0, 0, 0, 0, 0))
    assert np.allclose(rep_action(z, 2, f).evaluate(PTS3), np.exp(2j * math.pi * 2 * 0.3) * f.evaluate(PTS3))
    # pure x part: right translation by the Heisenberg element x
    x = (0.4, -0.7, 1.1)
    g = GroupElement(alg, SPLIT, (0, 0, 0, 0, x[2], x[1], x[0]))
    moved = np.array([[p[0] + x[0], p[1] + x[1], p[2] + x[2] + 0.5 * (p[0] * x[1] - p[1] * x[0])] for p in PTS3])
    assert np.allclose(rep_action(g, 1, f).evaluate(PTS3), f.evaluate(moved))
    with pytest.raises(InvalidChart):
        rep_action(GroupElement.identity(alg, EXPONENTIAL), 1, f)
    with pytest.raises(DegenerateRepresentation):
        rep_action(e, 0, f)


# ---------------------------------------------------------------- forms and assembly

def test_sublaplacian_assembly_matches_squared_vector_fields():
    alg = build_dynin_folland(1)
    form = validate_rockland_classical(sublaplacian_form(alg), canonical_dilations(alg))
    assert form.status == VERIFIED and form.nu == 2
    Q = assemble_operator(form, 1)
    assert Q.close_to(hand_expanded_oscillator(1))
    assert Q.is_real()
    assert Q.coefficient((0, 0, 2)).coefficient((2, 0, 0)) == Fraction(-1, 4)
    assert Q.coefficient((0, 1, 1)).coefficient((1, 0, 0)) == -1
    assert math.isclose(complex(Q.coefficient((0, 0, 0)).coefficient((0, 0, 2))).real, 4 * math.pi**2)
    assert assemble_operator(form, -2).close_to(hand_expanded_oscillator(-2))


def test_reference_expansion_is_the_reflected_operator():
    """The variant with +(t1 d2 - t2 d1) d3 is the conjugate under t1 -> -t1."""
    alg = build_dynin_folland(1)
    Q = assemble_operator(validate_rockland_classical(sublaplacian_form(alg), canonical_dilations(alg)), 1)
    P = reference_expansion(1)
    assert not Q.close_to(P)
    R = np.diag([-1.0, 1.0, 1.0])
    f = PolyExpFunction.gaussian(3, Poly.linear([1, 2, -1], 0.5))
    f_reflected = f.substitute_affine(R, [0, 0, 0])
    lhs = apply(Q, f_reflected).evaluate(PTS3 @ R)
    rhs = apply(P, f).evaluate(PTS3)
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-10)


def test_hermiticity_surrogate():
    for n in (1, 2):
        alg = build_dynin_folland(n)
        Q = assemble_operator(validate_rockland_classical(sublaplacian_form(alg), canonical_dilations(alg)), 0.7)
        assert Q.is_real(1e-12)
        assert all(sum(alpha) == 2 or (sum(alpha) == 0) for alpha in Q.terms)


def test_quartic_from_heisenberg_weights():
    D = validate_weights(build_heisenberg(1), (2, 1, 3))
    form = validate_rockland_classical(classical_form(D), D)
    assert form.status == VERIFIED and form.nu == 4
    op = assemble_operator(form, 1.5)
    expected = DiffOperator(1, {(2,): Poly.constant(1, -1), (0,): Poly(1, {(4,): (2 * math.pi * 1.5) ** 4})})
    assert op.close_to(expected, rtol=1e-12)


def test_classical_forms_for_543():
    D = validate_weights(build_dynin_folland(1), (5, 4, 3))
    form = validate_rockland_classical(classical_form(D), D)
    assert form.describe() == "Y_3^40 - X_2^30 + X_1^24"
    assert (form.nu, form.nu0, form.status) == (120, 60, VERIFIED)
    full = validate_rockland_classical(classical_form(D, nu0=32760, indices=range(7)), D)
    assert full.nu == 65520 and full.status == VERIFIED
    with pytest.raises(InvalidForm):
        classical_form(D, nu0=7)


def test_not_homogeneous_names_terms():
    alg = build_heisenberg(1)
    form = RocklandForm(alg, (FormTerm(1, -1, 0, 2), FormTerm(1, 1, 1, 4)))
    with pytest.raises(NotHomogeneous) as info:
        validate_rockland_classical(form, canonical_dilations(alg))
    assert info.value.details["terms"] == ("X_1^2", "X_2^4")


def test_unverified_patterns():
    alg = build_heisenberg(1)
    D = canonical_dilations(alg)
    wrong_sign = RocklandForm(alg, (FormTerm(1, 1, 0, 2), FormTerm(1, -1, 1, 2)))
    assert validate_rockland_classical(wrong_sign, D).status == UNVERIFIED
    missing = RocklandForm(alg, (FormTerm(1, -1, 0, 2),))
    assert validate_rockland_classical(missing, D).status == UNVERIFIED
    with pytest.raises(InvalidForm):
        assemble_operator(missing, 1)


@pytest.mark.parametrize("bad", [
    {"terms": []},
    {"terms": [{"basis": "X_1", "power": 3}]},
    {"terms": [{"basis": "X_1", "power": 2, "coeff": -1}]},
    {"terms": [{"basis": "Q_9", "power": 2}]},
    {"nothing": 1},
])
def test_form_json_errors(bad):
    with pytest.raises((InvalidForm, InvalidParameter)):
        RocklandForm.from_json(build_heisenberg(1), bad)


def test_form_json_round_trip():
    alg = build_dynin_folland(1)
    form = sublaplacian_form(alg)
    back = RocklandForm.from_json(alg, form.to_json())
    assert back.terms == form.terms
    by_index = RocklandForm.from_json(alg, {"terms": [{"basis": 7, "power": 2, "sign": -1}]})
    assert by_index.terms[0].basis == 6


def mixed_form(alg, k, sign):
    n = alg.n
    terms = [FormTerm(1, -1, alg.index(f"X_{j}"), 2) for j in range(1, 2 * n + 1)]
    terms.append(FormTerm(1, sign, alg.index(f"Y_{2 * n + 1}"), 2 * k))
    return RocklandForm(alg, tuple(terms))


@pytest.mark.parametrize("k", [2, 3])
@pytest.mark.parametrize("sign", [1, -1])
def test_squares_plus_high_power_not_homogeneous(k, sign):
    alg = build_dynin_folland(1)
    form = mixed_form(alg, k, sign)
    exceptional = validate_weights(alg, (k, k, 1)).weights
    checked = 0
    for D in [canonical_dilations(alg)] + enumerate_df_weights(1, k + 1):
        if D.weights == exceptional:
            continue
        with pytest.raises(NotHomogeneous):
            validate_rockland_classical(form, D)
        checked += 1
    assert checked >= 10


@pytest.mark.parametrize("k", [2, 3, 4])
def test_squares_plus_high_power_exceptional_weights(k):
    alg = build_dynin_folland(1)
    D = validate_weights(alg, (k, k, 1))
    good = validate_rockland_classical(mixed_form(alg, k, (-1) ** k), D)
    assert good.nu == 2 * k and good.status == VERIFIED
    assert validate_rockland_classical(mixed_form(alg, k, -(-1) ** k), D).status == UNVERIFIED

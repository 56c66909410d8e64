import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nilspectra.errors import DegenerateOrbit, IncompatibleOperands, InvalidParameter, UnsupportedAlgebra
from nilspectra.homogeneous import DualVector, canonical_dilations, validate_weights
from nilspectra.lie import bch_multiply, build_dynin_folland, build_engel, build_heisenberg
from nilspectra.orbits import (
    abs_pfaffian,
    ball_orbit_measure_closed,
    ball_orbit_measure_mc,
    coadjoint_action,
    engel_orbit_family,
    flat_orbit,
    skew_form,
    thread_count,
)
from oracles import ad_matrix

coord = st.floats(-2, 2, allow_nan=False)


def oracle_volume(alg, D, rho, lam):
    """Box volume over |Pf| with the Pfaffian taken from a float determinant of ad matrices."""
    c = alg.central_indices()[0]
    span = [i for i in range(alg.dim) if i != c]
    B = np.array([[ad_matrix(alg, np.eye(alg.dim)[a])[c, b] * rho for b in span] for a in span])
    if abs(rho) ** (1 / D.weights[c]) > lam:
        return 0.0
    return float(np.prod([2 * lam ** D.weights[j] for j in span])) / math.sqrt(abs(np.linalg.det(B)))


@pytest.mark.parametrize(
    "alg,weights,rho,lam",
    [
        (build_dynin_folland(1), None, 1, 2.0),
        (build_dynin_folland(1), (5, 4, 3), Fraction(3, 2), 1.7),
        (build_dynin_folland(2), (1, 2, 2, 1, 1), -2, 1.3),
        (build_heisenberg(1), None, 1, 3.0),
        (build_heisenberg(3), (1, 2, 1, 2, 1, 2, 3), Fraction(1, 2), 1.1),
    ],
)
def test_closed_form_matches_oracle(alg, weights, rho, lam):
    D = validate_weights(alg, weights) if weights else canonical_dilations(alg)
    m = ball_orbit_measure_closed(flat_orbit(alg, rho), lam, D)
    assert math.isclose(m.value, oracle_volume(alg, D, float(rho), lam), rel_tol=1e-12)


def test_known_values():
    df = build_dynin_folland(1)
    m = ball_orbit_measure_closed(flat_orbit(df, 1), 2.0, canonical_dilations(df))
    assert m.value == 2.0**15 and m.prefactor == 64 and m.lambda_power == 9 and m.rho_power == -3
    h = build_heisenberg(1)
    assert ball_orbit_measure_closed(flat_orbit(h, 1), 3.0, canonical_dilations(h)).value == 36.0


def test_threshold_returns_exact_zero():
    df = build_dynin_folland(1)
    D = canonical_dilations(df)
    assert ball_orbit_measure_closed(flat_orbit(df, 9), 2.0, D).value == 0.0
    h = build_heisenberg(1)
    m = ball_orbit_measure_closed(flat_orbit(h, 10), 3.0, canonical_dilations(h))
    assert m.value == 0.0 and math.isclose(m.threshold, math.sqrt(10))
    assert ball_orbit_measure_mc(flat_orbit(h, 10), 3.0, canonical_dilations(h), 20_000, seed=1)[0] == 0.0


@pytest.mark.parametrize("n", [1, 2, 3])
def test_pfaffian_and_rho_power(n):
    df = build_dynin_folland(n)
    orbit = flat_orbit(df, Fraction(2))
    assert orbit.pfaffian == 2 ** (2 * n + 1)
    assert isinstance(orbit.pfaffian, Fraction)
    assert orbit.rho_power == -(2 * n + 1)
    assert flat_orbit(build_heisenberg(n), 3).rho_power == -n
    assert flat_orbit(build_heisenberg(n), 3).pfaffian == 3**n


def test_pfaffian_small_cases():
    assert abs_pfaffian([[0, 3], [-3, 0]]) == 3
    assert abs_pfaffian([[0, 1, 0], [-1, 0, 0], [0, 0, 0]]) == 0
    assert math.isclose(abs_pfaffian([[0.0, 2.5], [-2.5, 0.0]]), 2.5)
    B = skew_form(build_heisenberg(1), [0, 0, Fraction(1, 3)])
    assert B == [[0, Fraction(1, 3), 0], [Fraction(-1, 3), 0, 0], [0, 0, 0]]


def test_unsupported_and_degenerate():
    with pytest.raises(UnsupportedAlgebra):
        flat_orbit(build_engel(), 1)
    with pytest.raises(DegenerateOrbit):
        flat_orbit(build_heisenberg(1), 0)
    h = build_heisenberg(1)
    with pytest.raises(IncompatibleOperands):
        ball_orbit_measure_closed(flat_orbit(h, 1), 1.0, canonical_dilations(build_heisenberg(2)))
    with pytest.raises(InvalidParameter):
        ball_orbit_measure_closed(flat_orbit(h, 1), 0.0, canonical_dilations(h))
    with pytest.raises(InvalidParameter):
        ball_orbit_measure_mc(flat_orbit(h, 1), 1.0, canonical_dilations(h), samples=10)


def test_mc_close_and_deterministic():
    df = build_dynin_folland(1)
    D = validate_weights(df, (5, 4, 3))
    orbit = flat_orbit(df, 1.5)
    exact = ball_orbit_measure_closed(orbit, 1.7, D).value
    est, err = ball_orbit_measure_mc(orbit, 1.7, D, 200_000, seed=5, workers=1)
    assert abs(est - exact) < 5 * err and abs(est / exact - 1) < 0.03
    again = ball_orbit_measure_mc(orbit, 1.7, D, 200_000, seed=5, workers=3)
    assert again == (est, err)
    other = ball_orbit_measure_mc(orbit, 1.7, D, 200_000, seed=6, workers=1)
    assert other != (est, err)


def test_thread_cap(monkeypatch):
    monkeypatch.setenv("NILSPECTRA_THREADS", "2")
    assert thread_count() == 2
    monkeypatch.setenv("NILSPECTRA_THREADS", "junk")
    assert thread_count() >= 1


@given(st.lists(coord, min_size=7, max_size=7), st.floats(0.2, 3))
def test_coadjoint_action_preserves_flat_orbit(x, rho):
    df = build_dynin_folland(1)
    l = DualVector.basis(df, "Z") * rho
    moved = coadjoint_action(df.element(x), l)
    assert math.isclose(moved.coeffs[0], rho, rel_tol=1e-12)


@given(st.lists(coord, min_size=4, max_size=4), st.lists(coord, min_size=4, max_size=4),
       st.lists(coord, min_size=4, max_size=4))
def test_coadjoint_action_is_a_group_action(x, y, lc):
    e = build_engel()
    l = DualVector(e, lc)
    X, Y = e.element(x), e.element(y)
    two_steps = coadjoint_action(X, coadjoint_action(Y, l)).coeffs
    one_step = coadjoint_action(bch_multiply(X, Y), l).coeffs
    assert np.allclose(two_steps, one_step, atol=1e-10)


@given(st.lists(coord, min_size=4, max_size=4), st.lists(coord, min_size=3, max_size=3),
       st.floats(0.3, 3) | st.floats(-3, -0.3))
def test_engel_cylinder_invariant(x, abg, delta):
    e = build_engel()
    l = DualVector(e, abg + [delta])
    before = engel_orbit_family(l)
    after = engel_orbit_family(coadjoint_action(e.element(x), l))
    assert before.kind == after.kind == "cylinder"
    assert np.allclose(before.params, after.params, atol=1e-9)


def test_engel_plane_and_point():
    e = build_engel()
    plane = engel_orbit_family(DualVector(e, [1, 2, 0.5, 0]))
    assert plane.kind == "plane" and plane.params == (0.5,)
    moved = coadjoint_action(e.element([0.3, -1, 2, 5]), DualVector(e, [1, 2, 0.5, 0]))
    assert engel_orbit_family(moved).kind == "plane" and math.isclose(moved.coeffs[2], 0.5)
    point = engel_orbit_family(DualVector(e, [1, 2, 0, 0]))
    assert point.kind == "point"
    assert np.allclose(coadjoint_action(e.element([1, 1, 1, 1]), DualVector(e, [1, 2, 0, 0])).coeffs, [1, 2, 0, 0])
    assert str(point) == "point(1, 2)"
    with pytest.raises(IncompatibleOperands):
        engel_orbit_family(DualVector(build_heisenberg(1), [0, 0, 1]))

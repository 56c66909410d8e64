import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from nilspectra.errors import IncompatibleOperands, InvalidParameter, InvalidWeights, NotAnAutomorphism
from nilspectra.homogeneous import (
    DualVector,
    canonical_dilations,
    df_weight_vector,
    dilate_dual,
    enumerate_df_weights,
    quasinorm,
    validate_weights,
)
from nilspectra.lie import bracket, build_dynin_folland, build_engel, build_heisenberg

small = st.integers(1, 6)


def df_thetas(n):
    """Admissible tuples: theta_j + theta_{n+j} is the same for every j."""
    return st.tuples(st.integers(2, 8), st.lists(small, min_size=n, max_size=n), small).filter(
        lambda t: all(a < t[0] for a in t[1])
    ).map(lambda t: tuple(t[1]) + tuple(t[0] - a for a in t[1]) + (t[2],))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_canonical_homogeneous_dimensions(n):
    D = canonical_dilations(build_dynin_folland(n))
    assert D.Q == 6 * n + 6 and D.Q_center == 3
    assert D.thetas == (1,) * (2 * n + 1)
    H = canonical_dilations(build_heisenberg(n))
    assert H.Q == 2 * n + 2 and H.Q_center == 2
    assert H.thetas is None


def test_engel_weights():
    E = canonical_dilations(build_engel())
    assert E.weights == (1, 1, 2, 3) and E.Q == 7 and E.Q_center == 3
    assert validate_weights(build_engel(), (2, 1, 3, 5)).Q == 11
    with pytest.raises(NotAnAutomorphism):
        validate_weights(build_engel(), (1, 1, 2, 2))


def test_df_short_tuple_expansion():
    alg = build_dynin_folland(1)
    D = validate_weights(alg, (5, 4, 3))
    # Z, Y_1, Y_2, Y_3, X_3, X_2, X_1
    assert D.weights == (12, 7, 8, 3, 9, 4, 5)
    assert D.weight("X_3") == 9 and D.thetas == (5, 4, 3)
    assert D.Q == 48 and D.Q_center == 12
    assert validate_weights(alg, D.weights) == D


def test_gcd_normalisation_keeps_raw():
    D = validate_weights(build_heisenberg(1), (2, 2, 4))
    assert D.weights == (1, 1, 2) and D.raw_weights == (2, 2, 4)
    assert validate_weights(build_heisenberg(1), (2, 1, 3)).weights == (2, 1, 3)


def test_violations_name_the_triple():
    with pytest.raises(NotAnAutomorphism) as info:
        validate_weights(build_heisenberg(1), (1, 1, 1))
    assert info.value.details["triple"] == ("X_1", "X_2", "X_3")
    # theta_1 + theta_2 must match theta_3 + theta_4 for n = 2
    with pytest.raises(NotAnAutomorphism):
        validate_weights(build_dynin_folland(2), (1, 2, 1, 1, 1))


@pytest.mark.parametrize("bad", [(0, 1, 1), (1, -1, 0), (1.5, 1, 2.5), ("a", 1, 2)])
def test_invalid_weights(bad):
    with pytest.raises(InvalidWeights):
        validate_weights(build_heisenberg(1), bad)


def test_wrong_length():
    with pytest.raises(InvalidWeights):
        validate_weights(build_heisenberg(1), (1, 1))
    with pytest.raises(InvalidWeights):
        df_weight_vector(1, (1, 1))


def test_enumeration_small():
    fams = enumerate_df_weights(1, 2)
    assert len(fams) == 7
    assert len({f.weights for f in fams}) == 7
    for f in fams:
        th = f.thetas
        assert f.Q == 4 * (th[0] + th[1] + th[2])
    with pytest.raises(InvalidParameter):
        enumerate_df_weights(1, 0)


@given(st.sampled_from([1, 2]).flatmap(lambda n: st.tuples(st.just(n), df_thetas(n))))
def test_admissible_df_weights_give_automorphisms(data):
    n, th = data
    alg = build_dynin_folland(n)
    D = validate_weights(alg, th)
    p, t = th[0] + th[n], th[2 * n]
    g = np.gcd.reduce(df_weight_vector(n, th))
    assert D.Q * g == (2 * n + 2) * (p + t)
    assert D.Q_center * g == p + t
    rng = np.random.default_rng(sum(th))
    r = 1.7
    scale = np.array([r**w for w in D.weights])
    for _ in range(3):
        a, b = rng.uniform(-1, 1, (2, alg.dim))
        lhs = bracket(alg.element(scale * a), alg.element(scale * b)).array()
        rhs = scale * bracket(alg.element(a), alg.element(b)).array()
        assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12)


@given(st.lists(small, min_size=3, max_size=3))
def test_heisenberg_weights_iff_additive(w):
    ok = w[0] + w[1] == w[2]
    try:
        validate_weights(build_heisenberg(1), w)
        assert ok
    except NotAnAutomorphism:
        assert not ok


@given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=7, max_size=7), st.floats(0.05, 20))
def test_quasinorm_is_homogeneous(coeffs, r):
    D = validate_weights(build_dynin_folland(1), (2, 1, 3))
    l = DualVector(D.algebra, coeffs)
    assume(quasinorm(l, D) > 1e-6)
    assert np.isclose(quasinorm(dilate_dual(l, r, D), D), r * quasinorm(l, D), rtol=1e-10)


def test_quasinorm_values_and_errors():
    D = canonical_dilations(build_heisenberg(1))
    l = DualVector(D.algebra, [0.5, -2.0, 9.0])
    assert quasinorm(l, D) == 3.0
    assert quasinorm(DualVector.basis(D.algebra, "X_3") * 0, D) == 0.0
    with pytest.raises(IncompatibleOperands):
        DualVector(D.algebra, [1.0, 2.0])
    with pytest.raises(IncompatibleOperands):
        quasinorm(DualVector(build_engel(), np.ones(4)), D)
    with pytest.raises(InvalidParameter):
        dilate_dual(l, 0.0, D)

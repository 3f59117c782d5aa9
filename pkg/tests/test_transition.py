import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ciprop import (
    TransitionConfig,
    TransitionKind,
    TransitionMatrix,
    build_exp,
    build_maxnorm,
    split_pos_neg,
)
from ciprop.errors import DataError

from conftest import random_pcorr


def test_exp_two_node_by_hand():
    # D=2: row 0 has entries alpha*0 (diag) and alpha*0.3
    P = np.array([[0.0, 0.3], [0.3, 0.0]])
    T = build_exp(P, TransitionConfig(alpha=2.0)).T
    e = math.exp(2.0 * 0.3)
    assert T[0, 0] == pytest.approx(1.0 / (1.0 + e), rel=1e-15)
    assert T[0, 1] == pytest.approx(e / (1.0 + e), rel=1e-15)
    assert T[1, 0] == pytest.approx(e / (1.0 + e), rel=1e-15)


def test_exp_rows_stochastic_and_positive():
    rng = np.random.default_rng(0)
    for d in (2, 5, 40):
        T = build_exp(random_pcorr(rng, d)).T
        assert np.allclose(T.sum(axis=1), 1.0, atol=1e-12)
        assert np.all(T > 0.0)


def test_exp_shift_matches_naive_formula():
    rng = np.random.default_rng(1)
    P = random_pcorr(rng, 6).P
    alpha = 3.0
    naive = np.exp(alpha * P)
    naive /= naive.sum(axis=1, keepdims=True)
    assert np.allclose(build_exp(P, TransitionConfig(alpha=alpha)).T, naive, atol=1e-15)


def test_exp_alpha_sharpens_best_neighbor():
    rng = np.random.default_rng(2)
    P = random_pcorr(rng, 8).P
    best = np.argmax(P[0])
    prev = None
    for alpha in (0.5, 1.0, 2.0, 5.0, 10.0):
        T = build_exp(P, TransitionConfig(alpha=alpha)).T
        if prev is not None:
            assert T[0, best] > prev
        prev = T[0, best]


def test_exp_alpha_zero_is_uniform():
    rng = np.random.default_rng(3)
    T = build_exp(random_pcorr(rng, 7), TransitionConfig(alpha=0.0)).T
    assert np.allclose(T, 1.0 / 7.0, atol=1e-15)


def test_split_partitions_off_diagonal_support():
    rng = np.random.default_rng(4)
    P = random_pcorr(rng, 10).P
    Tp, Tn = split_pos_neg(P)
    assert Tp.kind is TransitionKind.POS
    assert Tn.kind is TransitionKind.NEG
    pos_support = Tp.T > 0.0
    neg_support = Tn.T > 0.0
    assert not np.any(pos_support & neg_support)
    assert np.array_equal(pos_support | neg_support, P != 0.0)
    assert np.all(np.diag(Tp.T) == 0.0)
    assert np.all(np.diag(Tn.T) == 0.0)
    for T in (Tp.T, Tn.T):
        sums = T.sum(axis=1)
        assert np.all((np.abs(sums - 1.0) < 1e-12) | (sums == 0.0))


def test_split_all_negative_leaves_pos_empty():
    P = np.array([[0.0, -0.5, -0.2], [-0.5, 0.0, -0.1], [-0.2, -0.1, 0.0]])
    Tp, Tn = split_pos_neg(P)
    assert np.all(Tp.T == 0.0)
    assert list(Tp.zero_rows()) == [0, 1, 2]
    assert list(Tn.zero_rows()) == []
    assert np.allclose(Tn.T.sum(axis=1), 1.0)
    # magnitudes: row 0 of neg is [0, 0.5, 0.2] normalized
    assert Tn.T[0, 1] == pytest.approx(0.5 / 0.7)
    assert Tn.T[0, 2] == pytest.approx(0.2 / 0.7)


def test_maxnorm_zero_matrix_gives_all_ones():
    T = build_maxnorm(np.zeros((4, 4))).T
    assert np.all(T == 1.0)


def test_maxnorm_peak_exactly_one():
    rng = np.random.default_rng(5)
    for d in (2, 9, 30):
        T = build_maxnorm(random_pcorr(rng, d)).T
        assert T.max() == 1.0
        assert np.all(T > 0.0)
        assert np.all(T <= 1.0)


def test_maxnorm_two_node_by_hand():
    P = np.array([[0.0, -0.4], [-0.4, 0.0]])
    T = build_maxnorm(P, TransitionConfig(alpha=1.5)).T
    # max of P is the diagonal zero, so diag -> exp(0) = 1
    assert T[0, 0] == 1.0
    assert T[0, 1] == pytest.approx(math.exp(1.5 * -0.4), rel=1e-15)


def test_transition_matrix_validation():
    good = np.full((3, 3), 1.0 / 3.0)
    TransitionMatrix(T=good, kind="exp")
    with pytest.raises(DataError):
        TransitionMatrix(T=np.ones((2, 3)), kind="exp")
    with pytest.raises(DataError):
        TransitionMatrix(T=np.array([[np.nan, 1.0], [0.5, 0.5]]), kind="exp")
    with pytest.raises(DataError):
        TransitionMatrix(T=np.array([[-0.1, 1.1], [0.5, 0.5]]), kind="exp")
    with pytest.raises(DataError):  # rows not stochastic
        TransitionMatrix(T=np.array([[0.9, 0.3], [0.5, 0.5]]), kind="exp")
    with pytest.raises(DataError):  # zeros not allowed for exp
        TransitionMatrix(T=np.array([[0.0, 1.0], [1.0, 0.0]]), kind="exp")
    with pytest.raises(DataError):  # pos kind needs a zero diagonal
        TransitionMatrix(T=np.array([[0.5, 0.5], [0.0, 1.0]]), kind="pos")
    with pytest.raises(DataError):  # maxnorm peak must be 1
        TransitionMatrix(T=np.full((2, 2), 0.5), kind="maxnorm")


def test_transition_matrix_readonly_and_dim():
    T = build_exp(np.zeros((3, 3)))
    assert T.dim == 3
    with pytest.raises(ValueError):
        T.T[0, 0] = 2.0


def test_config_rejects_negative_alpha():
    with pytest.raises(DataError):
        TransitionConfig(alpha=-0.5)
    with pytest.raises(DataError):
        TransitionConfig(alpha=float("nan"))


@settings(max_examples=30, deadline=None)
@given(
    st.integers(min_value=0, max_value=2**31),
    st.integers(min_value=2, max_value=12),
    st.floats(min_value=0.0, max_value=20.0),
)
def test_exp_always_row_stochastic(seed, d, alpha):
    """Row-stochasticity holds for any partial correlation input and any
    nonnegative alpha, including extremes that would overflow naively."""
    rng = np.random.default_rng(seed)
    T = build_exp(random_pcorr(rng, d), TransitionConfig(alpha=alpha)).T
    assert np.allclose(T.sum(axis=1), 1.0, atol=1e-9)
    assert np.all(T > 0.0)

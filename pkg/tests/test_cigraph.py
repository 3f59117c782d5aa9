import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ciprop import (
    CovarianceMatrix,
    PartialCorrelationMatrix,
    covariance,
    partial_correlation,
    precision,
    recover,
    shrink,
)
from ciprop.errors import DataError, NumericalError

import _oracles


def test_pearson_matches_scalar_oracle():
    rng = np.random.default_rng(3)
    X = rng.standard_normal((12, 4))
    cov = covariance(X)
    for i in range(4):
        for j in range(4):
            expected = 1.0 if i == j else _oracles.pearson_scalar(X[:, i], X[:, j])
            assert cov.S[i, j] == pytest.approx(expected, abs=1e-12)


def test_spearman_is_pearson_of_ranks_with_ties():
    X = np.array(
        [
            [1.0, 5.0, 2.0],
            [2.0, 5.0, 1.0],
            [2.0, 4.0, 4.0],
            [3.0, 1.0, 4.0],
            [4.0, 0.0, 3.0],
        ]
    )
    cov = covariance(X, correlation_mode="spearman")
    ranks = np.column_stack([_oracles.average_ranks(X[:, j]) for j in range(3)])
    for i in range(3):
        for j in range(i + 1, 3):
            expected = _oracles.pearson_scalar(ranks[:, i], ranks[:, j])
            assert cov.S[i, j] == pytest.approx(expected, abs=1e-12)


def test_constant_column_gets_zero_correlations():
    X = np.array([[1.0, 7.0, 2.0], [2.0, 7.0, 1.0], [3.0, 7.0, 5.0]])
    cov = covariance(X)
    assert cov.S[1, 1] == 1.0
    assert np.all(cov.S[1, [0, 2]] == 0.0)
    assert np.all(cov.S[[0, 2], 1] == 0.0)


def test_covariance_needs_two_samples():
    with pytest.raises(DataError):
        covariance(np.ones((1, 3)))


def test_covariance_rejects_bad_mode():
    with pytest.raises(DataError):
        covariance(np.ones((3, 3)), correlation_mode="kendall")


def test_shrink_interpolates_to_identity():
    rng = np.random.default_rng(1)
    X = rng.standard_normal((20, 4))
    cov = covariance(X)
    assert np.array_equal(shrink(cov, 0.0).S, cov.S)
    assert np.array_equal(shrink(cov, 1.0).S, np.eye(4))
    lam = 0.3
    assert np.allclose(shrink(cov, lam).S, (1 - lam) * cov.S + lam * np.eye(4))
    assert shrink(cov, lam).shrinkage == lam
    with pytest.raises(DataError):
        shrink(cov, 1.5)


def test_precision_inverts_covariance():
    rng = np.random.default_rng(2)
    X = rng.standard_normal((200, 5))
    cov = covariance(X)
    theta = precision(cov)
    assert np.allclose(theta.Theta @ cov.S, np.eye(5), atol=1e-10)


def test_precision_identity():
    theta = precision(CovarianceMatrix(S=np.eye(4), shrinkage=0.0))
    assert np.allclose(theta.Theta, np.eye(4))


def test_precision_singular_suggests_shrink():
    # rank-deficient: fewer samples than variables
    rng = np.random.default_rng(3)
    X = rng.standard_normal((4, 10))
    cov = covariance(X)
    with pytest.raises(NumericalError, match="shrink"):
        precision(cov)


def test_partial_correlation_matches_regression_oracle():
    rng = np.random.default_rng(4)
    # correlated design so partial and marginal correlations differ
    base = rng.standard_normal((300, 1))
    X = base + 0.7 * rng.standard_normal((300, 4))
    P = partial_correlation(covariance(X))
    for i in range(4):
        assert P.P[i, i] == 0.0
        for j in range(i + 1, 4):
            expected = _oracles.partial_corr_regression(X, i, j)
            assert P.P[i, j] == pytest.approx(expected, abs=1e-8)
            assert P.P[j, i] == P.P[i, j]


def test_partial_correlation_block_structure():
    # inverse of a block-diagonal matrix is block-diagonal, so cross-block
    # partial correlations are exactly zero
    A = np.array([[1.0, 0.6], [0.6, 1.0]])
    B = np.array([[1.0, -0.3, 0.1], [-0.3, 1.0, 0.2], [0.1, 0.2, 1.0]])
    S = np.block([[A, np.zeros((2, 3))], [np.zeros((3, 2)), B]])
    P = partial_correlation(CovarianceMatrix(S=S, shrinkage=0.0))
    assert np.allclose(P.P[:2, 2:], 0.0, atol=1e-12)
    assert P.P[0, 1] == pytest.approx(0.6, abs=1e-12)  # 2-block: partial == marginal


def test_partial_correlation_zero_threshold():
    rng = np.random.default_rng(5)
    X = rng.standard_normal((100, 5))
    cov = shrink(covariance(X), 0.1)
    dense = partial_correlation(cov)
    tau = np.median(np.abs(dense.P[np.triu_indices(5, 1)]))
    sparse = partial_correlation(cov, zero_threshold=tau)
    off = np.triu_indices(5, 1)
    kept = sparse.P[off] != 0.0
    assert np.all(np.abs(sparse.P[off][kept]) >= tau)
    assert np.any(~kept)


def test_recover_composes_the_pipeline():
    rng = np.random.default_rng(6)
    X = rng.standard_normal((50, 6))
    direct = recover(X, shrinkage=0.2)
    manual = partial_correlation(shrink(covariance(X), 0.2))
    assert np.array_equal(direct.P, manual.P)


def test_recover_spearman_mode():
    rng = np.random.default_rng(7)
    X = rng.standard_normal((40, 4))
    P = recover(X, shrinkage=0.1, correlation_mode="spearman")
    assert np.all(np.abs(P.P) < 1.0)
    assert np.allclose(P.P, P.P.T)


def test_pcorr_type_validates():
    with pytest.raises(DataError):
        PartialCorrelationMatrix(P=np.array([[0.0, 1.0], [1.0, 0.0]]))  # |p| = 1
    with pytest.raises(DataError):
        PartialCorrelationMatrix(P=np.array([[0.5, 0.1], [0.1, 0.0]]))  # diag != 0
    with pytest.raises(DataError):
        PartialCorrelationMatrix(P=np.array([[0.0, 0.2], [0.3, 0.0]]))  # asymmetric


@settings(max_examples=25, deadline=None)
@given(
    st.integers(min_value=0, max_value=2**31),
    st.integers(min_value=2, max_value=8),
    st.floats(min_value=0.05, max_value=0.9),
)
def test_recover_output_contract(seed, d, lam):
    """For any gaussian sample, recover yields a symmetric matrix with zero
    diagonal and off-diagonal entries strictly inside (-1, 1)."""
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((d + 3, d))
    P = recover(X, shrinkage=lam).P
    assert P.shape == (d, d)
    assert np.allclose(P, P.T)
    assert np.all(np.diag(P) == 0.0)
    off = P[~np.eye(d, dtype=bool)]
    assert np.all(np.abs(off) < 1.0)

"""Partial-correlation graph recovery.

The propagation algorithms consume a partial correlation matrix; this
module supplies the one recovery route the package ships: sample
correlation, shrinkage towards the identity for invertibility, and
inversion of the shrunk matrix. Graphs recovered by any external tool can
be fed in through the matrix container format instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.stats import rankdata

from .errors import DataError, NumericalError

_SYM_TOL = 1e-10


def _check_symmetric(a, name):
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DataError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DataError(f"{name} contains non-finite values")
    if np.max(np.abs(a - a.T), initial=0.0) > _SYM_TOL:
        raise DataError(f"{name} is not symmetric within {_SYM_TOL}")


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    """Sample correlation/covariance matrix plus the shrinkage applied to it."""

    S: np.ndarray
    shrinkage: float = 0.0

    def __post_init__(self):
        S = np.ascontiguousarray(self.S, dtype=np.float64)
        S.setflags(write=False)
        object.__setattr__(self, "S", S)
        _check_symmetric(S, "covariance matrix")
        if not (0.0 <= self.shrinkage <= 1.0):
            raise DataError(f"shrinkage must lie in [0, 1], got {self.shrinkage}")

    @property
    def dim(self):
        return self.S.shape[0]


@dataclass(frozen=True, eq=False)
class PrecisionMatrix:
    """Inverse of a positive-definite covariance matrix."""

    Theta: np.ndarray

    def __post_init__(self):
        T = np.ascontiguousarray(self.Theta, dtype=np.float64)
        T.setflags(write=False)
        object.__setattr__(self, "Theta", T)
        _check_symmetric(T, "precision matrix")

    @property
    def dim(self):
        return self.Theta.shape[0]


@dataclass(frozen=True, eq=False)
class PartialCorrelationMatrix:
    """Symmetric matrix of partial correlations, zero diagonal, entries in (-1, 1)."""

    P: np.ndarray

    def __post_init__(self):
        P = np.ascontiguousarray(self.P, dtype=np.float64)
        P.setflags(write=False)
        object.__setattr__(self, "P", P)
        _check_symmetric(P, "partial correlation matrix")
        if np.max(np.abs(np.diag(P)), initial=0.0) != 0.0:
            raise DataError("partial correlation matrix must have a zero diagonal")
        off = P[~np.eye(P.shape[0], dtype=bool)]
        if off.size and np.max(np.abs(off)) >= 1.0:
            raise DataError("off-diagonal partial correlations must lie in (-1, 1)")

    @property
    def dim(self):
        return self.P.shape[0]


def covariance(X, correlation_mode="pearson"):
    """Sample correlation matrix of the columns of ``X``.

    Parameters
    ----------
    X : ndarray of shape (M, D)
        M observation samples of D node variables.
    correlation_mode : {"pearson", "spearman"}
        Spearman rank-transforms each column first and then applies the
        Pearson formula.

    Returns
    -------
    CovarianceMatrix
        Correlation matrix with unit diagonal. Constant columns get zero
        correlation with every other variable instead of NaN.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DataError(f"X must be 2-D, got shape {X.shape}")
    m = X.shape[0]
    if m < 2:
        raise DataError(f"need at least 2 samples to estimate correlations, got {m}")
    mode = str(correlation_mode).lower()
    if mode == "spearman":
        X = rankdata(X, axis=0)
    elif mode != "pearson":
        raise DataError(f"unknown correlation mode {correlation_mode!r}")
    Xc = X - X.mean(axis=0)
    std = Xc.std(axis=0, ddof=1)
    constant = std == 0.0
    safe_std = np.where(constant, 1.0, std)
    Z = Xc / safe_std
    C = (Z.T @ Z) / (m - 1)
    C[constant, :] = 0.0
    C[:, constant] = 0.0
    np.fill_diagonal(C, 1.0)
    np.clip(C, -1.0, 1.0, out=C)
    C = (C + C.T) / 2.0
    return CovarianceMatrix(S=C, shrinkage=0.0)


def shrink(cov, lam):
    """Convex combination ``(1 - lam) * S + lam * I``.

    ``lam > 0`` guarantees strict positive definiteness for any positive
    semi-definite input, which is what makes the precision solve of
    :func:`partial_correlation` well posed when M < D.
    """
    if not (0.0 <= lam <= 1.0):
        raise DataError(f"shrinkage lambda must lie in [0, 1], got {lam}")
    S = (1.0 - lam) * cov.S + lam * np.eye(cov.dim)
    return CovarianceMatrix(S=S, shrinkage=float(lam))


def precision(cov):
    """Invert a positive-definite covariance matrix via Cholesky.

    Raises
    ------
    NumericalError
        If the factorization fails, i.e. the matrix is not positive
        definite; apply :func:`shrink` with a positive lambda first.
    """
    try:
        c, low = scipy.linalg.cho_factor(cov.S, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise NumericalError(
            "covariance matrix is not positive definite; apply shrink() with lambda > 0"
        ) from exc
    theta = scipy.linalg.cho_solve((c, low), np.eye(cov.dim))
    theta = (theta + theta.T) / 2.0
    return PrecisionMatrix(Theta=theta)


def partial_correlation(cov, zero_threshold=0.0):
    """Partial correlations from the precision matrix of ``cov``.

    Uses the standard mapping ``P[i, j] = -Theta[i, j] /
    sqrt(Theta[i, i] * Theta[j, j])`` with the diagonal set to zero.

    Parameters
    ----------
    cov : CovarianceMatrix
        Must be positive definite (shrink first if necessary).
    zero_threshold : float
        Entries with absolute value at or below this are zeroed, emulating
        a sparse conditional-independence graph. Default keeps all edges.

    Returns
    -------
    PartialCorrelationMatrix
    """
    theta = precision(cov).Theta
    d = np.sqrt(np.diag(theta))
    P = -theta / np.outer(d, d)
    np.fill_diagonal(P, 0.0)
    P = (P + P.T) / 2.0
    if zero_threshold > 0.0:
        P[np.abs(P) <= zero_threshold] = 0.0
    # Cholesky success bounds |P| < 1 mathematically; clip float dust
    np.clip(P, -1.0 + 1e-15, 1.0 - 1e-15, out=P)
    np.fill_diagonal(P, 0.0)
    return PartialCorrelationMatrix(P=P)


def recover(X, shrinkage=0.1, correlation_mode="pearson", zero_threshold=0.0):
    """Full pipeline: correlation -> shrink -> partial correlation."""
    return partial_correlation(
        shrink(covariance(X, correlation_mode), shrinkage),
        zero_threshold=zero_threshold,
    )

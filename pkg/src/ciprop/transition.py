"""Transition probability matrices derived from a partial correlation matrix.

Three constructions feed the different propagation variants:

* ``exp`` -- row-normalized entrywise exponential ``exp(alpha * P)``. Fully
  dense and strictly positive: negative correlations become weak but
  traversable paths.
* ``pos`` / ``neg`` -- the positive entries (resp. negated negative
  entries) of P, each row-normalized separately. Rows with no qualifying
  entry are left all-zero rather than invented uniform.
* ``maxnorm`` -- ``exp(alpha * P)`` divided by its global maximum; used as
  edge weights by the random-walk embedding baseline.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .cigraph import PartialCorrelationMatrix
from .errors import DataError

_ROW_TOL = 1e-9


class TransitionKind(str, Enum):
    EXP = "exp"
    POS = "pos"
    NEG = "neg"
    MAXNORM = "maxnorm"


@dataclass(frozen=True, eq=False)
class TransitionConfig:
    """Scaling intensity for the exponential constructions.

    ``alpha`` must be positive for propagation; zero is allowed so that
    degenerate uniform transitions can be built in diagnostics and
    property tests.
    """

    alpha: float = 2.0

    def __post_init__(self):
        if not np.isfinite(self.alpha) or self.alpha < 0.0:
            raise DataError(f"alpha must be a nonnegative real, got {self.alpha}")


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """Nonnegative D x D matrix validated against its kind's invariants."""

    T: np.ndarray
    kind: TransitionKind

    def __post_init__(self):
        T = np.ascontiguousarray(self.T, dtype=np.float64)
        T.setflags(write=False)
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "kind", TransitionKind(self.kind))
        if T.ndim != 2 or T.shape[0] != T.shape[1]:
            raise DataError(f"transition matrix must be square, got shape {T.shape}")
        if not np.all(np.isfinite(T)):
            raise DataError("transition matrix contains non-finite values")
        if np.any(T < 0.0):
            raise DataError("transition matrix entries must be nonnegative")
        sums = T.sum(axis=1)
        if self.kind is TransitionKind.EXP:
            if np.any(T <= 0.0):
                raise DataError("exp transition matrix must be strictly positive")
            if np.max(np.abs(sums - 1.0)) > _ROW_TOL:
                raise DataError("exp transition rows must sum to 1")
        elif self.kind in (TransitionKind.POS, TransitionKind.NEG):
            zero = sums == 0.0
            if np.max(np.abs(sums[~zero] - 1.0), initial=0.0) > _ROW_TOL:
                raise DataError("pos/neg transition rows must sum to 1 or be all-zero")
            if np.max(np.abs(np.diag(T)), initial=0.0) != 0.0:
                raise DataError("pos/neg transition matrices have a zero diagonal")
        elif self.kind is TransitionKind.MAXNORM:
            if T.size and not np.isclose(T.max(), 1.0, rtol=0.0, atol=_ROW_TOL):
                raise DataError("maxnorm transition matrix must have maximum 1")
            if np.any(T > 1.0 + _ROW_TOL):
                raise DataError("maxnorm entries must lie in (0, 1]")

    @property
    def dim(self):
        return self.T.shape[0]

    def zero_rows(self):
        """Indices of all-zero rows (possible for pos/neg kinds only)."""
        return np.flatnonzero(self.T.sum(axis=1) == 0.0)


def _as_pcorr_array(P):
    if isinstance(P, PartialCorrelationMatrix):
        return P.P
    return np.asarray(P, dtype=np.float64)


def build_exp(P, cfg=None):
    """Row-stochastic entrywise exponential of ``alpha * P``.

    Rows are computed softmax-style, subtracting the row maximum before
    exponentiation; that shift cancels in the normalization, so values are
    mathematically identical to the naive formula but immune to overflow.
    """
    cfg = cfg or TransitionConfig()
    A = cfg.alpha * _as_pcorr_array(P)
    A = A - A.max(axis=1, keepdims=True)
    E = np.exp(A)
    T = E / E.sum(axis=1, keepdims=True)
    return TransitionMatrix(T=T, kind=TransitionKind.EXP)


def split_pos_neg(P):
    """Split into positive-part and negated-negative-part transitions.

    Each part is row-normalized independently. A row with no entries of
    the matching sign stays all-zero; downstream updates simply contribute
    nothing for such rows (callers can count them via ``zero_rows``).
    """
    A = _as_pcorr_array(P)
    pos = np.where(A > 0.0, A, 0.0)
    neg = np.where(A < 0.0, -A, 0.0)
    return (
        TransitionMatrix(T=_row_normalize(pos), kind=TransitionKind.POS),
        TransitionMatrix(T=_row_normalize(neg), kind=TransitionKind.NEG),
    )


def _row_normalize(T):
    sums = T.sum(axis=1, keepdims=True)
    safe = np.where(sums == 0.0, 1.0, sums)
    return T / safe


def build_maxnorm(P, cfg=None):
    """Entrywise exponential scaled by its global maximum.

    Equivalent to ``exp(alpha * P) / max(exp(alpha * P))`` but computed as
    ``exp(alpha * (P - max(P)))`` so the maximum entry is exactly 1.
    """
    cfg = cfg or TransitionConfig()
    A = _as_pcorr_array(P)
    T = np.exp(cfg.alpha * (A - A.max()))
    return TransitionMatrix(T=T, kind=TransitionKind.MAXNORM)

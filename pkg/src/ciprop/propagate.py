"""Diffusion of known node categories to unknown nodes.

The state is a D x C matrix of per-node category distributions. Known rows
are pinned to their supplied distributions (delta by default) and never
written by any update; unknown rows evolve either by fixed-point iteration
over a transition matrix or by the equivalent closed-form linear solve.

Update variants
---------------
* :func:`iterate_exp` -- plain diffusion over the dense exponential
  transition matrix. Unknown rows stay exact distributions at every step.
* :func:`iterate_posneg` -- diffusion over the positive-part transition
  matrix plus distance-to-initialization regularizer contributions computed
  from both the positive and negative parts, with a renormalization after
  each step.
* :func:`iterate_pos` -- the same with the negative-part term dropped.
* :func:`analytical` -- direct solve of ``(I - T_UU) n_U = T_UK n_K``; the
  fixed point of :func:`iterate_exp`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np
import scipy.linalg

from .dataset import KnownMask
from .errors import DataError, NumericalError
from .transition import TransitionKind, TransitionMatrix

_ROW_TOL = 1e-9
_LOG_CLAMP = 1e-12

REGULARIZERS = ("none", "kl", "wasserstein")


@dataclass(frozen=True)
class SelectionStrategy:
    """How to turn converged distributions into category picks.

    ``argmax`` always predicts; ``confidence`` predicts only where the
    maximum softmax probability reaches ``threshold`` and abstains
    elsewhere. Ties break towards the lowest category index.
    """

    mode: str = "argmax"
    threshold: Optional[float] = None

    def __post_init__(self):
        if self.mode not in ("argmax", "confidence"):
            raise DataError(f"unknown selection mode {self.mode!r}")
        if self.mode == "confidence":
            if self.threshold is None:
                raise DataError("confidence selection needs a threshold")
            if not (0.0 < self.threshold <= 1.0):
                raise DataError(f"threshold must lie in (0, 1], got {self.threshold}")


@dataclass(frozen=True)
class PropagationConfig:
    """Convergence and update-shape knobs shared by the iterative solvers."""

    epsilon: float = 1e-6
    max_iters: int = 1000
    regularizer: str = "kl"
    selection: SelectionStrategy = SelectionStrategy()

    def __post_init__(self):
        if not (self.epsilon > 0.0):
            raise DataError(f"epsilon must be positive, got {self.epsilon}")
        if self.max_iters < 1:
            raise DataError(f"max_iters must be at least 1, got {self.max_iters}")
        if self.regularizer not in REGULARIZERS:
            raise DataError(
                f"unknown regularizer {self.regularizer!r}, expected one of {REGULARIZERS}"
            )


@dataclass(frozen=True, eq=False)
class LabelState:
    """Per-node category distributions plus the known/unknown mask."""

    n: np.ndarray
    mask: KnownMask

    def __post_init__(self):
        n = np.ascontiguousarray(self.n, dtype=np.float64)
        n.setflags(write=False)
        object.__setattr__(self, "n", n)
        if n.ndim != 2:
            raise DataError(f"state must be D x C, got shape {n.shape}")
        if n.shape[0] != self.mask.n_nodes:
            raise DataError(
                f"state has {n.shape[0]} rows but mask covers {self.mask.n_nodes} nodes"
            )
        if np.any(n < -1e-12):
            raise DataError("state rows must be nonnegative")
        if np.max(np.abs(n.sum(axis=1) - 1.0), initial=0.0) > _ROW_TOL:
            raise DataError("state rows must sum to 1")

    @property
    def n_categories(self):
        return self.n.shape[1]


@dataclass(frozen=True)
class AnalyticalDiagnostics:
    """Solve-quality report for the closed-form path.

    ``mu`` is the maximum row sum of the unknown-block submatrix; it is
    provably below 1 whenever at least one node is known, which is what
    makes ``I - T_UU`` invertible. ``iterations_equivalent`` estimates how
    many fixed-point iterations reach the default 1e-6 tolerance.
    """

    mu: float
    solve_residual: float
    iterations_equivalent: int


@dataclass(frozen=True)
class IterationResult:
    state: LabelState
    iterations: int
    converged: bool
    stalled_rows: tuple = ()


@dataclass(frozen=True)
class AnalyticalResult:
    state: LabelState
    diagnostics: AnalyticalDiagnostics


@dataclass(frozen=True)
class Selection:
    """Predictions for the unknown nodes; -1 marks an abstention."""

    unknown: np.ndarray
    predictions: np.ndarray
    confidence: np.ndarray
    coverage: float


def init_state(mask, n_categories, known_labels=None, known_dists=None):
    """Initial state: delta rows for known nodes, uniform rows for unknown.

    Parameters
    ----------
    mask : KnownMask
    n_categories : int
        C, the number of attribute categories.
    known_labels : sequence of int or mapping {node index: int}, optional
        Category index per known node; required for every known node not
        covered by ``known_dists``. A full-length sequence may carry
        arbitrary values (e.g. -1) at unknown positions.
    known_dists : mapping {node index: array of length C}, optional
        Prior distributions that replace the delta rows for specific known
        nodes. Rows must be nonnegative and sum to 1.
    """
    if n_categories < 2:
        raise DataError(f"need at least 2 categories, got {n_categories}")
    if mask.known.size == 0:
        raise DataError(
            "no known nodes: every connected component needs at least one label"
        )
    d = mask.n_nodes
    n = np.full((d, n_categories), 1.0 / n_categories, dtype=np.float64)
    if isinstance(known_labels, Mapping):
        label_of = dict(known_labels)
    elif known_labels is not None:
        seq = np.asarray(known_labels, dtype=np.int64)
        if seq.ndim != 1 or seq.size != d:
            raise DataError(
                f"known_labels sequence must have length D={d}, got {seq.shape}"
            )
        label_of = {int(i): int(seq[i]) for i in mask.known}
    else:
        label_of = {}
    dists = dict(known_dists or {})
    for i in mask.known:
        i = int(i)
        if i in dists:
            row = np.asarray(dists[i], dtype=np.float64)
            if row.shape != (n_categories,):
                raise DataError(f"distribution for node {i} has shape {row.shape}")
            if np.any(row < 0.0) or abs(row.sum() - 1.0) > _ROW_TOL:
                raise DataError(f"distribution for node {i} is not a distribution")
            n[i] = row
        elif i in label_of:
            c = label_of[i]
            if not (0 <= c < n_categories):
                raise DataError(f"label index {c} for node {i} outside 0..{n_categories - 1}")
            n[i] = 0.0
            n[i, c] = 1.0
        else:
            raise DataError(f"known node {i} has neither a label nor a distribution")
    return LabelState(n=n, mask=mask)


def _check_transition(T, kind, state):
    if not isinstance(T, TransitionMatrix) or T.kind is not kind:
        raise DataError(f"expected a {kind.value!r} transition matrix")
    if T.dim != state.n.shape[0]:
        raise DataError(
            f"transition matrix is {T.dim} x {T.dim} but state has {state.n.shape[0]} rows"
        )
    if state.mask.known.size == 0:
        raise DataError("propagation needs at least one known node")


def iterate_exp(Pe, state, cfg=None):
    """Fixed-point diffusion over the exponential transition matrix.

    Repeats ``n_U <- (Pe n)_U`` with known rows pinned until the squared
    Frobenius change drops to ``cfg.epsilon`` or ``cfg.max_iters`` is hit
    (the latter returns ``converged=False`` rather than raising).
    """
    cfg = cfg or PropagationConfig()
    _check_transition(Pe, TransitionKind.EXP, state)
    mask = state.mask
    u = mask.unknown
    if u.size == 0:
        return IterationResult(state=state, iterations=0, converged=True)
    n = np.array(state.n, dtype=np.float64)
    rows_u = Pe.T[u, :]
    converged = False
    iterations = 0
    for _ in range(cfg.max_iters):
        new_u = rows_u @ n
        delta = float(np.sum((new_u - n[u]) ** 2))
        n[u] = new_u
        iterations += 1
        if delta <= cfg.epsilon:
            converged = True
            break
    return IterationResult(
        state=LabelState(n=n, mask=mask), iterations=iterations, converged=converged
    )


def iterate_posneg(Ppos, Pneg, state, cfg=None):
    """Regularized diffusion using both signed transition matrices.

    One step computes, on the unknown rows,
    ``q+ = (Ppos n)_U`` and adds the regularizer contributions
    ``R(n0_U, q+)`` and ``R(n0_U, (Pneg n)_U)``, where ``n0_U`` is the
    unknown block of the supplied state and R is the element-wise KL or
    Wasserstein contribution matrix. The result is clamped at zero and
    row-renormalized, keeping the convergence test scale-free.

    With ``regularizer='none'`` the negative matrix drops out entirely and
    this is plain diffusion over ``Ppos``; unknown rows whose ``Ppos`` row
    is all-zero then never update and are reported in ``stalled_rows``.
    """
    cfg = cfg or PropagationConfig()
    _check_transition(Ppos, TransitionKind.POS, state)
    if Pneg is not None:
        _check_transition(Pneg, TransitionKind.NEG, state)
    return _iterate_signed(Ppos, Pneg, state, cfg)


def iterate_pos(Ppos, state, cfg=None):
    """Positive-part-only variant: the negative-matrix term is omitted."""
    cfg = cfg or PropagationConfig()
    _check_transition(Ppos, TransitionKind.POS, state)
    return _iterate_signed(Ppos, None, state, cfg)


def _iterate_signed(Ppos, Pneg, state, cfg):
    mask = state.mask
    u = mask.unknown
    if u.size == 0:
        return IterationResult(state=state, iterations=0, converged=True)
    n = np.array(state.n, dtype=np.float64)
    n0_u = state.n[u].copy()
    pos_u = Ppos.T[u, :]
    neg_u = Pneg.T[u, :] if Pneg is not None else None
    pos_zero = pos_u.sum(axis=1) == 0.0
    stalled = tuple(int(i) for i in u[pos_zero]) if cfg.regularizer == "none" else ()
    converged = False
    iterations = 0
    for _ in range(cfg.max_iters):
        q_pos = pos_u @ n
        upd = q_pos
        if cfg.regularizer != "none":
            upd = upd + regularizer_term(n0_u, q_pos, cfg.regularizer)
            if neg_u is not None:
                upd = upd + regularizer_term(n0_u, neg_u @ n, cfg.regularizer)
        np.clip(upd, 0.0, None, out=upd)
        sums = upd.sum(axis=1, keepdims=True)
        dead = sums[:, 0] <= 0.0
        # rows with nothing to propagate keep their previous value
        upd = np.where(dead[:, None], n[u], upd / np.where(dead[:, None], 1.0, sums))
        delta = float(np.sum((upd - n[u]) ** 2))
        n[u] = upd
        iterations += 1
        if delta <= cfg.epsilon:
            converged = True
            break
    return IterationResult(
        state=LabelState(n=n, mask=mask),
        iterations=iterations,
        converged=converged,
        stalled_rows=stalled,
    )


def regularizer_term(n0, q, kind):
    """Element-wise distribution-distance contribution matrix.

    For ``kl`` the entry (i, c) is ``n0[i, c] * ln(n0[i, c] / q[i, c])``
    with q clamped at 1e-12 before the logs and zeros where n0 is zero;
    summing a row recovers the scalar KL divergence. For ``wasserstein``
    the entry is the absolute difference of the two row CDFs at position c
    (categories taken in index order); a row sum recovers the 1-D
    Wasserstein distance.
    """
    n0 = np.asarray(n0, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if n0.shape != q.shape:
        raise DataError(f"shape mismatch {n0.shape} vs {q.shape}")
    if kind == "kl":
        safe_q = np.maximum(q, _LOG_CLAMP)
        out = n0 * (np.log(np.maximum(n0, _LOG_CLAMP)) - np.log(safe_q))
        out[n0 == 0.0] = 0.0
        return out
    if kind == "wasserstein":
        return np.abs(np.cumsum(n0, axis=1) - np.cumsum(q, axis=1))
    raise DataError(f"unknown regularizer {kind!r}")


def analytical(Pe, state):
    """Closed-form fixed point of :func:`iterate_exp`.

    Solves ``(I - T_UU) n_U = T_UK n_K`` by direct LU factorization (no
    explicit inverse). Known rows are passed through untouched. The
    returned diagnostics carry the contraction bound ``mu`` (asserted
    < 1) and the Frobenius residual of the solve.
    """
    _check_transition(Pe, TransitionKind.EXP, state)
    mask = state.mask
    u, k = mask.unknown, mask.known
    if u.size == 0:
        diag = AnalyticalDiagnostics(mu=0.0, solve_residual=0.0, iterations_equivalent=0)
        return AnalyticalResult(state=state, diagnostics=diag)
    A = Pe.T[np.ix_(u, u)]
    B = Pe.T[np.ix_(u, k)]
    mu = float(A.sum(axis=1).max())
    if not mu < 1.0:
        raise NumericalError(
            f"unknown-block row sums reach {mu}; transition matrix is not strictly "
            "substochastic on the unknown block (is any node known?)"
        )
    rhs = B @ state.n[k]
    system = np.eye(u.size) - A
    try:
        x = scipy.linalg.solve(system, rhs)
    except scipy.linalg.LinAlgError as exc:
        raise NumericalError(f"linear solve failed: {exc}") from exc
    residual = float(np.linalg.norm(system @ x - rhs))
    n = np.array(state.n, dtype=np.float64)
    n[u] = x
    iters = int(math.ceil(math.log(1e-6) / math.log(mu))) if 0.0 < mu < 1.0 else 0
    diag = AnalyticalDiagnostics(mu=mu, solve_residual=residual, iterations_equivalent=iters)
    return AnalyticalResult(state=LabelState(n=n, mask=mask), diagnostics=diag)


def softmax_rows(a):
    """Row-wise softmax with max-subtraction stabilization."""
    a = np.asarray(a, dtype=np.float64)
    z = a - a.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def select(state, strategy=None):
    """Pick categories for the unknown nodes from a converged state.

    Each unknown row is passed through a softmax; ``argmax`` takes the top
    category, ``confidence`` additionally requires the top softmax
    probability to reach the threshold and abstains (-1) otherwise.

    Because the softmax squashes an already-normalized row, the top
    probability lives in ``[1/C, e / (C - 1 + e)]``; a threshold of 1/C
    therefore never abstains, and thresholds are most usefully phrased
    relative to the observed maximum.
    """
    strategy = strategy or SelectionStrategy()
    u = state.mask.unknown
    if u.size == 0:
        return Selection(
            unknown=u.copy(),
            predictions=np.empty(0, dtype=np.int64),
            confidence=np.empty(0, dtype=np.float64),
            coverage=1.0,
        )
    probs = softmax_rows(state.n[u])
    preds = probs.argmax(axis=1).astype(np.int64)
    conf = probs.max(axis=1)
    if strategy.mode == "confidence":
        c = state.n_categories
        if strategy.threshold < 1.0 / c - 1e-12:
            raise DataError(
                f"threshold {strategy.threshold} below 1/C={1.0 / c:.6g} is vacuous"
            )
        preds = np.where(conf >= strategy.threshold - 1e-12, preds, -1)
    coverage = float(np.mean(preds >= 0))
    return Selection(unknown=u.copy(), predictions=preds, confidence=conf, coverage=coverage)

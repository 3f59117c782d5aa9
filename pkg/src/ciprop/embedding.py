"""Weighted-node2vec baseline: biased walks, skip-gram embeddings, classifier.

The walk and training kernels live in ``ciprop._kernels`` (compiled when the
extension is built, numpy otherwise); this module owns configuration,
validation, RNG stream derivation, and the supervised classifier on top of
the embeddings.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from sklearn.linear_model import LogisticRegression
from sklearn.neural_network import MLPRegressor

from ._kernels import biased_walks, sgns_train
from .dataset import KnownMask
from .errors import DataError
from .transition import TransitionMatrix

CLASSIFIER_MODELS = ("logistic", "mlp")


@dataclass(frozen=True)
class EmbeddingConfig:
    """Hyperparameters for walk generation and skip-gram training.

    ``p`` is the return parameter and ``q`` the in-out parameter of the
    second-order walk bias; ``dimension`` is the embedding size E.
    """

    dimension: int = 64
    walk_length: int = 20
    walks_per_node: int = 10
    p: float = 1.0
    q: float = 2.0
    window: int = 5
    negative_samples: int = 5
    epochs: int = 5
    learning_rate: float = 0.025
    seed: int = 0

    def __post_init__(self):
        if self.dimension < 1:
            raise DataError("embedding dimension must be >= 1")
        if not (self.p > 0 and np.isfinite(self.p)):
            raise DataError("return parameter p must be positive")
        if not (self.q > 0 and np.isfinite(self.q)):
            raise DataError("in-out parameter q must be positive")
        for name in ("walk_length", "walks_per_node", "window", "epochs"):
            if getattr(self, name) < 1:
                raise DataError(f"{name} must be >= 1")
        if self.negative_samples < 0:
            raise DataError("negative_samples must be >= 0")
        if not (self.learning_rate > 0 and np.isfinite(self.learning_rate)):
            raise DataError("learning_rate must be positive")


@dataclass(frozen=True, eq=False)
class NodeEmbeddings:
    """D x E matrix of node vectors, one row per node."""

    vectors: np.ndarray

    def __post_init__(self):
        vec = np.ascontiguousarray(np.asarray(self.vectors, dtype=np.float64))
        if vec.ndim != 2:
            raise DataError("embedding vectors must be a 2-D matrix")
        if not np.all(np.isfinite(vec)):
            raise DataError("embedding vectors contain non-finite values")
        vec.flags.writeable = False
        object.__setattr__(self, "vectors", vec)

    @property
    def n_nodes(self):
        return self.vectors.shape[0]

    @property
    def dimension(self):
        return self.vectors.shape[1]


@dataclass(frozen=True)
class TrainReport:
    """Classifier training summary; final_loss is the squared loss on the
    evaluation fold."""

    final_loss: float
    epochs_run: int
    converged: bool

    def __post_init__(self):
        if self.final_loss < 0:
            raise DataError("final_loss must be >= 0")


def _as_weight_array(weights):
    if isinstance(weights, TransitionMatrix):
        arr = weights.T
    else:
        arr = np.asarray(weights, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DataError("walk weights must be a square matrix")
    if not np.all(np.isfinite(arr)):
        raise DataError("walk weights contain non-finite values")
    if np.any(arr < 0):
        raise DataError("walk weights must be non-negative")
    return np.ascontiguousarray(arr)


def random_walks(Pm, cfg: EmbeddingConfig):
    """Generate second-order biased walks over a weight matrix.

    Parameters
    ----------
    Pm : TransitionMatrix or array_like
        Square non-negative edge weights, typically the max-normalized
        transition matrix. Strictly positive weights guarantee walks never
        stall; an all-zero row repeats its node in place.
    cfg : EmbeddingConfig

    Returns
    -------
    ndarray of int32, shape (D * walks_per_node, walk_length)
        Walk ``r * D + s`` starts at node ``s``. Deterministic given
        ``cfg.seed``.
    """
    W = _as_weight_array(Pm)
    ss = np.random.SeedSequence(cfg.seed, spawn_key=(0,))
    seed = int(ss.generate_state(1, dtype=np.uint64)[0])
    return biased_walks(W, cfg.walk_length, cfg.walks_per_node, cfg.p, cfg.q, seed)


def train_embeddings(corpus, cfg: EmbeddingConfig, n_nodes=None) -> NodeEmbeddings:
    """Train skip-gram-with-negative-sampling embeddings on a walk corpus.

    The noise distribution is the corpus unigram distribution raised to
    0.75. Input vectors start uniform in (-0.5/E, 0.5/E); output vectors
    start at zero. The learning rate decays linearly per token.

    Raises DataError on an empty corpus.
    """
    walks = np.ascontiguousarray(np.asarray(corpus, dtype=np.int32))
    if walks.ndim != 2 or walks.size == 0:
        raise DataError("walk corpus is empty")
    if walks.min() < 0:
        raise DataError("walk corpus contains negative node indices")
    if n_nodes is None:
        n_nodes = int(walks.max()) + 1
    elif walks.max() >= n_nodes:
        raise DataError("walk corpus references nodes beyond n_nodes")

    counts = np.bincount(walks.ravel(), minlength=n_nodes).astype(np.float64)
    noise = counts**0.75
    total = noise.sum()
    if total <= 0:
        raise DataError("walk corpus is empty")
    noise_cdf = np.cumsum(noise / total)
    noise_cdf[-1] = 1.0

    ss = np.random.SeedSequence(cfg.seed, spawn_key=(1,))
    sgns_seed = int(ss.generate_state(1, dtype=np.uint64)[0])
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(2,)))
    dim = cfg.dimension
    syn0 = (rng.random((n_nodes, dim)) - 0.5) / dim
    syn1 = np.zeros((n_nodes, dim), dtype=np.float64)
    lr_min = cfg.learning_rate * 1e-4
    sgns_train(
        walks,
        n_nodes,
        dim,
        cfg.window,
        cfg.negative_samples,
        cfg.epochs,
        cfg.learning_rate,
        lr_min,
        noise_cdf,
        sgns_seed,
        syn0,
        syn1,
    )
    return NodeEmbeddings(vectors=syn0)


def node2vec_embed(Pm, cfg: EmbeddingConfig) -> NodeEmbeddings:
    """Convenience wrapper: random_walks followed by train_embeddings."""
    W = _as_weight_array(Pm)
    corpus = random_walks(W, cfg)
    return train_embeddings(corpus, cfg, n_nodes=W.shape[0])


class NodeClassifier:
    """Trained classifier over node embeddings.

    Wraps the underlying estimator so that predict_proba always returns a
    full (n, C) row-stochastic matrix even when some categories were absent
    from the known set (those columns are zero). Not constructed directly;
    use fit_classifier.
    """

    def __init__(self, estimator, model, classes, n_categories, dimension):
        self.estimator = estimator
        self.model = model
        self.classes = np.asarray(classes, dtype=np.int64)
        self.n_categories = int(n_categories)
        self.dimension = int(dimension)

    def predict_proba(self, vectors):
        vectors = np.asarray(vectors, dtype=np.float64)
        if vectors.ndim != 2 or vectors.shape[1] != self.dimension:
            raise DataError(
                f"classifier expects {self.dimension}-dimensional embeddings, "
                f"got shape {vectors.shape}"
            )
        n = vectors.shape[0]
        out = np.zeros((n, self.n_categories), dtype=np.float64)
        if n == 0:
            return out
        if len(self.classes) == 1:
            out[:, self.classes[0]] = 1.0
            return out
        if self.model == "logistic":
            proba = self.estimator.predict_proba(vectors)
            out[:, self.classes] = proba
        else:
            raw = np.atleast_2d(self.estimator.predict(vectors))
            raw = np.clip(raw, 0.0, None)
            sums = raw.sum(axis=1, keepdims=True)
            flat = sums[:, 0] <= 0
            raw[flat] = 1.0
            sums[flat] = raw.shape[1]
            out[:, self.classes] = raw / sums
        return out

    def predict(self, vectors):
        return np.argmax(self.predict_proba(vectors), axis=1)


def _squared_loss(proba, label_idx, n_categories):
    onehot = np.zeros((len(label_idx), n_categories), dtype=np.float64)
    onehot[np.arange(len(label_idx)), label_idx] = 1.0
    return float(np.sum((onehot - proba) ** 2))


def fit_classifier(embeddings: NodeEmbeddings, mask: KnownMask, labels,
                   model="logistic", seed=0, n_categories=None):
    """Train a classifier on known-node embeddings.

    Parameters
    ----------
    embeddings : NodeEmbeddings
    mask : KnownMask
        Training uses the known set; an internal 20% fold of it (when large
        enough) is held out to report the evaluation loss.
    labels : sequence of int
        Category indices of length D; unknown entries are ignored.
    model : {"logistic", "mlp"}
        "logistic" trains multinomial logistic regression (cross-entropy);
        "mlp" trains a small network on one-hot targets under squared loss.
    seed : int
    n_categories : int, optional
        Total category count C; inferred from labels when omitted.

    Returns
    -------
    (NodeClassifier, TrainReport)
        The report's final_loss is the squared loss on the held-out fold.
        Warns when a category has no known example; such categories are
        never predicted.
    """
    if model not in CLASSIFIER_MODELS:
        raise DataError(f"unknown classifier model {model!r}; expected one of {CLASSIFIER_MODELS}")
    labels = np.asarray(labels, dtype=np.int64)
    if labels.ndim != 1 or len(labels) != embeddings.n_nodes:
        raise DataError("labels must be a 1-D sequence with one entry per node")
    if labels.min() < 0:
        raise DataError("labels must be non-negative category indices")
    if mask.n_nodes != embeddings.n_nodes:
        raise DataError("mask and embeddings disagree on node count")
    known = mask.known
    if len(known) == 0:
        raise DataError("cannot fit a classifier with no known nodes")
    if n_categories is None:
        n_categories = int(labels.max()) + 1
    elif labels.max() >= n_categories:
        raise DataError("labels reference categories beyond n_categories")

    y = labels[known]
    X = embeddings.vectors[known]
    present = np.unique(y)
    if len(present) < n_categories:
        missing = sorted(set(range(n_categories)) - set(present.tolist()))
        warnings.warn(
            f"categories {missing} have no known example; the classifier can never predict them",
            stacklevel=2,
        )

    # held-out fold for the loss report (stratification not required at this size)
    rng = np.random.default_rng(seed)
    n_known = len(known)
    if n_known >= 5 and len(present) >= 2:
        order = rng.permutation(n_known)
        n_fold = max(1, n_known // 5)
        fold_idx, train_idx = order[:n_fold], order[n_fold:]
        if len(np.unique(y[train_idx])) < len(present):
            fold_idx, train_idx = order[:0], order  # keep every class in training
    else:
        fold_idx, train_idx = np.arange(0), np.arange(n_known)
    if len(fold_idx) == 0:
        fold_idx = train_idx

    X_train, y_train = X[train_idx], y[train_idx]
    classes = np.unique(y_train)

    if len(classes) == 1:
        warnings.warn("only one category among known nodes; classifier is degenerate", stacklevel=2)
        clf = NodeClassifier(None, model, classes, n_categories, embeddings.dimension)
        proba = clf.predict_proba(X[fold_idx])
        loss = _squared_loss(proba, y[fold_idx], n_categories)
        return clf, TrainReport(final_loss=loss, epochs_run=0, converged=True)

    if model == "logistic":
        est = LogisticRegression(max_iter=1000, random_state=seed)
        est.fit(X_train, y_train)
        epochs_run = int(np.max(est.n_iter_))
        converged = epochs_run < est.max_iter
    else:
        onehot = np.zeros((len(y_train), n_categories), dtype=np.float64)
        onehot[np.arange(len(y_train)), y_train] = 1.0
        est = MLPRegressor(
            hidden_layer_sizes=(embeddings.dimension,),
            max_iter=1000,
            tol=1e-6,
            random_state=seed,
        )
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")  # sklearn convergence chatter
            est.fit(X_train, onehot[:, classes])
        epochs_run = int(est.n_iter_)
        converged = epochs_run < est.max_iter

    clf = NodeClassifier(est, model, classes, n_categories, embeddings.dimension)
    proba = clf.predict_proba(X[fold_idx])
    loss = _squared_loss(proba, y[fold_idx], n_categories)
    return clf, TrainReport(final_loss=loss, epochs_run=epochs_run, converged=converged)


def predict_unknown(classifier: NodeClassifier, embeddings: NodeEmbeddings, mask: KnownMask):
    """Predict category distributions for the unknown nodes.

    Returns a (|U|, C) row-stochastic matrix aligned with mask.unknown.
    Raises DataError when the classifier was trained on a different
    embedding dimension.
    """
    if mask.n_nodes != embeddings.n_nodes:
        raise DataError("mask and embeddings disagree on node count")
    unknown = mask.unknown
    if len(unknown) == 0:
        return np.zeros((0, classifier.n_categories), dtype=np.float64)
    return classifier.predict_proba(embeddings.vectors[unknown])

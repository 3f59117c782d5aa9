"""Datasets for node-attribute propagation.

A :class:`Dataset` holds a D-node problem: an observation matrix ``X`` with
one column per node (rows are samples, e.g. dictionary words for the
publication datasets), a categorical ground-truth label per node, and the
list of category names.

Loaders are provided for the two publication corpora in the layout
distributed by the Linqs project, plus a canonical JSON container used for
fixtures and intermediate artifacts, and a synthetic generator with planted
cluster structure for tests and demos.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import DataError

SOURCES = ("Cora", "PubMedDiabetes", "Synthetic", "Custom")

_DATASET_FORMAT = "ciprop-dataset"
_DATASET_VERSION = 1


def _readonly(a):
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable observation matrix plus per-node categorical labels.

    ``X`` is M x D: M observation samples for each of the D node variables.
    For the publication datasets the nodes are papers and the samples are
    dictionary words, so a column is one paper's word profile.
    """

    node_ids: tuple
    X: np.ndarray
    labels: tuple
    category_names: tuple
    source: str = "Custom"

    def __post_init__(self):
        object.__setattr__(self, "node_ids", tuple(str(n) for n in self.node_ids))
        object.__setattr__(self, "labels", tuple(str(l) for l in self.labels))
        object.__setattr__(self, "category_names", tuple(str(c) for c in self.category_names))
        object.__setattr__(self, "X", _readonly(self.X))
        if self.source not in SOURCES:
            raise DataError(f"unknown source {self.source!r}, expected one of {SOURCES}")
        d = len(self.node_ids)
        if d == 0:
            raise DataError("dataset has zero nodes")
        if self.X.ndim != 2 or self.X.shape[1] != d:
            raise DataError(
                f"X must be M x D with D={d} columns, got shape {self.X.shape}"
            )
        if len(self.labels) != d:
            raise DataError(f"{len(self.labels)} labels for {d} nodes")
        if len(set(self.node_ids)) != d:
            raise DataError("node_ids contain duplicates")
        if len(set(self.category_names)) != len(self.category_names):
            raise DataError("category_names contain duplicates")
        if len(self.category_names) < 2:
            raise DataError("need at least 2 categories")
        missing = set(self.labels) - set(self.category_names)
        if missing:
            raise DataError(f"labels {sorted(missing)} not in category_names")
        if not np.all(np.isfinite(self.X)):
            raise DataError("X contains non-finite values")

    @property
    def n_nodes(self):
        return len(self.node_ids)

    @property
    def n_samples(self):
        return self.X.shape[0]

    @property
    def n_categories(self):
        return len(self.category_names)

    def label_indices(self):
        """Labels as integer indices into ``category_names``."""
        lut = {c: i for i, c in enumerate(self.category_names)}
        return np.array([lut[l] for l in self.labels], dtype=np.int64)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.node_ids == other.node_ids
            and self.labels == other.labels
            and self.category_names == other.category_names
            and self.source == other.source
            and self.X.shape == other.X.shape
            and np.array_equal(self.X, other.X)
        )


@dataclass(frozen=True, eq=False)
class KnownMask:
    """Partition of node indices into known (labeled) and unknown sets."""

    known: np.ndarray
    unknown: np.ndarray

    def __post_init__(self):
        k = np.unique(np.asarray(self.known, dtype=np.int64))
        u = np.unique(np.asarray(self.unknown, dtype=np.int64))
        k.setflags(write=False)
        u.setflags(write=False)
        object.__setattr__(self, "known", k)
        object.__setattr__(self, "unknown", u)
        d = k.size + u.size
        if d == 0:
            raise DataError("empty mask")
        combined = np.concatenate([k, u])
        if np.intersect1d(k, u).size:
            raise DataError("known and unknown sets overlap")
        if not np.array_equal(np.sort(combined), np.arange(d)):
            raise DataError("known and unknown must partition 0..D-1")

    @property
    def n_nodes(self):
        return self.known.size + self.unknown.size

    def __eq__(self, other):
        if not isinstance(other, KnownMask):
            return NotImplemented
        return np.array_equal(self.known, other.known) and np.array_equal(
            self.unknown, other.unknown
        )


# ---------------------------------------------------------------------------
# Loaders


def load_cora(content_path):
    """Parse a Cora-style ``.content`` file.

    Each line is ``<paper_id> TAB <f1> ... <fN> TAB <class_label>`` with
    0/1-valued features. The feature count N is taken from the first line
    and enforced on the rest (the genuine corpus has N=1433). Columns of
    the returned ``X`` are papers, rows are dictionary words.
    """
    path = Path(content_path)
    if not path.exists():
        raise DataError(f"Cora content file not found: {path}")
    ids, labels, rows = [], [], []
    seen = set()
    n_features = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if n_features is None:
                n_features = len(fields) - 2
                if n_features < 1:
                    raise DataError(f"{path}:{lineno}: too few fields ({len(fields)})")
            if len(fields) != n_features + 2:
                raise DataError(
                    f"{path}:{lineno}: expected {n_features + 2} fields, got {len(fields)}"
                )
            paper_id, feats, label = fields[0], fields[1:-1], fields[-1]
            if paper_id in seen:
                raise DataError(f"{path}:{lineno}: duplicate paper id {paper_id!r}")
            seen.add(paper_id)
            vec = np.empty(n_features, dtype=np.float64)
            for i, tok in enumerate(feats):
                if tok == "0":
                    vec[i] = 0.0
                elif tok == "1":
                    vec[i] = 1.0
                else:
                    raise DataError(
                        f"{path}:{lineno}: non-binary feature value {tok!r} at position {i + 1}"
                    )
            ids.append(paper_id)
            labels.append(label)
            rows.append(vec)
    if not ids:
        raise DataError(f"{path}: empty file, a dataset needs at least one node")
    X = np.stack(rows, axis=1)  # words x papers
    return Dataset(
        node_ids=tuple(ids),
        X=X,
        labels=tuple(labels),
        category_names=tuple(sorted(set(labels))),
        source="Cora",
    )


def load_pubmed(node_path):
    """Parse a PubMed-Diabetes ``NODE.paper.tab`` file.

    Expected layout (the canonical Linqs distribution):

    * line 1: integer node count;
    * line 2: tab-separated field declarations, ``cat=label:label`` first,
      one ``numeric:<word>:0.0`` per dictionary word, ``summary`` last;
    * remaining lines: ``<paper_id> TAB label=<1|2|3> TAB <word>=<weight>
      ... TAB summary=<ignored>``.

    Words absent from a paper get weight 0.0. A word token not declared in
    the header is an error.
    """
    path = Path(node_path)
    if not path.exists():
        raise DataError(f"PubMed node file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if len(lines) < 3:
        raise DataError(f"{path}: expected two header lines plus node lines")
    try:
        declared = int(lines[0].strip())
    except ValueError as exc:
        raise DataError(f"{path}:1: first line must be the node count") from exc
    vocab = []
    for tok in lines[1].split("\t"):
        parts = tok.split(":")
        if len(parts) == 3 and parts[0] == "numeric":
            vocab.append(parts[1])
    if not vocab:
        raise DataError(f"{path}:2: no numeric:<word>:0.0 declarations found")
    word_index = {w: i for i, w in enumerate(vocab)}
    ids, labels, cols = [], [], []
    seen = set()
    for lineno, line in enumerate(lines[2:], start=3):
        if not line.strip():
            continue
        fields = line.split("\t")
        paper_id = fields[0].strip()
        if paper_id in seen:
            raise DataError(f"{path}:{lineno}: duplicate paper id {paper_id!r}")
        seen.add(paper_id)
        label = None
        vec = np.zeros(len(vocab), dtype=np.float64)
        for tok in fields[1:]:
            tok = tok.strip()
            if not tok:
                continue
            if "=" not in tok:
                raise DataError(f"{path}:{lineno}: malformed token {tok!r}")
            key, _, value = tok.partition("=")
            if key == "label":
                if value not in ("1", "2", "3"):
                    raise DataError(
                        f"{path}:{lineno}: label must be one of 1, 2, 3, got {value!r}"
                    )
                label = value
            elif key == "summary":
                continue
            else:
                if key not in word_index:
                    raise DataError(f"{path}:{lineno}: unknown word token {key!r}")
                vec[word_index[key]] = float(value)
        if label is None:
            raise DataError(f"{path}:{lineno}: node line has no label field")
        ids.append(paper_id)
        labels.append(label)
        cols.append(vec)
    if not ids:
        raise DataError(f"{path}: no node lines")
    if declared != len(ids):
        raise DataError(f"{path}: header declares {declared} nodes, file has {len(ids)}")
    X = np.stack(cols, axis=1)  # words x papers
    return Dataset(
        node_ids=tuple(ids),
        X=X,
        labels=tuple(labels),
        category_names=("1", "2", "3"),
        source="PubMedDiabetes",
    )


# ---------------------------------------------------------------------------
# Transformations


def subsample(ds, size, seed, stratified=False):
    """Restrict to ``size`` nodes sampled without replacement.

    Uniform by default; ``stratified=True`` draws proportionally to class
    frequencies. Deterministic given ``seed``. Category names are kept from
    the parent dataset so category indices stay comparable across subsets.
    """
    if size <= 0:
        raise DataError(f"subsample size must be positive, got {size}")
    if size > ds.n_nodes:
        raise DataError(f"subsample size {size} exceeds node count {ds.n_nodes}")
    rng = np.random.default_rng(seed)
    if stratified:
        idx = _stratified_choice(ds, size, rng)
    else:
        idx = rng.choice(ds.n_nodes, size=size, replace=False)
    idx = np.sort(idx)
    return Dataset(
        node_ids=tuple(ds.node_ids[i] for i in idx),
        X=ds.X[:, idx],
        labels=tuple(ds.labels[i] for i in idx),
        category_names=ds.category_names,
        source=ds.source,
    )


def _stratified_choice(ds, size, rng):
    labels = np.asarray(ds.labels)
    picked = []
    classes = list(ds.category_names)
    # largest-remainder apportionment of `size` across classes
    counts = np.array([np.sum(labels == c) for c in classes], dtype=np.int64)
    present = counts > 0
    quota = size * counts / counts.sum()
    base = np.floor(quota).astype(np.int64)
    base = np.minimum(base, counts)
    remainder = size - base.sum()
    order = np.argsort(-(quota - base))
    for j in order:
        if remainder == 0:
            break
        if present[j] and base[j] < counts[j]:
            base[j] += 1
            remainder -= 1
    if remainder != 0:
        raise DataError("stratified subsample could not apportion the requested size")
    for c, take in zip(classes, base):
        pool = np.flatnonzero(labels == c)
        if take > 0:
            picked.append(rng.choice(pool, size=take, replace=False))
    return np.concatenate(picked)


def normalize(ds, method="minmax"):
    """Per-node-dimension rescaling of the observation matrix.

    ``minmax`` maps each column to [0, 1] (constant columns to 0),
    ``mean`` subtracts the per-column mean, ``none`` is the identity and
    returns X unchanged bit for bit.
    """
    method = str(method).lower()
    if method == "none":
        return ds
    X = np.array(ds.X, dtype=np.float64)
    if method == "minmax":
        lo = X.min(axis=0)
        hi = X.max(axis=0)
        span = hi - lo
        constant = span == 0
        span[constant] = 1.0
        X = (X - lo) / span
        X[:, constant] = 0.0
    elif method in ("mean", "meancenter"):
        X = X - X.mean(axis=0)
    else:
        raise DataError(f"unknown normalization {method!r} (use minmax, mean or none)")
    return Dataset(ds.node_ids, X, ds.labels, ds.category_names, ds.source)


def mask_labels(ds, fraction=None, count=None, seed=0):
    """Hide labels of a random node subset; returns a :class:`KnownMask`.

    Exactly one of ``fraction`` (in (0,1), rounded to a node count) or
    ``count`` must be given. Both the unknown and the known set must end up
    non-empty. Deterministic given ``seed``.
    """
    d = ds.n_nodes
    if (fraction is None) == (count is None):
        raise DataError("specify exactly one of fraction or count")
    if fraction is not None:
        if not (0.0 < fraction < 1.0):
            raise DataError(f"fraction must lie in (0, 1), got {fraction}")
        n_unknown = int(round(fraction * d))
        n_unknown = min(max(n_unknown, 1), d - 1)
    else:
        n_unknown = int(count)
        if n_unknown < 1:
            raise DataError(f"count must be at least 1, got {count}")
        if n_unknown >= d:
            raise DataError(f"count {count} leaves no known nodes (D={d})")
    rng = np.random.default_rng(seed)
    unknown = rng.choice(d, size=n_unknown, replace=False)
    known = np.setdiff1d(np.arange(d), unknown)
    return KnownMask(known=known, unknown=unknown)


# ---------------------------------------------------------------------------
# Canonical JSON container


def save_dataset(ds, path, encoding="auto"):
    """Write the canonical JSON container (dense or sparse feature payload)."""
    path = Path(path)
    X = ds.X
    if encoding == "auto":
        density = np.count_nonzero(X) / max(X.size, 1)
        encoding = "sparse" if density < 0.25 else "dense"
    if encoding == "dense":
        features = {"encoding": "dense", "shape": list(X.shape), "values": X.tolist()}
    elif encoding == "sparse":
        r, c = np.nonzero(X)
        features = {
            "encoding": "sparse",
            "shape": list(X.shape),
            "rows": r.tolist(),
            "cols": c.tolist(),
            "values": X[r, c].tolist(),
        }
    else:
        raise DataError(f"unknown encoding {encoding!r}")
    obj = {
        "format": _DATASET_FORMAT,
        "version": _DATASET_VERSION,
        "source": ds.source,
        "node_ids": list(ds.node_ids),
        "categories": list(ds.category_names),
        "labels": list(ds.labels),
        "features": features,
    }
    path.write_text(json.dumps(obj))


def load_dataset(path):
    """Read a dataset written by :func:`save_dataset`."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"dataset file not found: {path}")
    try:
        obj = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(obj, dict) or obj.get("format") != _DATASET_FORMAT:
        raise DataError(f"{path}: not a {_DATASET_FORMAT} container")
    if obj.get("version") != _DATASET_VERSION:
        raise DataError(f"{path}: unsupported version {obj.get('version')}")
    feats = obj.get("features", {})
    shape = feats.get("shape")
    if feats.get("encoding") == "dense":
        X = np.asarray(feats["values"], dtype=np.float64).reshape(shape)
    elif feats.get("encoding") == "sparse":
        X = np.zeros(shape, dtype=np.float64)
        X[feats["rows"], feats["cols"]] = feats["values"]
    else:
        raise DataError(f"{path}: unknown feature encoding {feats.get('encoding')!r}")
    return Dataset(
        node_ids=tuple(obj["node_ids"]),
        X=X,
        labels=tuple(obj["labels"]),
        category_names=tuple(obj["categories"]),
        source=obj.get("source", "Custom"),
    )


# ---------------------------------------------------------------------------
# Synthetic data


def make_synthetic(
    n_nodes=60,
    n_classes=3,
    n_samples=200,
    intra_strength=1.0,
    class_correlation=None,
    noise=0.8,
    seed=0,
):
    """Generate a dataset with planted cluster structure.

    Each class gets a latent factor over the samples; factors across
    classes are correlated at ``class_correlation`` (negative values plant
    negative partial correlations between clusters, which is what the
    sign-splitting propagation variants exploit). A node's observation
    column is its class factor scaled by ``intra_strength`` plus white
    noise. The default correlation is -0.8/(n_classes - 1), which is 80%
    of the most negative value keeping the factor covariance positive
    semidefinite.
    """
    if n_classes < 2:
        raise DataError("need at least 2 classes")
    if class_correlation is None:
        class_correlation = -0.8 / (n_classes - 1)
    if not (-1.0 / (n_classes - 1) <= class_correlation <= 1.0):
        raise DataError(
            f"class_correlation must lie in [-1/(n_classes-1), 1], got {class_correlation}"
        )
    rng = np.random.default_rng(seed)
    # factor covariance (1-r)I + rJ, Cholesky-mixed from iid gaussians
    cov = np.full((n_classes, n_classes), class_correlation, dtype=np.float64)
    np.fill_diagonal(cov, 1.0)
    chol = np.linalg.cholesky(cov + 1e-12 * np.eye(n_classes))
    factors = rng.standard_normal((n_samples, n_classes)) @ chol.T
    labels = np.arange(n_nodes) % n_classes
    X = (
        intra_strength * factors[:, labels]
        + noise * rng.standard_normal((n_samples, n_nodes))
    )
    names = tuple(f"class-{c}" for c in range(n_classes))
    return Dataset(
        node_ids=tuple(f"syn-{i:04d}" for i in range(n_nodes)),
        X=X,
        labels=tuple(names[c] for c in labels),
        category_names=names,
        source="Synthetic",
    )

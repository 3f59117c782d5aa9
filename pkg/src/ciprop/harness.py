"""Experiment harness: subsample, recover, mask, propagate, score, aggregate.

One *cell* is (method, masking level); one *run* inside a cell draws a node
subsample and a label mask from seeds derived deterministically from the
master seed, so every method sees the same data in the same run (paired
comparisons) and reports are reproducible regardless of worker count.
"""

from __future__ import annotations

import csv
import itertools
import json
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from functools import partial
from pathlib import Path

import numpy as np

from . import cigraph
from . import dataset as ds_mod
from . import embedding, propagate, transition
from .errors import CipropError, DataError, UsageError

METHODS = (
    "node2vec",
    "iterative-exp",
    "iterative-pos",
    "iterative-posneg",
    "analytical-exp",
)
SPLITS = ("test", "validation")
RESAMPLE_MODES = ("per-run", "once")
DATASET_KINDS = ("cora", "pubmed", "synthetic", "container")

# seed-stream domains; tuning never shares streams with reported runs
_DOMAIN = {"test": 0, "validation": 1, "tuning": 2}

_SYNTHETIC_KEYS = (
    "n_nodes",
    "n_classes",
    "n_samples",
    "intra_strength",
    "class_correlation",
    "noise",
    "seed",
)
_PARAM_KEYS = ("alpha", "shrinkage", "regularizer", "dimension")


@dataclass
class ExperimentSpec:
    """Declarative description of an experiment.

    ``dataset`` is a reference dict: {"kind": "cora"|"pubmed"|"container",
    "path": ...} or {"kind": "synthetic", ...generator params}. ``masking``
    levels are fractions in (0,1) or absolute node counts. Methods missing
    from ``hyperparameters`` are tuned by grid search on the validation
    seed domain; listed ones skip tuning.
    """

    dataset: dict
    methods: tuple = METHODS
    masking: tuple = (0.2, 0.4, 0.6)
    subset_size: int = 300
    runs: int = 50
    validation_runs: int = 15
    split: str = "test"
    master_seed: int = 0
    resample: str = "per-run"
    normalization: str = "minmax"
    correlation: str = "pearson"
    zero_threshold: float = 0.0
    stratified: bool = False
    alpha_grid: tuple = (0.5, 1.0, 2.0, 5.0, 10.0)
    shrinkage_grid: tuple = (0.1,)
    regularizer_grid: tuple = ("kl",)
    dimension_grid: tuple = (64,)
    hyperparameters: dict = field(default_factory=dict)
    classifier: str = "logistic"
    epsilon: float = 1e-6
    max_iters: int = 1000
    embedding: dict = field(default_factory=dict)
    workers: int = 1

    def __post_init__(self):
        self.methods = tuple(self.methods)
        self.masking = tuple(self.masking)
        self.alpha_grid = tuple(self.alpha_grid)
        self.shrinkage_grid = tuple(self.shrinkage_grid)
        self.regularizer_grid = tuple(self.regularizer_grid)
        self.dimension_grid = tuple(self.dimension_grid)
        if not isinstance(self.dataset, dict) or "kind" not in self.dataset:
            raise UsageError("dataset reference must be a dict with a 'kind' key")
        if self.dataset["kind"] not in DATASET_KINDS:
            raise UsageError(
                f"unknown dataset kind {self.dataset['kind']!r}; expected one of {DATASET_KINDS}"
            )
        if not self.methods:
            raise UsageError("methods list is empty")
        for m in self.methods:
            if m not in METHODS:
                raise UsageError(f"unknown method {m!r}; expected one of {METHODS}")
        if not self.masking:
            raise UsageError("masking list is empty")
        for level in self.masking:
            _check_level(level)
        if self.runs < 1 or self.validation_runs < 1:
            raise UsageError("runs and validation_runs must be >= 1")
        if self.split not in SPLITS:
            raise UsageError(f"split must be one of {SPLITS}")
        if self.resample not in RESAMPLE_MODES:
            raise UsageError(f"resample must be one of {RESAMPLE_MODES}")
        if self.classifier not in embedding.CLASSIFIER_MODELS:
            raise UsageError(f"classifier must be one of {embedding.CLASSIFIER_MODELS}")
        for grid_name in ("alpha_grid", "shrinkage_grid", "regularizer_grid", "dimension_grid"):
            if not getattr(self, grid_name):
                raise UsageError(f"{grid_name} is empty")
        if self.workers < 1:
            raise UsageError("workers must be >= 1")
        if not isinstance(self.hyperparameters, dict):
            raise UsageError("hyperparameters must map method name to a param dict")
        for m, p in self.hyperparameters.items():
            if m not in METHODS:
                raise UsageError(f"hyperparameters given for unknown method {m!r}")
            for key in p:
                if key not in _PARAM_KEYS:
                    raise UsageError(
                        f"unknown hyperparameter {key!r} for {m}; expected subset of {_PARAM_KEYS}"
                    )
        # constructing these validates the nested settings early
        propagate.PropagationConfig(epsilon=self.epsilon, max_iters=self.max_iters)
        try:
            embedding.EmbeddingConfig(**{k: v for k, v in self.embedding.items() if k != "seed"})
        except TypeError as exc:
            raise UsageError(f"bad embedding settings: {exc}") from exc

    @classmethod
    def from_dict(cls, obj):
        if not isinstance(obj, dict):
            raise UsageError("experiment spec must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise UsageError(f"unknown spec keys: {sorted(unknown)}")
        try:
            return cls(**obj)
        except TypeError as exc:
            raise UsageError(str(exc)) from exc

    def to_dict(self):
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else v
        return out


def _check_level(level):
    if isinstance(level, bool):
        raise UsageError(f"masking level must be a fraction or count, got {level!r}")
    if isinstance(level, int):
        if level < 1:
            raise UsageError(f"masking count must be >= 1, got {level}")
    elif isinstance(level, float):
        if not (0.0 < level < 1.0):
            raise UsageError(f"masking fraction must lie in (0, 1), got {level}")
    else:
        raise UsageError(f"masking level must be a fraction or count, got {level!r}")


def load_base_dataset(ref):
    """Materialize the dataset a spec (or raw reference dict) points at."""
    if isinstance(ref, ExperimentSpec):
        ref = ref.dataset
    kind = ref.get("kind")
    try:
        if kind == "synthetic":
            params = {k: v for k, v in ref.items() if k != "kind"}
            unknown = set(params) - set(_SYNTHETIC_KEYS)
            if unknown:
                raise UsageError(f"unknown synthetic dataset keys: {sorted(unknown)}")
            return ds_mod.make_synthetic(**params)
        path = ref.get("path")
        if not path:
            raise UsageError(f"dataset kind {kind!r} requires a 'path'")
        if kind == "cora":
            return ds_mod.load_cora(path)
        if kind == "pubmed":
            return ds_mod.load_pubmed(path)
        if kind == "container":
            return ds_mod.load_dataset(path)
    except OSError as exc:
        raise DataError(f"cannot read dataset: {exc}") from exc
    raise UsageError(f"unknown dataset kind {kind!r}; expected one of {DATASET_KINDS}")


def default_params(spec, method):
    """First grid point of every axis the method uses."""
    p = {"alpha": spec.alpha_grid[0], "shrinkage": spec.shrinkage_grid[0]}
    if method in ("iterative-pos", "iterative-posneg"):
        p["regularizer"] = spec.regularizer_grid[0]
    if method == "node2vec":
        p["dimension"] = spec.dimension_grid[0]
    return p


def _grid_points(spec, method):
    axes = [("alpha", spec.alpha_grid), ("shrinkage", spec.shrinkage_grid)]
    if method in ("iterative-pos", "iterative-posneg"):
        axes.append(("regularizer", spec.regularizer_grid))
    if method == "node2vec":
        axes.append(("dimension", spec.dimension_grid))
    names = [a[0] for a in axes]
    return [dict(zip(names, values)) for values in itertools.product(*(a[1] for a in axes))]


def _cell_seeds(master_seed, domain, level_idx, run_idx, resample):
    """Derive (subsample_seed, mask_seed, per-method seeds) for one run.

    Data seeds do not depend on the method, so all methods score the same
    subsample and mask within a run. With resample='once' the subsample
    seed is pinned to run 0 while masks still vary per run.
    """
    ss = np.random.SeedSequence(master_seed, spawn_key=(domain, level_idx, run_idx))
    st = ss.generate_state(2 + len(METHODS), dtype=np.uint64)
    if resample == "once" and run_idx != 0:
        first = np.random.SeedSequence(master_seed, spawn_key=(domain, level_idx, 0))
        sub_seed = int(first.generate_state(1, dtype=np.uint64)[0])
    else:
        sub_seed = int(st[0])
    mask_seed = int(st[1])
    method_seeds = {m: int(st[2 + i]) for i, m in enumerate(METHODS)}
    return sub_seed, mask_seed, method_seeds


def _solve_state(base, spec, method, level, level_idx, run_idx, params, domain):
    """Run one pipeline instance up to a converged LabelState.

    Returns (sub, mask, state, labels_idx, info); raises CipropError
    subclasses on failure.
    """
    sub_seed, mask_seed, method_seeds = _cell_seeds(
        spec.master_seed, domain, level_idx, run_idx, spec.resample
    )
    method_seed = method_seeds[method]
    info = {
        "subsample_seed": sub_seed,
        "mask_seed": mask_seed,
        "method_seed": method_seed,
    }
    sub = base
    if spec.subset_size and spec.subset_size < base.n_nodes:
        sub = ds_mod.subsample(base, spec.subset_size, seed=sub_seed, stratified=spec.stratified)
    sub = ds_mod.normalize(sub, spec.normalization)
    P = cigraph.recover(
        sub.X,
        shrinkage=params["shrinkage"],
        correlation_mode=spec.correlation,
        zero_threshold=spec.zero_threshold,
    )
    if isinstance(level, float):
        mask = ds_mod.mask_labels(sub, fraction=level, seed=mask_seed)
    else:
        mask = ds_mod.mask_labels(sub, count=level, seed=mask_seed)
    labels_idx = sub.label_indices()
    c = sub.n_categories
    tcfg = transition.TransitionConfig(alpha=params["alpha"])

    if method == "node2vec":
        Pm = transition.build_maxnorm(P, tcfg)
        ekw = dict(spec.embedding)
        ekw.pop("seed", None)
        if "dimension" in params:
            ekw["dimension"] = params["dimension"]
        ecfg = embedding.EmbeddingConfig(seed=method_seed, **ekw)
        corpus = embedding.random_walks(Pm, ecfg)
        emb = embedding.train_embeddings(corpus, ecfg, n_nodes=sub.n_nodes)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")  # per-run class-absence chatter
            clf, report = embedding.fit_classifier(
                emb,
                mask,
                labels_idx,
                model=spec.classifier,
                seed=method_seed % (2**31),
                n_categories=c,
            )
        proba = embedding.predict_unknown(clf, emb, mask)
        n = np.zeros((sub.n_nodes, c), dtype=np.float64)
        n[mask.known, labels_idx[mask.known]] = 1.0
        n[mask.unknown] = proba
        state = propagate.LabelState(n=n, mask=mask)
        info.update(iterations=report.epochs_run, converged=report.converged, mu=None)
        return sub, mask, state, labels_idx, info

    state0 = propagate.init_state(mask, c, known_labels=labels_idx)
    if method in ("iterative-exp", "analytical-exp"):
        Pe = transition.build_exp(P, tcfg)
        if method == "iterative-exp":
            pcfg = propagate.PropagationConfig(
                epsilon=spec.epsilon, max_iters=spec.max_iters, regularizer="none"
            )
            res = propagate.iterate_exp(Pe, state0, pcfg)
            info.update(iterations=res.iterations, converged=res.converged, mu=None)
            return sub, mask, res.state, labels_idx, info
        res = propagate.analytical(Pe, state0)
        diag = res.diagnostics
        info.update(
            iterations=diag.iterations_equivalent,
            converged=True,
            mu=diag.mu,
            solve_residual=diag.solve_residual,
        )
        return sub, mask, res.state, labels_idx, info

    if method in ("iterative-pos", "iterative-posneg"):
        Ppos, Pneg = transition.split_pos_neg(P)
        pcfg = propagate.PropagationConfig(
            epsilon=spec.epsilon,
            max_iters=spec.max_iters,
            regularizer=params.get("regularizer", spec.regularizer_grid[0]),
        )
        if method == "iterative-pos":
            res = propagate.iterate_pos(Ppos, state0, pcfg)
        else:
            res = propagate.iterate_posneg(Ppos, Pneg, state0, pcfg)
        info.update(
            iterations=res.iterations,
            converged=res.converged,
            mu=None,
            stalled_rows=len(res.stalled_rows),
        )
        return sub, mask, res.state, labels_idx, info

    raise UsageError(f"unknown method {method!r}")


def run_cell(spec, method, level, run_idx, params=None, base=None, level_idx=None, domain=None):
    """Execute one run of one cell and score it; never raises on a failed
    run — the record carries an ``error`` entry instead.

    Accuracy is argmax accuracy over the unknown nodes only. The record
    stores every prediction as [node_id, true_index, predicted_index] so
    aggregates are recomputable.
    """
    if base is None:
        base = load_base_dataset(spec)
    if params is None:
        params = {**default_params(spec, method), **spec.hyperparameters.get(method, {})}
    if level_idx is None:
        level_idx = spec.masking.index(level) if level in spec.masking else 0
    if domain is None:
        domain = _DOMAIN[spec.split]
    t0 = time.perf_counter()
    record = {"run": run_idx, "params": dict(params)}
    try:
        sub, mask, state, labels_idx, info = _solve_state(
            base, spec, method, level, level_idx, run_idx, params, domain
        )
    except CipropError as exc:
        record.update(error=str(exc), runtime_s=time.perf_counter() - t0)
        return record
    sel = propagate.select(state)
    truth = labels_idx[mask.unknown]
    correct = int(np.sum(sel.predictions == truth))
    n_unknown = int(mask.unknown.size)
    record.update(info)
    record.update(
        n_unknown=n_unknown,
        correct=correct,
        accuracy=correct / n_unknown if n_unknown else 1.0,
        predictions=[
            [sub.node_ids[node], int(t), int(p)]
            for node, t, p in zip(mask.unknown, truth, sel.predictions)
        ],
        runtime_s=time.perf_counter() - t0,
    )
    return record


def _run_jobs(jobs, workers):
    """Execute keyed no-arg callables, optionally on a thread pool.

    Results are keyed, so scheduling order never affects the report.
    """
    if workers <= 1:
        return {key: job() for key, job in jobs}
    out = {}
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {key: pool.submit(job) for key, job in jobs}
        for key, fut in futures.items():
            out[key] = fut.result()
    return out


def _aggregate(runs):
    accs = [r["accuracy"] for r in runs if "error" not in r]
    n_errors = len(runs) - len(accs)
    mean = float(np.mean(accs)) if accs else None
    std = float(np.std(accs, ddof=1)) if len(accs) > 1 else 0.0
    return mean, std, n_errors


def grid_search(spec, base=None, methods=None):
    """Pick the best grid point per method by mean validation accuracy.

    Evaluation runs live in a dedicated seed domain, disjoint from both
    reporting splits, and average over every masking level in the spec.
    Ties resolve to the lowest grid index.
    """
    if base is None:
        base = load_base_dataset(spec)
    methods = tuple(methods) if methods is not None else spec.methods
    t0 = time.perf_counter()
    domain = _DOMAIN["tuning"]
    choices, results = {}, {}
    for method in methods:
        points = _grid_points(spec, method)
        jobs = []
        for pi, params in enumerate(points):
            for li, level in enumerate(spec.masking):
                for r in range(spec.validation_runs):
                    jobs.append(
                        (
                            (pi, li, r),
                            partial(
                                run_cell,
                                spec,
                                method,
                                level,
                                r,
                                params=params,
                                base=base,
                                level_idx=li,
                                domain=domain,
                            ),
                        )
                    )
        records = _run_jobs(jobs, spec.workers)
        evals = []
        for pi, params in enumerate(points):
            runs = [records[(pi, li, r)] for li in range(len(spec.masking)) for r in range(spec.validation_runs)]
            mean, std, n_errors = _aggregate(runs)
            evals.append(
                {
                    "params": params,
                    "mean_accuracy": mean,
                    "std_accuracy": std,
                    "n_errors": n_errors,
                }
            )
        best_idx, best = None, -np.inf
        for pi, ev in enumerate(evals):
            score = ev["mean_accuracy"]
            if score is not None and score > best:
                best_idx, best = pi, score
        if best_idx is None:
            raise DataError(f"every validation run failed for method {method!r}")
        choices[method] = points[best_idx]
        results[method] = evals
    return {
        "kind": "grid-search",
        "choices": choices,
        "results": results,
        "validation_runs": spec.validation_runs,
        "masking": list(spec.masking),
        "runtime_s": time.perf_counter() - t0,
    }


def _resolve_hyperparameters(spec, base):
    """Tuned-or-overridden params per method, plus the tuning report."""
    to_tune = [m for m in spec.methods if m not in spec.hyperparameters]
    tuning = grid_search(spec, base=base, methods=to_tune) if to_tune else None
    choices = dict(tuning["choices"]) if tuning else {}
    for m in spec.methods:
        if m in spec.hyperparameters:
            choices[m] = {**default_params(spec, m), **spec.hyperparameters[m]}
    return choices, tuning


def compare_methods(spec, base=None):
    """Full cross of methods x masking levels x runs; Table-shaped report."""
    if base is None:
        base = load_base_dataset(spec)
    t0 = time.perf_counter()
    choices, tuning = _resolve_hyperparameters(spec, base)
    domain = _DOMAIN[spec.split]
    jobs = []
    for method in spec.methods:
        for li, level in enumerate(spec.masking):
            for r in range(spec.runs):
                jobs.append(
                    (
                        (method, li, r),
                        partial(
                            run_cell,
                            spec,
                            method,
                            level,
                            r,
                            params=choices[method],
                            base=base,
                            level_idx=li,
                            domain=domain,
                        ),
                    )
                )
    records = _run_jobs(jobs, spec.workers)
    cells = []
    for method in spec.methods:
        for li, level in enumerate(spec.masking):
            runs = [records[(method, li, r)] for r in range(spec.runs)]
            mean, std, n_errors = _aggregate(runs)
            cells.append(
                {
                    "method": method,
                    "level": level,
                    "mean_accuracy": mean,
                    "std_accuracy": std,
                    "n_errors": n_errors,
                    "runs": runs,
                }
            )
    return {
        "kind": "compare",
        "spec": spec.to_dict(),
        "dataset": _dataset_summary(base),
        "hyperparameters": choices,
        "tuning": tuning,
        "cells": cells,
        "runtime_s": time.perf_counter() - t0,
    }


def masking_sweep(spec, method, counts, base=None):
    """Accuracy as a function of the number of masked nodes.

    ``counts`` are absolute masked-node counts, each swept with
    ``spec.runs`` runs at tuned (or overridden) hyperparameters.
    """
    counts = [int(c) for c in counts]
    if not counts:
        raise UsageError("masking sweep needs at least one count")
    for c in counts:
        if c < 1:
            raise UsageError(f"masked count must be >= 1, got {c}")
    if method not in METHODS:
        raise UsageError(f"unknown method {method!r}")
    if base is None:
        base = load_base_dataset(spec)
    t0 = time.perf_counter()
    if method in spec.hyperparameters:
        params = {**default_params(spec, method), **spec.hyperparameters[method]}
        tuning = None
    else:
        tuning = grid_search(spec, base=base, methods=[method])
        params = tuning["choices"][method]
    domain = _DOMAIN[spec.split]
    jobs = []
    for ci, count in enumerate(counts):
        for r in range(spec.runs):
            jobs.append(
                (
                    (ci, r),
                    partial(
                        run_cell,
                        spec,
                        method,
                        count,
                        r,
                        params=params,
                        base=base,
                        level_idx=ci,
                        domain=domain,
                    ),
                )
            )
    records = _run_jobs(jobs, spec.workers)
    points = []
    for ci, count in enumerate(counts):
        runs = [records[(ci, r)] for r in range(spec.runs)]
        mean, std, n_errors = _aggregate(runs)
        points.append(
            {
                "count": count,
                "mean_accuracy": mean,
                "std_accuracy": std,
                "n_errors": n_errors,
                "runs": runs,
            }
        )
    return {
        "kind": "masking-sweep",
        "spec": spec.to_dict(),
        "dataset": _dataset_summary(base),
        "method": method,
        "params": params,
        "tuning": tuning,
        "points": points,
        "runtime_s": time.perf_counter() - t0,
    }


def threshold_sweep(spec, method, thresholds, base=None):
    """Coverage/accuracy trade-off across confidence thresholds.

    Each run converges once at the first masking level of the spec; every
    threshold is then applied to the same converged state. Accuracy is
    over the predicted (non-abstained) subset; coverage is the predicted
    fraction.
    """
    thresholds = [float(t) for t in thresholds]
    if not thresholds:
        raise UsageError("threshold sweep needs at least one threshold")
    for t in thresholds:
        if not (0.0 < t <= 1.0):
            raise UsageError(f"thresholds must lie in (0, 1], got {t}")
    if method not in METHODS:
        raise UsageError(f"unknown method {method!r}")
    if base is None:
        base = load_base_dataset(spec)
    c = base.n_categories
    low = min(thresholds)
    if low < 1.0 / c - 1e-12:
        raise UsageError(
            f"threshold {low} is below 1/C = {1.0 / c:.6g} and can never abstain"
        )
    t0 = time.perf_counter()
    if method in spec.hyperparameters:
        params = {**default_params(spec, method), **spec.hyperparameters[method]}
        tuning = None
    else:
        tuning = grid_search(spec, base=base, methods=[method])
        params = tuning["choices"][method]
    domain = _DOMAIN[spec.split]
    level = spec.masking[0]

    def one_run(run_idx):
        rec = {"run": run_idx}
        try:
            sub, mask, state, labels_idx, info = _solve_state(
                base, spec, method, level, 0, run_idx, params, domain
            )
        except CipropError as exc:
            rec["error"] = str(exc)
            return rec
        truth = labels_idx[mask.unknown]
        per_threshold = []
        for t in thresholds:
            sel = propagate.select(
                state, propagate.SelectionStrategy(mode="confidence", threshold=t)
            )
            predicted = sel.predictions >= 0
            n_predicted = int(predicted.sum())
            n_correct = int(np.sum(sel.predictions[predicted] == truth[predicted]))
            per_threshold.append(
                {
                    "threshold": t,
                    "coverage": sel.coverage,
                    "n_predicted": n_predicted,
                    "n_correct": n_correct,
                    "accuracy": n_correct / n_predicted if n_predicted else None,
                }
            )
        rec.update(info)
        rec["thresholds"] = per_threshold
        return rec

    jobs = [((r,), partial(one_run, r)) for r in range(spec.runs)]
    records = _run_jobs(jobs, spec.workers)
    runs = [records[(r,)] for r in range(spec.runs)]
    points = []
    for ti, t in enumerate(thresholds):
        covs, accs = [], []
        for rec in runs:
            if "error" in rec:
                continue
            entry = rec["thresholds"][ti]
            covs.append(entry["coverage"])
            if entry["accuracy"] is not None:
                accs.append(entry["accuracy"])
        points.append(
            {
                "threshold": t,
                "mean_coverage": float(np.mean(covs)) if covs else None,
                "mean_accuracy": float(np.mean(accs)) if accs else None,
                "std_accuracy": float(np.std(accs, ddof=1)) if len(accs) > 1 else 0.0,
                "n_runs_predicting": len(accs),
            }
        )
    n_errors = sum(1 for rec in runs if "error" in rec)
    return {
        "kind": "threshold-sweep",
        "spec": spec.to_dict(),
        "dataset": _dataset_summary(base),
        "method": method,
        "level": level,
        "params": params,
        "tuning": tuning,
        "points": points,
        "n_errors": n_errors,
        "runs": runs,
        "runtime_s": time.perf_counter() - t0,
    }


def _dataset_summary(base):
    return {
        "source": base.source,
        "n_nodes": base.n_nodes,
        "n_samples": base.n_samples,
        "n_categories": base.n_categories,
        "category_names": list(base.category_names),
    }


# ---------------------------------------------------------------------------
# Report serialization


def write_report(report, path, fmt=None):
    """Write a harness report as JSON (full) or CSV (flat, plot-ready)."""
    path = Path(path)
    if fmt is None:
        fmt = "csv" if path.suffix.lower() == ".csv" else "json"
    if fmt == "json":
        path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    elif fmt == "csv":
        rows, header = _csv_rows(report)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
    else:
        raise UsageError(f"unknown report format {fmt!r} (use json or csv)")
    return path


def _csv_rows(report):
    kind = report.get("kind")
    if kind == "compare":
        header = ["method", "level", "mean_accuracy", "std_accuracy", "n_errors", "runs"]
        rows = [
            [c["method"], c["level"], c["mean_accuracy"], c["std_accuracy"], c["n_errors"], len(c["runs"])]
            for c in report["cells"]
        ]
    elif kind == "masking-sweep":
        header = ["count", "mean_accuracy", "std_accuracy", "n_errors"]
        rows = [
            [p["count"], p["mean_accuracy"], p["std_accuracy"], p["n_errors"]]
            for p in report["points"]
        ]
    elif kind == "threshold-sweep":
        header = ["threshold", "mean_coverage", "mean_accuracy", "std_accuracy", "n_runs_predicting"]
        rows = [
            [p["threshold"], p["mean_coverage"], p["mean_accuracy"], p["std_accuracy"], p["n_runs_predicting"]]
            for p in report["points"]
        ]
    elif kind == "grid-search":
        header = ["method", "alpha", "shrinkage", "regularizer", "dimension", "mean_accuracy", "std_accuracy", "n_errors"]
        rows = []
        for method, evals in report["results"].items():
            for ev in evals:
                p = ev["params"]
                rows.append(
                    [
                        method,
                        p.get("alpha"),
                        p.get("shrinkage"),
                        p.get("regularizer", ""),
                        p.get("dimension", ""),
                        ev["mean_accuracy"],
                        ev["std_accuracy"],
                        ev["n_errors"],
                    ]
                )
    else:
        raise UsageError(f"cannot flatten report kind {kind!r} to CSV")
    return rows, header

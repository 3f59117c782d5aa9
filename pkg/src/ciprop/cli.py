"""Command-line interface.

Subcommands: recover, propagate, embed, experiment, sweep-mask,
sweep-threshold. Exit codes: 0 success, 1 usage error, 2 data error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__, cigraph, containers, embedding, harness, propagate, transition
from . import dataset as ds_mod
from .errors import DataError, NumericalError, UsageError


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on bad flags; the contract wants 1
    def error(self, message):
        raise UsageError(message)


def _add_dataset_args(p):
    p.add_argument(
        "--kind",
        required=True,
        choices=harness.DATASET_KINDS,
        help="dataset source",
    )
    p.add_argument("--data", help="path to the dataset file (all kinds except synthetic)")
    p.add_argument("--subset-size", type=int, default=0, help="subsample to this many nodes (0 = all)")
    p.add_argument("--stratified", action="store_true", help="stratify the subsample by category")
    p.add_argument(
        "--normalization",
        default="minmax",
        choices=("minmax", "mean", "meancenter", "none"),
    )


def _load_cli_dataset(args):
    if args.kind == "synthetic":
        ref = {"kind": "synthetic", "seed": args.seed}
    else:
        if not args.data:
            raise UsageError(f"--data is required for --kind {args.kind}")
        ref = {"kind": args.kind, "path": args.data}
    ds = harness.load_base_dataset(ref)
    if args.subset_size and args.subset_size < ds.n_nodes:
        ds = ds_mod.subsample(ds, args.subset_size, seed=args.seed, stratified=args.stratified)
    return ds_mod.normalize(ds, args.normalization)


def _cmd_recover(args):
    ds = _load_cli_dataset(args)
    P = cigraph.recover(
        ds.X,
        shrinkage=args.shrinkage,
        correlation_mode=args.correlation,
        zero_threshold=args.zero_threshold,
    )
    out = Path(args.out)
    fmt = _resolve_format(out, args.format, ("json", "cim"))
    if fmt == "cim" and out.suffix.lower() != ".cim":
        out = out.with_suffix(".cim")
    containers.save_matrix(out, P.P, kind="partial-correlation", node_ids=ds.node_ids)
    print(f"wrote {out} ({ds.n_nodes} nodes)")
    return 0


def _load_pcorr(path):
    matrix, meta = containers.load_matrix(path)
    kind = meta.get("kind")
    if kind not in (None, "partial-correlation"):
        raise DataError(f"{path}: expected a partial-correlation matrix, found kind {kind!r}")
    node_ids = meta.get("node_ids")
    if node_ids is None:
        node_ids = [str(i) for i in range(matrix.shape[0])]
    return cigraph.PartialCorrelationMatrix(P=matrix), list(node_ids)


def _load_labels(path, node_ids):
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(obj, dict) or obj.get("format") != "ciprop-labels":
        raise DataError(f"{path}: expected a ciprop-labels file")
    categories = obj.get("categories")
    labels = obj.get("labels")
    if not isinstance(categories, list) or len(categories) < 2:
        raise DataError(f"{path}: 'categories' must list at least 2 category names")
    if not isinstance(labels, dict) or not labels:
        raise DataError(f"{path}: 'labels' must map node ids to categories, and be non-empty")
    index = {n: i for i, n in enumerate(node_ids)}
    cat_index = {str(c): i for i, c in enumerate(categories)}
    if len(cat_index) != len(categories):
        raise DataError(f"{path}: duplicate category names")
    known_labels = {}
    for node, cat in labels.items():
        if node not in index:
            raise DataError(f"{path}: labeled node {node!r} is not in the matrix")
        if str(cat) not in cat_index:
            raise DataError(f"{path}: node {node!r} has unknown category {cat!r}")
        known_labels[index[node]] = cat_index[str(cat)]
    known = np.array(sorted(known_labels), dtype=np.int64)
    unknown = np.setdiff1d(np.arange(len(node_ids)), known)
    mask = ds_mod.KnownMask(known=known, unknown=unknown)
    return mask, known_labels, [str(c) for c in categories]


def _predictions_payload(node_ids, categories, state, sel, extra):
    abstained = {int(n) for n, p in zip(sel.unknown, sel.predictions) if p < 0}
    chosen = {int(n): int(p) for n, p in zip(sel.unknown, sel.predictions)}
    conf = {int(n): float(c) for n, c in zip(sel.unknown, sel.confidence)}
    known_set = set(state.mask.known.tolist())
    nodes = []
    for i, node in enumerate(node_ids):
        known = i in known_set
        if known:
            cat = int(np.argmax(state.n[i]))
        else:
            cat = chosen[i] if chosen[i] >= 0 else None
        nodes.append(
            {
                "node_id": node,
                "known": known,
                "category": categories[cat] if cat is not None else None,
                "confidence": None if known else conf[i],
                "abstained": (not known) and i in abstained,
                "distribution": [float(x) for x in state.n[i]],
            }
        )
    payload = {
        "format": "ciprop-predictions",
        "version": 1,
        "categories": list(categories),
        "coverage": sel.coverage,
        "nodes": nodes,
    }
    payload.update(extra)
    return payload


def _resolve_format(out, fmt, choices):
    """Explicit --format wins; otherwise the --out suffix picks, else json."""
    if fmt:
        return fmt
    suffix = Path(out).suffix.lower().lstrip(".")
    return suffix if suffix in choices else "json"


def _write_predictions(payload, out, fmt):
    out = Path(out)
    if fmt == "json":
        out.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    else:
        categories = payload["categories"]
        with open(out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["node_id", "known", "category", "confidence", "abstained"]
                + [f"p_{c}" for c in categories]
            )
            for node in payload["nodes"]:
                writer.writerow(
                    [
                        node["node_id"],
                        int(node["known"]),
                        node["category"] if node["category"] is not None else "",
                        "" if node["confidence"] is None else node["confidence"],
                        int(node["abstained"]),
                    ]
                    + node["distribution"]
                )
    print(f"wrote {out}")


def _selection_strategy(args):
    if args.threshold is None:
        return propagate.SelectionStrategy()
    return propagate.SelectionStrategy(mode="confidence", threshold=args.threshold)


def _cmd_propagate(args):
    P, node_ids = _load_pcorr(args.matrix)
    mask, known_labels, categories = _load_labels(args.labels, node_ids)
    state0 = propagate.init_state(mask, len(categories), known_labels=known_labels)
    tcfg = transition.TransitionConfig(alpha=args.alpha)
    pcfg = propagate.PropagationConfig(
        epsilon=args.epsilon, max_iters=args.max_iters, regularizer=args.regularizer
    )
    extra = {"method": args.method, "alpha": args.alpha}
    if args.method in ("iterative-exp", "analytical-exp"):
        Pe = transition.build_exp(P, tcfg)
        if args.method == "iterative-exp":
            res = propagate.iterate_exp(Pe, state0, pcfg)
            state = res.state
            extra.update(iterations=res.iterations, converged=res.converged)
        else:
            res = propagate.analytical(Pe, state0)
            state = res.state
            extra.update(
                iterations=res.diagnostics.iterations_equivalent,
                converged=True,
                mu=res.diagnostics.mu,
                solve_residual=res.diagnostics.solve_residual,
            )
    else:
        Ppos, Pneg = transition.split_pos_neg(P)
        if args.method == "iterative-pos":
            res = propagate.iterate_pos(Ppos, state0, pcfg)
        else:
            res = propagate.iterate_posneg(Ppos, Pneg, state0, pcfg)
        state = res.state
        extra.update(
            iterations=res.iterations,
            converged=res.converged,
            regularizer=args.regularizer,
            stalled_rows=len(res.stalled_rows),
        )
    sel = propagate.select(state, _selection_strategy(args))
    payload = _predictions_payload(node_ids, categories, state, sel, extra)
    _write_predictions(payload, args.out, _resolve_format(args.out, args.format, ("json", "csv")))
    return 0


def _cmd_embed(args):
    P, node_ids = _load_pcorr(args.matrix)
    tcfg = transition.TransitionConfig(alpha=args.alpha)
    Pm = transition.build_maxnorm(P, tcfg)
    ecfg = embedding.EmbeddingConfig(
        dimension=args.dimension,
        walk_length=args.walk_length,
        walks_per_node=args.walks_per_node,
        p=args.p,
        q=args.q,
        window=args.window,
        negative_samples=args.negative_samples,
        epochs=args.epochs,
        learning_rate=args.learning_rate,
        seed=args.seed,
    )
    corpus = embedding.random_walks(Pm, ecfg)
    emb = embedding.train_embeddings(corpus, ecfg, n_nodes=len(node_ids))
    if not args.labels:
        out = Path(args.out)
        fmt = _resolve_format(out, args.format, ("json", "cim"))
        if fmt == "csv":
            raise UsageError("an embeddings container is json or cim; csv needs --labels")
        if fmt == "cim" and out.suffix.lower() != ".cim":
            out = out.with_suffix(".cim")
        containers.save_matrix(out, emb.vectors, kind="embeddings", node_ids=node_ids)
        print(f"wrote {out} ({emb.n_nodes} x {emb.dimension})")
        return 0
    mask, known_labels, categories = _load_labels(args.labels, node_ids)
    labels_full = np.zeros(len(node_ids), dtype=np.int64)
    for i, cat in known_labels.items():
        labels_full[i] = cat
    clf, report = embedding.fit_classifier(
        emb,
        mask,
        labels_full,
        model=args.model,
        seed=args.seed,
        n_categories=len(categories),
    )
    proba = embedding.predict_unknown(clf, emb, mask)
    n = np.zeros((len(node_ids), len(categories)), dtype=np.float64)
    n[mask.known, [known_labels[int(i)] for i in mask.known]] = 1.0
    n[mask.unknown] = proba
    state = propagate.LabelState(n=n, mask=mask)
    sel = propagate.select(state, _selection_strategy(args))
    extra = {
        "method": "node2vec",
        "alpha": args.alpha,
        "model": args.model,
        "final_loss": report.final_loss,
        "epochs_run": report.epochs_run,
        "converged": report.converged,
    }
    payload = _predictions_payload(node_ids, categories, state, sel, extra)
    fmt = _resolve_format(args.out, args.format, ("json", "csv"))
    if fmt == "cim":
        raise UsageError("predictions are json or csv; cim is for embedding containers")
    _write_predictions(payload, args.out, fmt)
    return 0


def load_spec(path, overrides=None):
    """Read, schema-validate and construct an ExperimentSpec."""
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON: {exc}") from exc
    except OSError as exc:
        raise DataError(f"cannot read spec: {exc}") from exc
    schema = json.loads(
        resources.files("ciprop").joinpath("schemas/experiment-spec.schema.json").read_text()
    )
    try:
        jsonschema.validate(obj, schema)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "(top level)"
        raise UsageError(f"{path}: invalid spec at {where}: {exc.message}") from exc
    if overrides:
        obj.update(overrides)
    return harness.ExperimentSpec.from_dict(obj)


def _spec_overrides(args):
    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    for name in ("runs", "validation_runs", "workers", "split", "resample"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    return overrides


def _cmd_experiment(args):
    spec = load_spec(args.spec, _spec_overrides(args))
    report = harness.compare_methods(spec)
    harness.write_report(report, args.out, args.format)
    for cell in report["cells"]:
        mean = cell["mean_accuracy"]
        shown = "n/a" if mean is None else f"{mean:.4f}"
        print(
            f"{cell['method']:>18s}  level={cell['level']}: "
            f"accuracy {shown} +/- {cell['std_accuracy']:.4f} "
            f"({cell['n_errors']} errors)"
        )
    print(f"wrote {args.out}")
    return 0


def _parse_counts(text):
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) not in (2, 3):
            raise UsageError(f"bad count range {text!r}; use start:stop[:step]")
        try:
            nums = [int(p) for p in parts]
        except ValueError as exc:
            raise UsageError(f"bad count range {text!r}: {exc}") from exc
        counts = list(range(*nums))
        if not counts:
            raise UsageError(f"count range {text!r} is empty")
        return counts
    try:
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise UsageError(f"bad counts {text!r}: {exc}") from exc


def _cmd_sweep_mask(args):
    spec = load_spec(args.spec, _spec_overrides(args))
    counts = _parse_counts(args.counts)
    report = harness.masking_sweep(spec, args.method, counts)
    harness.write_report(report, args.out, args.format)
    for point in report["points"]:
        mean = point["mean_accuracy"]
        shown = "n/a" if mean is None else f"{mean:.4f}"
        print(f"masked={point['count']:>5d}: accuracy {shown}")
    print(f"wrote {args.out}")
    return 0


def _cmd_sweep_threshold(args):
    spec = load_spec(args.spec, _spec_overrides(args))
    try:
        thresholds = [float(p) for p in args.thresholds.split(",") if p.strip()]
    except ValueError as exc:
        raise UsageError(f"bad thresholds {args.thresholds!r}: {exc}") from exc
    report = harness.threshold_sweep(spec, args.method, thresholds)
    harness.write_report(report, args.out, args.format)
    for point in report["points"]:
        acc = point["mean_accuracy"]
        cov = point["mean_coverage"]
        print(
            f"threshold={point['threshold']:.3f}: "
            f"coverage {'n/a' if cov is None else f'{cov:.3f}'}, "
            f"accuracy {'n/a' if acc is None else f'{acc:.4f}'}"
        )
    print(f"wrote {args.out}")
    return 0


def build_parser():
    parser = _Parser(prog="ciprop", description="Knowledge propagation over conditional independence graphs.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("recover", parents=[], help="recover a partial correlation matrix from data")
    _add_dataset_args(p)
    p.add_argument("--correlation", default="pearson", choices=("pearson", "spearman"))
    p.add_argument("--shrinkage", type=float, default=0.1, help="identity shrinkage weight in [0,1]")
    p.add_argument("--zero-threshold", type=float, default=0.0, help="zero out |P_ij| below this")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output matrix container (.json or .cim)")
    p.add_argument("--format", choices=("json", "cim"), help="defaults to the --out suffix, else json")
    p.set_defaults(func=_cmd_recover)

    p = sub.add_parser("propagate", help="propagate known labels over a recovered matrix")
    p.add_argument("--matrix", required=True, help="partial-correlation matrix container")
    p.add_argument("--labels", required=True, help="ciprop-labels JSON file with the known labels")
    p.add_argument(
        "--method",
        default="iterative-posneg",
        choices=("iterative-exp", "iterative-pos", "iterative-posneg", "analytical-exp"),
    )
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--regularizer", default="kl", choices=propagate.REGULARIZERS)
    p.add_argument("--epsilon", type=float, default=1e-6)
    p.add_argument("--max-iters", type=int, default=1000)
    p.add_argument("--threshold", type=float, help="confidence threshold; omit for plain argmax")
    p.add_argument("--seed", type=int, default=0, help="accepted for uniformity; propagation is deterministic")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("json", "csv"), help="defaults to the --out suffix, else json")
    p.set_defaults(func=_cmd_propagate)

    p = sub.add_parser("embed", help="node2vec embeddings over a recovered matrix, optionally classifying")
    p.add_argument("--matrix", required=True, help="partial-correlation matrix container")
    p.add_argument("--labels", help="known labels; when given, predicts like `propagate`")
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--dimension", type=int, default=64)
    p.add_argument("--walk-length", type=int, default=20)
    p.add_argument("--walks-per-node", type=int, default=10)
    p.add_argument("--p", type=float, default=1.0, help="return parameter")
    p.add_argument("--q", type=float, default=2.0, help="in-out parameter")
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--negative-samples", type=int, default=5)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--learning-rate", type=float, default=0.025)
    p.add_argument("--model", default="logistic", choices=embedding.CLASSIFIER_MODELS)
    p.add_argument("--threshold", type=float, help="confidence threshold; omit for plain argmax")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("json", "csv", "cim"), help="defaults to the --out suffix, else json")
    p.set_defaults(func=_cmd_embed)

    for name, func, extra_help in (
        ("experiment", _cmd_experiment, "run the full method x masking comparison"),
        ("sweep-mask", _cmd_sweep_mask, "accuracy vs number of masked nodes"),
        ("sweep-threshold", _cmd_sweep_threshold, "coverage/accuracy vs confidence threshold"),
    ):
        p = sub.add_parser(name, help=extra_help)
        p.add_argument("--spec", required=True, help="experiment spec JSON (see packaged schema)")
        if name != "experiment":
            p.add_argument("--method", required=True, choices=harness.METHODS)
        if name == "sweep-mask":
            p.add_argument("--counts", required=True, help="comma list (1,25,50) or range (1:226:25)")
        if name == "sweep-threshold":
            p.add_argument("--thresholds", required=True, help="comma list of thresholds in (0,1]")
        p.add_argument("--seed", type=int, help="override the spec master_seed")
        p.add_argument("--runs", type=int, help="override runs per cell")
        p.add_argument("--validation-runs", type=int, dest="validation_runs")
        p.add_argument("--workers", type=int)
        p.add_argument("--split", choices=harness.SPLITS)
        p.add_argument("--resample", choices=harness.RESAMPLE_MODES)
        p.add_argument("--out", required=True)
        p.add_argument("--format", choices=("json", "csv"), help="defaults to the --out suffix, else json")
        p.set_defaults(func=func)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:  # --help / --version
            return int(exc.code or 0)
        if not getattr(args, "command", None):
            parser.print_help(sys.stderr)
            return 1
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

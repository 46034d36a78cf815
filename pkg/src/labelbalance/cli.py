"""Command-line front end.

Subcommands: stats, plan, expand, eval, compare, select,
simulate-batches, synth.  Primary output (JSON by default, CSV with
--format csv) goes to --output or stdout and is byte-identical across
reruns with the same inputs and flags; warnings and errors go to stderr
as one JSON object per line.  Exit codes: 0 success, 1 domain error,
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings as _warnings
from contextlib import ExitStack, contextmanager

from labelbalance import __version__
from labelbalance import balancer, imbalance, metrics, scores, selection
from labelbalance.dataset import (
    ClassVocabulary,
    LabelDataset,
    compute_priors,
    dataset_from_json,
    dataset_to_json,
    load_segments,
    parse_class_index_csv,
    parse_ontology_json,
    synth_powerlaw,
)
from labelbalance.errors import (
    InsufficientPoints,
    LabelBalanceError,
    LabelBalanceWarning,
    VocabularyMismatch,
    ZeroVariance,
)


class UsageError(Exception):
    """Bad flag combination discovered after argparse."""


DEFAULT_BETA_SWEEP = (0.0, 0.1, 0.2, 0.3, 0.5, 0.7, 1.0)


# --------------------------------------------------------------------------
# I/O helpers
# --------------------------------------------------------------------------


@contextmanager
def _open_out(path: str):
    if path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fp:
            yield fp


def _load_vocab(path: str) -> ClassVocabulary:
    with open(path, "r", encoding="utf-8", newline="") as fp:
        if path.endswith(".json"):
            return parse_ontology_json(fp)
        return parse_class_index_csv(fp)


def _load_dataset(paths, vocab_path) -> LabelDataset:
    if len(paths) == 1 and paths[0].endswith(".json"):
        with open(paths[0], "r", encoding="utf-8") as fp:
            ds = dataset_from_json(fp)
        if vocab_path:
            vocab = _load_vocab(vocab_path)
            if vocab.mids != ds.vocabulary.mids:
                raise VocabularyMismatch(
                    "--vocab does not match the dataset's embedded vocabulary"
                )
        return ds
    if not vocab_path:
        raise UsageError("--vocab is required for segments CSV inputs")
    vocab = _load_vocab(vocab_path)
    with ExitStack() as stack:
        sources = [
            (os.path.basename(p),
             stack.enter_context(open(p, "r", encoding="utf-8", newline="")))
            for p in paths
        ]
        return load_segments(sources, vocab)


def _json_dump(obj, out) -> None:
    json.dump(obj, out, indent=1)
    out.write("\n")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------


def _cmd_stats(args, out) -> None:
    ds = _load_dataset(args.datasets, args.vocab)
    report = imbalance.imbalance_report(ds)
    if args.format == "json":
        _json_dump(imbalance.report_to_obj(report), out)
        return
    obj = imbalance.report_to_obj(report)
    out.write("key,value\n")
    for key in ("imbalance_ratio", "gini_eq3", "gini_mad",
                "n_examples", "n_classes"):
        out.write(f"{key},{_fmt(obj[key])}\n")
    for side in ("head", "tail"):
        stat = obj[side] or {}
        for field in ("index", "mid", "name", "count"):
            out.write(f"{side}_{field},{_fmt(stat.get(field))}\n")


def _parse_sweep(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError:
        raise UsageError(f"bad --beta-sweep value in {text!r}") from None
    if not values:
        raise UsageError("--beta-sweep is empty")
    return values


def _cmd_plan(args, out) -> None:
    if args.beta is not None and args.beta_sweep is not None:
        raise UsageError("give either --beta or --beta-sweep, not both")
    if args.beta is not None:
        betas = [args.beta]
    elif args.beta_sweep is not None:
        betas = _parse_sweep(args.beta_sweep)
    else:
        betas = list(DEFAULT_BETA_SWEEP)
    if not args.allow_extended:
        bad = [b for b in betas if not 0.0 <= b <= 1.0]
        if bad:
            raise UsageError(
                f"beta values {bad} outside [0, 1]; pass --allow-extended"
            )
    if args.plan_out and "{beta}" not in args.plan_out and len(betas) > 1:
        raise UsageError("--plan-out needs a {beta} placeholder for sweeps")
    if args.factors_out and "{beta}" not in args.factors_out and len(betas) > 1:
        raise UsageError("--factors-out needs a {beta} placeholder for sweeps")

    ds = _load_dataset(args.datasets, args.vocab)
    rows = []
    for beta in betas:
        plan = balancer.build_plan(ds, beta)
        stats = balancer.plan_stats(plan)
        row = {"beta": beta}
        row.update(stats)
        if args.plan_out:
            path = args.plan_out.replace("{beta}", "%g" % beta)
            with open(path, "w", encoding="utf-8") as fp:
                fp.write(balancer.plan_to_json(plan))
                fp.write("\n")
            row["plan_file"] = path
        if args.factors_out:
            path = args.factors_out.replace("{beta}", "%g" % beta)
            with open(path, "w", encoding="utf-8") as fp:
                balancer.write_factors_sidecar(plan, fp)
            row["factors_file"] = path
        rows.append(row)

    if args.format == "json":
        _json_dump({"source_fingerprint": ds.fingerprint(), "sweep": rows}, out)
        return
    out.write("beta,imbalance_ratio,gini_eq3,expanded_size\n")
    for row in rows:
        out.write(",".join(_fmt(row[c]) for c in
                           ("beta", "imbalance_ratio", "gini_eq3",
                            "expanded_size")) + "\n")


def _cmd_expand(args, out) -> None:
    with open(args.plan, "r", encoding="utf-8") as fp:
        plan = balancer.plan_from_json(fp)
    indices = balancer.emit_expanded_index(
        plan, shuffle_seed=args.seed, max_size=args.max_size
    )
    for idx in indices:
        out.write(f"{idx}\n")


def _cmd_eval(args, out) -> None:
    labels = _load_dataset(args.labels, args.vocab)
    with open(args.scores, "rb") as fp:
        magic = fp.read(4)
    if magic == scores.SCORES_MAGIC:
        run = scores.read_scores_binary(args.scores, labels, args.run_id)
    else:
        with open(args.scores, "r", encoding="utf-8", newline="") as fp:
            run = scores.read_scores_csv(fp, labels, args.run_id)
    report = metrics.macro_report(run, tie_rule=args.tie_rule)
    if args.format == "json":
        _json_dump(metrics.metric_report_to_obj(report), out)
        return
    out.write(f"# run: {report.run_id}\n")
    out.write(f"# map: {_fmt(report.map)}\n")
    out.write(f"# macro_auc: {_fmt(report.macro_auc)}\n")
    out.write(f"# d_prime: {_fmt(report.d_prime)}\n")
    out.write("index,mid,ap,auc,n_pos\n")
    for e in report.per_class:
        out.write(f"{e.index},{e.mid},{_fmt(e.ap)},{_fmt(e.auc)},{e.n_pos}\n")


def _cmd_compare(args, out) -> None:
    with open(args.report_a, "r", encoding="utf-8") as fp:
        rep_a = metrics.metric_report_from_json(fp)
    with open(args.report_b, "r", encoding="utf-8") as fp:
        rep_b = metrics.metric_report_from_json(fp)
    delta = metrics.per_class_delta(rep_a, rep_b)

    priors = None
    if args.train_labels:
        train = _load_dataset(args.train_labels, args.vocab)
        if train.vocabulary.mids != rep_a.mids:
            raise VocabularyMismatch(
                "training labels vocabulary does not match the reports"
            )
        priors = compute_priors(train)

    regression = None
    if priors is not None:
        try:
            regression = metrics.delta_prior_regression(delta, priors)
        except (InsufficientPoints, ZeroVariance) as exc:
            _warnings.warn(f"regression skipped: {exc}", LabelBalanceWarning,
                           stacklevel=2)

    mean_delta_ap = (
        sum(e.delta_ap for e in delta.deltas) / len(delta.deltas)
        if delta.deltas else None
    )

    if args.format == "json":
        _json_dump({
            "run_a": delta.run_a,
            "run_b": delta.run_b,
            "mean_delta_ap": mean_delta_ap,
            "omitted_classes": list(delta.omitted_classes),
            "regression": (metrics.regression_to_obj(regression)
                           if regression else None),
            "deltas": [
                {"index": e.index, "mid": e.mid, "delta_ap": e.delta_ap,
                 "delta_auc": e.delta_auc}
                for e in delta.deltas
            ],
        }, out)
        return
    out.write("mid,log10_prior,delta_ap,delta_auc\n")
    import math as _math
    for e in delta.deltas:
        log_p = ""
        if priors is not None and priors.priors[e.index] > 0:
            log_p = repr(_math.log10(priors.priors[e.index]))
        out.write(f"{e.mid},{log_p},{_fmt(e.delta_ap)},{_fmt(e.delta_auc)}\n")


def _normalize_metric(name: str) -> str:
    return "".join(ch for ch in name.lower() if ch.isalnum())


def _cmd_select(args, out) -> None:
    traces = []
    for path in args.traces:
        with open(path, "r", encoding="utf-8", newline="") as fp:
            traces.append(selection.parse_trace_csv(
                fp, run_id=os.path.basename(path)))
    if args.metric:
        wanted = _normalize_metric(args.metric)
        traces = [t for t in traces
                  if _normalize_metric(t.metric_name) == wanted]
        if not traces:
            raise UsageError(f"no trace has metric {args.metric!r}")
        pool = traces
    else:
        # default to the sensitivity-index traces when they exist
        dprime = [t for t in traces
                  if _normalize_metric(t.metric_name) == "dprime"]
        pool = dprime or traces

    per_trace = []
    for t in traces:
        try:
            step, value = selection.select_checkpoint(t, args.window)
            per_trace.append({"run_id": t.run_id, "metric": t.metric_name,
                              "step": step, "value": value})
        except selection.TraceTooShort:
            per_trace.append({"run_id": t.run_id, "metric": t.metric_name,
                              "step": None, "value": None})

    run_id, step, value = selection.select_across_runs(pool, args.window)
    if args.format == "json":
        _json_dump({
            "selected": {"run_id": run_id, "step": step, "value": value},
            "window": args.window,
            "per_trace": per_trace,
        }, out)
        return
    out.write("run_id,metric,step,value,selected\n")
    for row in per_trace:
        chosen = row["run_id"] == run_id and row["step"] == step
        out.write(",".join((row["run_id"], row["metric"],
                            _fmt(row["step"]), _fmt(row["value"]),
                            "1" if chosen else "0")) + "\n")


def _cmd_simulate_batches(args, out) -> None:
    with open(args.plan, "r", encoding="utf-8") as fp:
        plan = balancer.plan_from_json(fp)
    cov = balancer.batch_coverage(plan, args.batch_size)
    if args.format == "json":
        _json_dump({
            "batch_size": cov.batch_size,
            "fraction_at_least_one": cov.fraction_at_least_one,
            "rarest": {"index": cov.rarest_index,
                       "expected": cov.rarest_expected},
            "expected": list(cov.expected),
        }, out)
        return
    out.write(f"# batch_size: {cov.batch_size}\n")
    out.write(f"# fraction_at_least_one: {_fmt(cov.fraction_at_least_one)}\n")
    out.write("index,expected\n")
    for k, e in enumerate(cov.expected):
        out.write(f"{k},{_fmt(e)}\n")


def _cmd_synth(args, out) -> None:
    ds = synth_powerlaw(
        n_classes=args.classes,
        n_examples=args.examples,
        exponent=args.exponent,
        labels_per_example=args.labels_per_example,
        seed=args.seed,
    )
    out.write(dataset_to_json(ds))
    out.write("\n")


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------


def _add_output_flags(sp) -> None:
    sp.add_argument("--format", choices=("json", "csv"), default="json",
                    help="primary output format (default json)")
    sp.add_argument("--output", default="-", metavar="PATH",
                    help="write primary output here ('-' = stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="labelbalance",
        description="Imbalance statistics, oversampling plans, and "
                    "macro-averaged metrics for multi-label datasets.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("stats", help="imbalance statistics of a dataset")
    sp.add_argument("datasets", nargs="+",
                    help="segments CSVs, or one dataset JSON")
    sp.add_argument("--vocab", help="class index CSV or ontology JSON")
    _add_output_flags(sp)
    sp.set_defaults(func=_cmd_stats)

    sp = sub.add_parser("plan", help="build oversampling plans")
    sp.add_argument("datasets", nargs="+")
    sp.add_argument("--vocab")
    sp.add_argument("--beta", type=float)
    sp.add_argument("--beta-sweep", metavar="B0,B1,...",
                    help=f"default {','.join(str(b) for b in DEFAULT_BETA_SWEEP)}")
    sp.add_argument("--allow-extended", action="store_true",
                    help="accept beta values outside [0, 1]")
    sp.add_argument("--plan-out", metavar="TEMPLATE",
                    help="write plan JSON per beta ({beta} placeholder)")
    sp.add_argument("--factors-out", metavar="TEMPLATE",
                    help="write newline-delimited factors per beta")
    _add_output_flags(sp)
    sp.set_defaults(func=_cmd_plan)

    sp = sub.add_parser("expand",
                        help="materialize one epoch of indices from a plan")
    sp.add_argument("plan")
    sp.add_argument("--seed", type=int, help="shuffle deterministically")
    sp.add_argument("--max-size", type=int, default=balancer.DEFAULT_INDEX_CEILING)
    _add_output_flags(sp)
    sp.set_defaults(func=_cmd_expand)

    sp = sub.add_parser("eval", help="score matrix -> metric report")
    sp.add_argument("labels", nargs="+",
                    help="evaluation label CSVs or dataset JSON")
    sp.add_argument("--vocab")
    sp.add_argument("--scores", required=True,
                    help="score CSV or SCMX binary file")
    sp.add_argument("--tie-rule", choices=sorted(metrics.TIE_RULES),
                    default="pessimistic")
    sp.add_argument("--run-id")
    _add_output_flags(sp)
    sp.set_defaults(func=_cmd_eval)

    sp = sub.add_parser("compare", help="deltas between two metric reports")
    sp.add_argument("report_a", help="baseline report JSON")
    sp.add_argument("report_b", help="comparison report JSON")
    sp.add_argument("--train-labels", nargs="+", metavar="PATH",
                    help="training labels for the delta-vs-prior regression")
    sp.add_argument("--vocab")
    _add_output_flags(sp)
    sp.set_defaults(func=_cmd_compare)

    sp = sub.add_parser("select", help="pick the best checkpoint from traces")
    sp.add_argument("traces", nargs="+")
    sp.add_argument("--window", type=int, default=7)
    sp.add_argument("--metric",
                    help="only consider traces with this metric name")
    _add_output_flags(sp)
    sp.set_defaults(func=_cmd_select)

    sp = sub.add_parser("simulate-batches",
                        help="expected per-batch class counts under a plan")
    sp.add_argument("plan")
    sp.add_argument("--batch-size", type=int, default=1024)
    _add_output_flags(sp)
    sp.set_defaults(func=_cmd_simulate_batches)

    sp = sub.add_parser("synth", help="deterministic synthetic dataset JSON")
    sp.add_argument("--classes", type=int, required=True)
    sp.add_argument("--examples", type=int, required=True)
    sp.add_argument("--exponent", type=float, default=1.0)
    sp.add_argument("--labels-per-example", type=float, default=2.0)
    sp.add_argument("--seed", type=int, default=0)
    _add_output_flags(sp)
    sp.set_defaults(func=_cmd_synth)

    return parser


def _stderr_line(obj) -> None:
    sys.stderr.write(json.dumps(obj) + "\n")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0

    captured: list = []
    status = 0
    try:
        with _warnings.catch_warnings(record=True) as rec:
            _warnings.simplefilter("always")
            try:
                with _open_out(args.output) as out:
                    args.func(args, out)
            finally:
                captured = list(rec)
    except UsageError as exc:
        _stderr_line({"error": "usage", "message": str(exc)})
        status = 2
    except LabelBalanceError as exc:
        _stderr_line({"error": type(exc).__name__, "message": str(exc)})
        status = 1
    except OSError as exc:
        _stderr_line({"error": type(exc).__name__, "message": str(exc)})
        status = 1
    for w in captured:
        _stderr_line({"warning": w.category.__name__, "message": str(w.message)})
    return status


if __name__ == "__main__":
    raise SystemExit(main())

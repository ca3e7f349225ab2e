"""Command-line front end for the prediction pipeline.

Subcommands: ingest plan documents into a corpus, synthesize a corpus with
a planted cost-to-time law, train and save a model, predict a single
plan's time, run cross-validated evaluation, report per-template time
spread, and export plot-ready CSV data.

Exit codes: 0 success, 1 usage error, 2 data or fit error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .corpus import (
    CorpusStore,
    default_synthetic_spec,
    generate_synthetic,
    ingest,
    load_corpus,
    parse_time_law,
    save_corpus,
)
from .errors import ConfigError, Cost2TimeError, DomainError
from .evaluation import (
    EvalConfig,
    EvalReport,
    cross_validate,
    load_report,
    save_report,
    template_cov,
    write_per_query_csv,
    write_scatter_csv,
)
from .models import (
    KernelSpec,
    KnnModel,
    LinearModel,
    OperatorLevelModel,
    PowerLawModel,
    SvrModel,
    fit_knn,
    fit_ols,
    fit_operator_level,
    fit_power_law,
    fit_svr,
    load_model,
    predict_knn,
    predict_linear,
    predict_operator_level,
    predict_power_law,
    predict_svr,
    save_model,
    unseen_kinds,
)
from .plan import (
    COST_ONLY_SCHEMA,
    build_flattened_schema,
    parse_explain_document,
    to_feature_vector,
)

PLOT_MODES = ("cost_time", "pred_actual", "error_hist")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse variant that reports usage problems instead of exiting."""

    def error(self, message):
        raise _UsageError(message)


def _add_method_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--method",
        choices=["ols", "power_law", "knn", "svr"],
        default="knn",
        help="regressor family (default: knn)",
    )
    parser.add_argument(
        "--level",
        choices=["plan", "operator"],
        default="plan",
        help="model the whole plan or each operator kind (default: plan)",
    )
    parser.add_argument(
        "--features",
        choices=["cost", "flattened"],
        default="cost",
        help="plan-level feature set (default: cost)",
    )
    parser.add_argument(
        "--kernel",
        choices=["linear", "polynomial", "rbf"],
        default="rbf",
        help="SVR kernel (default: rbf)",
    )
    parser.add_argument("--gamma", type=float, default=None, help="kernel gamma")
    parser.add_argument("--degree", type=int, default=3, help="polynomial degree")
    parser.add_argument("--coef0", type=float, default=1.0, help="polynomial coef0")
    parser.add_argument("--knn-k", type=int, default=5, help="neighbour count (1-99)")
    parser.add_argument(
        "--knn-weighted",
        action="store_true",
        help="weight neighbours by inverse distance",
    )
    parser.add_argument("--C", type=float, default=100.0, help="SVR regularization")
    parser.add_argument("--epsilon", type=float, default=0.1, help="SVR tube half-width")
    parser.add_argument("--tol", type=float, default=1e-3, help="SVR stop tolerance")
    parser.add_argument("--max-iter", type=int, default=10000, help="SVR sweep cap")
    parser.add_argument(
        "--min-samples",
        type=int,
        default=5,
        help="records required for a dedicated per-kind model",
    )


def _kernel_from_args(args) -> KernelSpec:
    if args.kernel == "linear":
        if args.gamma is not None:
            raise _UsageError("--gamma does not apply to the linear kernel")
        return KernelSpec.linear()
    if args.kernel == "polynomial":
        return KernelSpec.polynomial(
            degree=args.degree, gamma=args.gamma, coef0=args.coef0
        )
    return KernelSpec.rbf(gamma=args.gamma)


def _feature_mode(args) -> str:
    return "cost_only" if args.features == "cost" else "flattened"


def build_parser() -> _Parser:
    parser = _Parser(
        prog="cost2time",
        description="Predict query execution times from optimizer plan costs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse plan documents into a corpus file")
    p.add_argument("paths", nargs="+", help="plan document files (JSON or JSONL)")
    p.add_argument("--out", required=True, help="corpus file to write")
    p.add_argument("--label", default="ingested", help="benchmark label")

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    p.add_argument("--out", required=True, help="corpus file to write")
    p.add_argument("--templates", type=int, default=22, help="template count")
    p.add_argument("--instances", type=int, default=100, help="instances per template")
    p.add_argument(
        "--law",
        default="linear:2.0",
        help="time law: linear:A, power:A,B, or bimodal:LOW,HIGH,P",
    )
    p.add_argument("--noise", type=float, default=0.05, help="multiplicative half-width")
    p.add_argument("--seed", type=int, default=42, help="generator seed")
    p.add_argument("--label", default="synthetic", help="benchmark label")

    p = sub.add_parser("train", help="fit a model on a whole corpus and save it")
    p.add_argument("--corpus", required=True, help="corpus file")
    p.add_argument("--out", required=True, help="model file to write")
    _add_method_flags(p)

    p = sub.add_parser("predict", help="predict one plan's execution time")
    p.add_argument("--model", required=True, help="model file")
    p.add_argument("--plan", required=True, help="plan document file")

    p = sub.add_parser("evaluate", help="cross-validate a method on a corpus")
    p.add_argument("--corpus", required=True, help="corpus file")
    p.add_argument("--out", required=True, help="report JSON to write")
    p.add_argument("--per-query-csv", default=None, help="optional per-query CSV")
    p.add_argument("--scatter-csv", default=None, help="optional cost/actual/predicted CSV")
    p.add_argument("--k-folds", type=int, default=5, help="fold count")
    p.add_argument("--seed", type=int, default=42, help="shuffle seed")
    p.add_argument("--threshold", type=float, default=0.20, help="error threshold")
    p.add_argument(
        "--clamp-floor",
        type=float,
        default=0.001,
        help="minimum prediction (ms) for metric purposes",
    )
    _add_method_flags(p)

    p = sub.add_parser("cov", help="per-template coefficient of variation")
    p.add_argument("--corpus", required=True, help="corpus file")
    p.add_argument("--out", default=None, help="JSON output path (default: stdout)")

    p = sub.add_parser("report", help="export plot-ready CSV data")
    p.add_argument("--report", default=None, help="evaluation report JSON")
    p.add_argument("--corpus", default=None, help="corpus file (cost_time mode)")
    p.add_argument("--mode", required=True, choices=list(PLOT_MODES))
    p.add_argument("--out", required=True, help="CSV file to write")

    return parser


def _cmd_ingest(args) -> int:
    store = ingest(args.paths, label=args.label)
    save_corpus(store, args.out)
    print(f"wrote {len(store)} sample(s) to {args.out}")
    return 0


def _cmd_synth(args) -> int:
    try:
        law = parse_time_law(args.law)
        spec = default_synthetic_spec(
            template_count=args.templates,
            instances_per_template=args.instances,
            law=law,
            noise=args.noise,
            seed=args.seed,
            label=args.label,
        )
    except ConfigError as exc:
        raise _UsageError(str(exc)) from None
    store = generate_synthetic(spec)
    save_corpus(store, args.out)
    print(f"wrote {len(store)} sample(s) to {args.out}")
    return 0


def _eval_config_from_args(args) -> EvalConfig:
    try:
        return EvalConfig(
            family=args.method,
            level=args.level,
            feature_mode=_feature_mode(args),
            k_folds=getattr(args, "k_folds", 5),
            seed=getattr(args, "seed", 42),
            error_threshold=getattr(args, "threshold", 0.20),
            clamp_floor_ms=getattr(args, "clamp_floor", 0.001),
            knn_k=args.knn_k,
            knn_weighted=args.knn_weighted,
            kernel=_kernel_from_args(args),
            C=args.C,
            epsilon=args.epsilon,
            tol=args.tol,
            max_iter=args.max_iter,
            min_samples=args.min_samples,
        )
    except ConfigError as exc:
        raise _UsageError(str(exc)) from None


def _cmd_train(args) -> int:
    config = _eval_config_from_args(args)
    store = load_corpus(args.corpus)
    samples = list(store.samples)
    untimed = [s.query_id for s in samples if not s.is_timed]
    if untimed:
        raise DomainError(
            f"{len(untimed)} sample(s) lack measured times (first: {untimed[0]!r})"
        )
    times = [s.execution_time_ms for s in samples]
    if config.level == "operator":
        model = fit_operator_level(
            samples,
            base_family=config.family,
            min_samples=config.min_samples,
            knn_k=config.knn_k,
            knn_weighted=config.knn_weighted,
            kernel=config.kernel,
            C=config.C,
            epsilon=config.epsilon,
            tol=config.tol,
            max_iter=config.max_iter,
        )
    elif config.family == "power_law":
        model = fit_power_law([s.plan_cost for s in samples], times)
    else:
        if config.feature_mode == "flattened":
            schema = build_flattened_schema(samples)
            vectors = [to_feature_vector(s, "flattened", schema) for s in samples]
        else:
            vectors = [to_feature_vector(s, "cost_only") for s in samples]
        if config.family == "ols":
            model = fit_ols(vectors, times)
        elif config.family == "knn":
            model = fit_knn(
                list(zip(vectors, times)), k=config.knn_k, weighted=config.knn_weighted
            )
        else:
            model = fit_svr(
                vectors,
                times,
                kernel=config.kernel,
                C=config.C,
                epsilon=config.epsilon,
                tol=config.tol,
                max_iter=config.max_iter,
            )
    save_model(model, args.out)
    print(f"trained {config.family}/{config.level} model on {len(samples)} sample(s)")
    return 0


def _cmd_predict(args) -> int:
    model = load_model(args.model)
    sample = parse_explain_document(Path(args.plan).read_text(encoding="utf-8"))
    if isinstance(model, OperatorLevelModel):
        routed = unseen_kinds(model, sample)
        if routed:
            print(
                "warning: no dedicated model for "
                f"{', '.join(routed)}; using the pooled fallback",
                file=sys.stderr,
            )
        value = predict_operator_level(model, sample)
    elif isinstance(model, PowerLawModel):
        value = predict_power_law(model, sample.plan_cost)
    else:
        if model.schema == COST_ONLY_SCHEMA:
            vector = to_feature_vector(sample, "cost_only")
        else:
            vector = to_feature_vector(sample, "flattened", model.schema)
        if isinstance(model, LinearModel):
            value = predict_linear(model, vector)
        elif isinstance(model, KnnModel):
            value = predict_knn(model, vector)
        elif isinstance(model, SvrModel):
            value = predict_svr(model, vector)
        else:
            raise Cost2TimeError(f"cannot predict with {type(model).__name__}")
    print(repr(float(value)))
    return 0


def _cmd_evaluate(args) -> int:
    config = _eval_config_from_args(args)
    store = load_corpus(args.corpus)
    report = cross_validate(store.samples, config)
    save_report(report, args.out)
    if args.per_query_csv:
        write_per_query_csv(report, args.per_query_csv)
    if args.scatter_csv:
        write_scatter_csv(report, args.scatter_csv)
    o = report.overall
    print(
        f"n={o.n} mean_rel_err={o.mean_rel_err:.4f} "
        f"median_rel_err={o.median_rel_err:.4f} "
        f"frac_below_{config.error_threshold:g}={o.frac_below_threshold:.4f}"
    )
    return 0


def _cmd_cov(args) -> int:
    store = load_corpus(args.corpus)
    cov = template_cov(store.samples)
    text = json.dumps(cov, allow_nan=False, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return 0


def emit_plot_data(source, mode: str, path: str | Path) -> None:
    """Write plot-ready CSV rows for a report (or corpus, cost_time only)."""
    if mode not in PLOT_MODES:
        raise ConfigError(f"unknown plot mode {mode!r}; expected one of {PLOT_MODES}")
    rows: list[list] = []
    if isinstance(source, EvalReport):
        if not source.per_query:
            raise DomainError("report has no per-query rows to plot")
        if mode == "cost_time":
            header = ["cost", "actual_ms"]
            rows = [[repr(r.plan_cost), repr(r.actual_ms)] for r in source.per_query]
        elif mode == "pred_actual":
            header = ["actual_ms", "predicted_ms"]
            rows = [
                [repr(r.actual_ms), repr(r.predicted_clamped_ms)]
                for r in source.per_query
            ]
        else:
            header = ["rel_err"]
            rows = [[repr(r.rel_err)] for r in source.per_query]
    else:
        samples = list(source)
        if not samples:
            raise DomainError("corpus has no samples to plot")
        if mode != "cost_time":
            raise ConfigError(f"mode {mode!r} needs an evaluation report")
        header = ["cost", "actual_ms"]
        for s in samples:
            if not s.is_timed:
                raise DomainError(f"sample {s.query_id!r} has no measured time")
            rows.append([repr(s.plan_cost), repr(s.execution_time_ms)])
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)


def _cmd_report(args) -> int:
    if args.report is None and args.corpus is None:
        raise _UsageError("report needs --report or --corpus")
    if args.report is not None:
        source = load_report(args.report)
    else:
        if args.mode != "cost_time":
            raise _UsageError(f"mode {args.mode!r} needs --report")
        source = load_corpus(args.corpus)
    emit_plot_data(source, args.mode, args.out)
    print(f"wrote {args.out}")
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "synth": _cmd_synth,
    "train": _cmd_train,
    "predict": _cmd_predict,
    "evaluate": _cmd_evaluate,
    "cov": _cmd_cov,
    "report": _cmd_report,
}


def run(argv) -> int:
    """Parse argv and execute one subcommand; returns the exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (Cost2TimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())

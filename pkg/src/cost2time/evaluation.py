"""Cross-validated evaluation of cost-to-time predictors.

The protocol: shuffle the corpus once with a seeded RNG, cut it into k
contiguous folds, and let each fold serve as the test set for a model
fitted on the others. Per-query relative errors are aggregated overall and
per template, and an outlier scan picks out the predictions that missed by
an order of magnitude.
"""

from __future__ import annotations

import csv
import json
import random
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigError, Cost2TimeError, DomainError, EvalError
from .models import (
    BASE_FAMILIES,
    DEFAULT_C,
    DEFAULT_EPSILON,
    DEFAULT_K,
    DEFAULT_MAX_ITER,
    DEFAULT_MIN_SAMPLES,
    DEFAULT_TOL,
    KernelSpec,
    fit_knn,
    fit_ols,
    fit_operator_level,
    fit_power_law,
    fit_svr,
    predict_knn,
    predict_linear,
    predict_operator_level,
    predict_power_law,
    predict_svr,
)
from .plan import PlanSample, build_flattened_schema, to_feature_vector

LEVELS = ("plan", "operator")
FEATURE_MODES = ("cost_only", "flattened")

DEFAULT_THRESHOLD = 0.20
DEFAULT_CLAMP_FLOOR_MS = 0.001
DEFAULT_SEED = 42
DEFAULT_OUTLIER_CUTOFF = 9.0

REPORT_FORMAT_VERSION = 1

UNTEMPLATED_KEY = "(untemplated)"


@dataclass(frozen=True)
class EvalConfig:
    """Everything a cross-validation run depends on, in one place."""

    family: str = "knn"
    level: str = "plan"
    feature_mode: str = "cost_only"
    k_folds: int = 5
    seed: int = DEFAULT_SEED
    error_threshold: float = DEFAULT_THRESHOLD
    clamp_floor_ms: float = DEFAULT_CLAMP_FLOOR_MS
    knn_k: int = DEFAULT_K
    knn_weighted: bool = False
    kernel: KernelSpec = field(default_factory=KernelSpec.rbf)
    C: float = DEFAULT_C
    epsilon: float = DEFAULT_EPSILON
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    min_samples: int = DEFAULT_MIN_SAMPLES

    def __post_init__(self) -> None:
        if self.family not in BASE_FAMILIES:
            raise ConfigError(
                f"unknown family {self.family!r}; expected one of "
                f"{', '.join(BASE_FAMILIES)}"
            )
        if self.level not in LEVELS:
            raise ConfigError(f"level must be one of {', '.join(LEVELS)}")
        if self.feature_mode not in FEATURE_MODES:
            raise ConfigError(
                f"feature_mode must be one of {', '.join(FEATURE_MODES)}"
            )
        if self.k_folds < 2:
            raise ConfigError(f"k_folds must be at least 2, got {self.k_folds}")
        if not 0.0 < self.error_threshold < 1.0:
            raise ConfigError(
                f"error_threshold must lie in (0, 1), got {self.error_threshold}"
            )
        if self.clamp_floor_ms <= 0:
            raise ConfigError(
                f"clamp_floor_ms must be positive, got {self.clamp_floor_ms}"
            )
        if not 1 <= self.knn_k <= 99:
            raise ConfigError(f"knn_k must lie in 1..99, got {self.knn_k}")
        if self.family == "power_law" and self.feature_mode != "cost_only":
            raise ConfigError(
                "the power-law family maps a single cost to a time; "
                "it supports cost_only features only"
            )
        if self.level == "operator" and self.feature_mode != "cost_only":
            raise ConfigError(
                "operator-level models use the per-node exclusive cost; "
                "feature_mode must be cost_only"
            )
        if self.C <= 0:
            raise ConfigError(f"C must be positive, got {self.C}")
        if self.epsilon < 0:
            raise ConfigError(f"epsilon must be non-negative, got {self.epsilon}")
        if self.tol <= 0:
            raise ConfigError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ConfigError(f"max_iter must be at least 1, got {self.max_iter}")
        if self.min_samples < 1:
            raise ConfigError(
                f"min_samples must be at least 1, got {self.min_samples}"
            )


@dataclass(frozen=True)
class MetricsSummary:
    mean_rel_err: float
    median_rel_err: float
    frac_below_threshold: float
    min_rel_err: float
    max_rel_err: float
    n: int


@dataclass(frozen=True)
class QueryResult:
    """One evaluated query: what was measured, what was predicted."""

    query_id: str
    template_id: str | None
    fold: int
    plan_cost: float
    actual_ms: float
    predicted_raw_ms: float
    predicted_clamped_ms: float
    rel_err: float


@dataclass(frozen=True)
class EvalReport:
    overall: MetricsSummary
    per_template: dict[str, MetricsSummary]
    per_query: tuple[QueryResult, ...]
    config: EvalConfig


@dataclass(frozen=True)
class OutlierEntry:
    query_id: str
    template_id: str | None
    actual_ms: float
    predicted_ms: float
    rel_err: float


@dataclass(frozen=True)
class OutlierReport:
    entries: tuple[OutlierEntry, ...]
    criterion: str


def relative_error(actual: float, predicted: float) -> float:
    """|actual - predicted| / actual; undefined for non-positive actuals."""
    if actual <= 0:
        raise DomainError(f"actual time must be positive, got {actual}")
    return abs(actual - predicted) / actual


def aggregate_metrics(errors: Sequence[float], threshold: float) -> MetricsSummary:
    """Summarize a batch of relative errors.

    The below-threshold fraction uses a strict inequality, and an
    even-length median is the mean of the two middle values.
    """
    n = len(errors)
    if n == 0:
        raise DomainError("cannot aggregate an empty error list")
    ordered = sorted(errors)
    mid = n // 2
    if n % 2 == 1:
        median = ordered[mid]
    else:
        median = (ordered[mid - 1] + ordered[mid]) / 2.0
    below = sum(1 for e in errors if e < threshold)
    return MetricsSummary(
        mean_rel_err=sum(errors) / n,
        median_rel_err=median,
        frac_below_threshold=below / n,
        min_rel_err=ordered[0],
        max_rel_err=ordered[-1],
        n=n,
    )


def kfold_split(n: int, k: int, seed: int) -> list[list[int]]:
    """Seeded shuffle of 0..n-1, cut into k contiguous folds.

    The first n mod k folds take the extra element. Same (n, k, seed) gives
    the same assignment on every run.
    """
    if k < 2:
        raise DomainError(f"need at least 2 folds, got {k}")
    if n < k:
        raise DomainError(f"cannot cut {n} samples into {k} folds")
    indices = list(range(n))
    random.Random(seed).shuffle(indices)
    base, extra = divmod(n, k)
    folds: list[list[int]] = []
    start = 0
    for j in range(k):
        size = base + (1 if j < extra else 0)
        folds.append(indices[start : start + size])
        start += size
    return folds


def _plan_vectors(samples, feature_mode, schema):
    if feature_mode == "cost_only":
        return [to_feature_vector(s, "cost_only") for s in samples]
    return [to_feature_vector(s, "flattened", schema) for s in samples]


def _fit_fold(train: list[PlanSample], config: EvalConfig, schema):
    times = [s.execution_time_ms for s in train]
    if config.level == "operator":
        return fit_operator_level(
            train,
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
    if config.family == "power_law":
        return fit_power_law([s.plan_cost for s in train], times)
    vectors = _plan_vectors(train, config.feature_mode, schema)
    if config.family == "ols":
        return fit_ols(vectors, times)
    if config.family == "knn":
        return fit_knn(
            list(zip(vectors, times)), k=config.knn_k, weighted=config.knn_weighted
        )
    return fit_svr(
        vectors,
        times,
        kernel=config.kernel,
        C=config.C,
        epsilon=config.epsilon,
        tol=config.tol,
        max_iter=config.max_iter,
    )


def _predict_one(model, sample: PlanSample, config: EvalConfig, schema) -> float:
    if config.level == "operator":
        return predict_operator_level(model, sample)
    if config.family == "power_law":
        return predict_power_law(model, sample.plan_cost)
    (vector,) = _plan_vectors([sample], config.feature_mode, schema)
    if config.family == "ols":
        return predict_linear(model, vector)
    if config.family == "knn":
        return predict_knn(model, vector)
    return predict_svr(model, vector)


def cross_validate(corpus: Sequence[PlanSample], config: EvalConfig) -> EvalReport:
    """Run the full k-fold protocol and return per-query and summary metrics.

    Raw predictions are kept alongside their clamped counterparts; only the
    clamped value (never below clamp_floor_ms) feeds the error metric.
    """
    samples = list(corpus)
    untimed = [s.query_id for s in samples if not s.is_timed]
    if untimed:
        raise EvalError(
            f"{len(untimed)} sample(s) lack measured times (first: {untimed[0]!r})"
        )
    if len(samples) < config.k_folds:
        raise EvalError(
            f"corpus of {len(samples)} cannot fill {config.k_folds} folds"
        )
    schema = None
    if config.level == "plan" and config.feature_mode == "flattened":
        schema = build_flattened_schema(samples)

    folds = kfold_split(len(samples), config.k_folds, config.seed)
    rows: list[QueryResult] = []
    for fold_index, test_indices in enumerate(folds):
        test = sorted(test_indices)
        in_test = set(test)
        train = [samples[i] for i in range(len(samples)) if i not in in_test]
        try:
            model = _fit_fold(train, config, schema)
            for i in test:
                sample = samples[i]
                raw = float(_predict_one(model, sample, config, schema))
                clamped = max(raw, config.clamp_floor_ms)
                rows.append(
                    QueryResult(
                        query_id=sample.query_id,
                        template_id=sample.template_id,
                        fold=fold_index,
                        plan_cost=sample.plan_cost,
                        actual_ms=sample.execution_time_ms,
                        predicted_raw_ms=raw,
                        predicted_clamped_ms=clamped,
                        rel_err=relative_error(sample.execution_time_ms, clamped),
                    )
                )
        except Cost2TimeError as exc:
            raise EvalError(f"fold {fold_index}: {exc}") from exc

    overall = aggregate_metrics([r.rel_err for r in rows], config.error_threshold)
    grouped: dict[str, list[float]] = {}
    for row in rows:
        key = row.template_id if row.template_id is not None else UNTEMPLATED_KEY
        grouped.setdefault(key, []).append(row.rel_err)
    per_template = {
        key: aggregate_metrics(errs, config.error_threshold)
        for key, errs in sorted(grouped.items())
    }
    return EvalReport(
        overall=overall,
        per_template=per_template,
        per_query=tuple(rows),
        config=config,
    )


def template_cov(corpus: Sequence[PlanSample]) -> dict[str, float]:
    """Per-template coefficient of variation of the measured times.

    Population standard deviation over mean; a singleton template has
    spread zero by definition.
    """
    grouped: dict[str, list[float]] = {}
    for sample in corpus:
        if not sample.is_timed:
            raise DomainError(
                f"sample {sample.query_id!r} has no measured time"
            )
        key = sample.template_id if sample.template_id is not None else UNTEMPLATED_KEY
        grouped.setdefault(key, []).append(sample.execution_time_ms)
    result: dict[str, float] = {}
    for key in sorted(grouped):
        times = np.asarray(grouped[key], dtype=float)
        result[key] = float(times.std() / times.mean())
    return result


def outlier_report(
    report: EvalReport,
    rel_err_cutoff: float = DEFAULT_OUTLIER_CUTOFF,
    order_of_magnitude: bool = False,
) -> OutlierReport:
    """Pick out the badly missed predictions, worst first.

    The plain mode keeps entries with rel_err above the cutoff. The
    order-of-magnitude mode flags a query when the prediction is at least
    roughly 10x off in either direction: max(|a-p|/a, |a-p|/p) > 0.9.
    """
    entries: list[OutlierEntry] = []
    for row in report.per_query:
        a = row.actual_ms
        p = row.predicted_clamped_ms
        if order_of_magnitude:
            gap = abs(a - p)
            flagged = max(gap / a, gap / p) > 0.9
        else:
            flagged = row.rel_err > rel_err_cutoff
        if flagged:
            entries.append(
                OutlierEntry(
                    query_id=row.query_id,
                    template_id=row.template_id,
                    actual_ms=a,
                    predicted_ms=p,
                    rel_err=row.rel_err,
                )
            )
    entries.sort(key=lambda e: -e.rel_err)
    if order_of_magnitude:
        criterion = "order_of_magnitude: max(|a-p|/a, |a-p|/p) > 0.9"
    else:
        criterion = f"rel_err > {rel_err_cutoff!r}"
    return OutlierReport(entries=tuple(entries), criterion=criterion)


def _kernel_to_dict(spec: KernelSpec) -> dict:
    return {
        "family": spec.family,
        "gamma": spec.gamma,
        "degree": spec.degree,
        "coef0": spec.coef0,
    }


def _kernel_from_dict(doc: dict) -> KernelSpec:
    return KernelSpec(
        family=doc["family"],
        gamma=doc.get("gamma"),
        degree=int(doc.get("degree", 3)),
        coef0=float(doc.get("coef0", 1.0)),
    )


def config_to_dict(config: EvalConfig) -> dict:
    doc = {
        "family": config.family,
        "level": config.level,
        "feature_mode": config.feature_mode,
        "k_folds": config.k_folds,
        "seed": config.seed,
        "error_threshold": config.error_threshold,
        "clamp_floor_ms": config.clamp_floor_ms,
        "knn_k": config.knn_k,
        "knn_weighted": config.knn_weighted,
        "kernel": _kernel_to_dict(config.kernel),
        "C": config.C,
        "epsilon": config.epsilon,
        "tol": config.tol,
        "max_iter": config.max_iter,
        "min_samples": config.min_samples,
    }
    return doc


def config_from_dict(doc: dict) -> EvalConfig:
    fields = dict(doc)
    kernel_doc = fields.pop("kernel", None)
    kernel = _kernel_from_dict(kernel_doc) if kernel_doc else KernelSpec.rbf()
    return EvalConfig(kernel=kernel, **fields)


def _metrics_to_dict(m: MetricsSummary) -> dict:
    return {
        "mean_rel_err": m.mean_rel_err,
        "median_rel_err": m.median_rel_err,
        "frac_below_threshold": m.frac_below_threshold,
        "min_rel_err": m.min_rel_err,
        "max_rel_err": m.max_rel_err,
        "n": m.n,
    }


def _metrics_from_dict(doc: dict) -> MetricsSummary:
    return MetricsSummary(
        mean_rel_err=float(doc["mean_rel_err"]),
        median_rel_err=float(doc["median_rel_err"]),
        frac_below_threshold=float(doc["frac_below_threshold"]),
        min_rel_err=float(doc["min_rel_err"]),
        max_rel_err=float(doc["max_rel_err"]),
        n=int(doc["n"]),
    )


def report_to_dict(report: EvalReport) -> dict:
    return {
        "format_version": REPORT_FORMAT_VERSION,
        "config": config_to_dict(report.config),
        "overall": _metrics_to_dict(report.overall),
        "per_template": {
            key: _metrics_to_dict(m) for key, m in report.per_template.items()
        },
        "per_query": [
            {
                "query_id": r.query_id,
                "template_id": r.template_id,
                "fold": r.fold,
                "plan_cost": r.plan_cost,
                "actual_ms": r.actual_ms,
                "predicted_raw_ms": r.predicted_raw_ms,
                "predicted_clamped_ms": r.predicted_clamped_ms,
                "rel_err": r.rel_err,
            }
            for r in report.per_query
        ],
    }


def report_from_dict(doc: dict) -> EvalReport:
    if doc.get("format_version") != REPORT_FORMAT_VERSION:
        raise EvalError(
            f"unsupported report format version {doc.get('format_version')!r}"
        )
    rows = tuple(
        QueryResult(
            query_id=r["query_id"],
            template_id=r.get("template_id"),
            fold=int(r["fold"]),
            plan_cost=float(r["plan_cost"]),
            actual_ms=float(r["actual_ms"]),
            predicted_raw_ms=float(r["predicted_raw_ms"]),
            predicted_clamped_ms=float(r["predicted_clamped_ms"]),
            rel_err=float(r["rel_err"]),
        )
        for r in doc["per_query"]
    )
    return EvalReport(
        overall=_metrics_from_dict(doc["overall"]),
        per_template={
            key: _metrics_from_dict(m) for key, m in doc["per_template"].items()
        },
        per_query=rows,
        config=config_from_dict(doc["config"]),
    )


def save_report(report: EvalReport, path: str | Path) -> None:
    text = json.dumps(report_to_dict(report), allow_nan=False, indent=2)
    Path(path).write_text(text + "\n", encoding="utf-8")


def load_report(path: str | Path) -> EvalReport:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise EvalError(f"report file is not valid JSON: {exc}") from None
    return report_from_dict(doc)


def write_per_query_csv(report: EvalReport, path: str | Path) -> None:
    """CSV of one row per evaluated query, raw and clamped predictions both."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            [
                "query_id",
                "template_id",
                "fold",
                "actual_ms",
                "predicted_ms_raw",
                "predicted_ms_clamped",
                "rel_err",
            ]
        )
        for r in report.per_query:
            writer.writerow(
                [
                    r.query_id,
                    r.template_id if r.template_id is not None else "",
                    r.fold,
                    repr(r.actual_ms),
                    repr(r.predicted_raw_ms),
                    repr(r.predicted_clamped_ms),
                    repr(r.rel_err),
                ]
            )


def write_scatter_csv(report: EvalReport, path: str | Path) -> None:
    """CSV of (cost, actual_ms, predicted_ms) triples for scatter plots."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["cost", "actual_ms", "predicted_ms"])
        for r in report.per_query:
            writer.writerow(
                [repr(r.plan_cost), repr(r.actual_ms), repr(r.predicted_clamped_ms)]
            )


def with_overrides(config: EvalConfig, **changes) -> EvalConfig:
    """Convenience wrapper over dataclasses.replace with validation intact."""
    return replace(config, **changes)

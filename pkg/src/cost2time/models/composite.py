"""Operator-level modeling: one regressor per operator kind, summed.

A plan's prediction is the sum of per-node time predictions, where each
node is scored by a model trained on that operator kind's (exclusive cost,
exclusive time) pairs. Kinds too rare to train on route to a fallback
model fitted on all operator records pooled together.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from ..errors import ConfigError, DegenerateFitError
from ..plan import FeatureVector, OperatorRecord, PlanSample, decompose_operators
from .knn import DEFAULT_K, KnnModel, fit_knn, predict_knn
from .linear import (
    LinearModel,
    PowerLawModel,
    fit_ols,
    fit_power_law,
    predict_linear,
    predict_power_law,
)
from .svr import (
    DEFAULT_C,
    DEFAULT_EPSILON,
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    KernelSpec,
    SvrModel,
    fit_svr,
    predict_svr,
)

logger = logging.getLogger(__name__)

BASE_FAMILIES = ("ols", "power_law", "knn", "svr")
DEFAULT_MIN_SAMPLES = 5

# Operator-level models see a single feature: the node's own share of the
# optimizer cost.
OPERATOR_SCHEMA = ("exclusive_cost",)

BaseModel = LinearModel | PowerLawModel | KnnModel | SvrModel


@dataclass(frozen=True)
class OperatorLevelModel:
    base_family: str
    per_kind: dict[str, BaseModel] = field(repr=False)
    fallback: BaseModel = field(repr=False)
    min_samples: int = DEFAULT_MIN_SAMPLES

    @property
    def kinds(self) -> tuple[str, ...]:
        return tuple(sorted(self.per_kind))

    def predict(self, sample: PlanSample) -> float:
        return predict_operator_level(self, sample)


def _usable(record: OperatorRecord, base_family: str) -> bool:
    """Whether a record can train the given family.

    kNN pools and SVR targets must be positive, and a power law needs both
    coordinates positive; plain OLS accepts zero times and costs.
    """
    if record.exclusive_time_ms is None:
        return False
    if base_family == "ols":
        return True
    if base_family == "power_law":
        return record.exclusive_cost > 0 and record.exclusive_time_ms > 0
    return record.exclusive_time_ms > 0


def _fit_base(
    records: list[OperatorRecord],
    base_family: str,
    knn_k: int,
    knn_weighted: bool,
    kernel: KernelSpec | None,
    C: float,
    epsilon: float,
    tol: float,
    max_iter: int,
) -> BaseModel:
    costs = [r.exclusive_cost for r in records]
    times = [r.exclusive_time_ms for r in records]
    if base_family == "power_law":
        return fit_power_law(costs, times)
    vectors = [FeatureVector((c,), OPERATOR_SCHEMA) for c in costs]
    if base_family == "ols":
        return fit_ols(vectors, times)
    if base_family == "knn":
        return fit_knn(list(zip(vectors, times)), k=knn_k, weighted=knn_weighted)
    return fit_svr(
        vectors, times, kernel=kernel, C=C, epsilon=epsilon, tol=tol, max_iter=max_iter
    )


def fit_operator_level(
    samples: list[PlanSample],
    base_family: str,
    min_samples: int = DEFAULT_MIN_SAMPLES,
    knn_k: int = DEFAULT_K,
    knn_weighted: bool = False,
    kernel: KernelSpec | None = None,
    C: float = DEFAULT_C,
    epsilon: float = DEFAULT_EPSILON,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> OperatorLevelModel:
    """Group operator records by kind and fit one base model per kind.

    Kinds with fewer than ``min_samples`` usable records get no dedicated
    model; so do kinds whose fit degenerates (for example a kind whose
    exclusive cost is identically zero). Both route to the pooled fallback.
    """
    if base_family not in BASE_FAMILIES:
        raise ConfigError(
            f"unknown base family {base_family!r}; "
            f"expected one of {', '.join(BASE_FAMILIES)}"
        )
    if min_samples < 1:
        raise ConfigError(f"min_samples must be at least 1, got {min_samples}")
    if not samples:
        raise DegenerateFitError("cannot fit an operator-level model on no samples")

    by_kind: dict[str, list[OperatorRecord]] = {}
    pooled: list[OperatorRecord] = []
    for sample in samples:
        for record in decompose_operators(sample):
            if record.exclusive_time_ms is None:
                raise DegenerateFitError(
                    f"sample {sample.query_id!r} lacks operator timing; "
                    "operator-level fitting needs fully timed plans"
                )
            if not _usable(record, base_family):
                continue
            by_kind.setdefault(record.kind, []).append(record)
            pooled.append(record)
    if not pooled:
        raise DegenerateFitError(
            f"no operator records usable for base family {base_family!r}"
        )

    fit_kwargs = dict(
        knn_k=knn_k,
        knn_weighted=knn_weighted,
        kernel=kernel,
        C=C,
        epsilon=epsilon,
        tol=tol,
        max_iter=max_iter,
    )
    fallback = _fit_base(pooled, base_family, **fit_kwargs)
    per_kind: dict[str, BaseModel] = {}
    for kind in sorted(by_kind):
        records = by_kind[kind]
        if len(records) < min_samples:
            continue
        try:
            per_kind[kind] = _fit_base(records, base_family, **fit_kwargs)
        except DegenerateFitError as exc:
            logger.warning(
                "operator kind %s fell back to the pooled model: %s", kind, exc
            )
    return OperatorLevelModel(
        base_family=base_family,
        per_kind=per_kind,
        fallback=fallback,
        min_samples=min_samples,
    )


def _predict_base(model: BaseModel, base_family: str, exclusive_cost: float) -> float:
    if base_family == "power_law":
        # A zero-cost node has no cost signal to extrapolate from; it
        # contributes nothing rather than poisoning the sum.
        if exclusive_cost <= 0:
            return 0.0
        return predict_power_law(model, exclusive_cost)
    x = FeatureVector((exclusive_cost,), OPERATOR_SCHEMA)
    if base_family == "ols":
        return predict_linear(model, x)
    if base_family == "knn":
        return predict_knn(model, x)
    return predict_svr(model, x)


def predict_operator_level(model: OperatorLevelModel, sample: PlanSample) -> float:
    """Sum of per-node predictions, each clamped at zero before summation."""
    total = 0.0
    for record in decompose_operators(sample):
        base = model.per_kind.get(record.kind, model.fallback)
        value = _predict_base(base, model.base_family, record.exclusive_cost)
        if value > 0.0:
            total += value
    return total


def unseen_kinds(model: OperatorLevelModel, sample: PlanSample) -> tuple[str, ...]:
    """Kinds in the plan that will route to the fallback model, in plan order."""
    seen: list[str] = []
    for node in sample.root.walk():
        if node.kind not in model.per_kind and node.kind not in seen:
            seen.append(node.kind)
    return tuple(seen)

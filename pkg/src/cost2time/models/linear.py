"""Ordinary least squares and power-law regression.

Both map features to execution time in milliseconds. The power-law fit is
OLS on the logarithms: fitting ln(time) = ln(a) + b*ln(cost) is the same as
fitting time = a * cost^b.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateFitError, DomainError, SchemaError
from ..plan import COST_ONLY_SCHEMA, FeatureVector

logger = logging.getLogger(__name__)

# Designs with condition numbers beyond this are rejected as degenerate.
# Raw optimizer costs legitimately span ~1e0..1e7 against an intercept
# column of ones, so the threshold must admit conditions around 1e9.
_MAX_CONDITION = 1e12

_LOG_COST_SCHEMA = ("ln_plan_cost",)


def vectors_to_matrix(vectors: list[FeatureVector]) -> tuple[np.ndarray, tuple[str, ...]]:
    """Stack feature vectors into a design matrix, checking schema agreement."""
    if not vectors:
        raise DegenerateFitError("no feature vectors supplied")
    schema = vectors[0].schema
    for v in vectors[1:]:
        if v.schema != schema:
            raise SchemaError(f"mixed schemas: {v.schema} vs {schema}")
    return np.array([v.values for v in vectors], dtype=float), schema


@dataclass(frozen=True)
class LinearModel:
    """intercept + dot(coefficients, x), all in milliseconds."""

    intercept: float
    coefficients: tuple[float, ...]
    schema: tuple[str, ...]

    def predict(self, x: FeatureVector) -> float:
        return predict_linear(self, x)


def _solve_normal_equations(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Solve min ||Xb - y|| via the normal equations, X already augmented."""
    xtx = X.T @ X
    xty = X.T @ y
    cond = np.linalg.cond(X)
    if not np.isfinite(cond) or cond > _MAX_CONDITION:
        raise DegenerateFitError(
            f"design matrix is singular or ill-conditioned (cond={cond:.3g})"
        )
    try:
        return np.linalg.solve(xtx, xty)
    except np.linalg.LinAlgError as exc:
        raise DegenerateFitError(f"normal equations failed: {exc}") from None


def fit_ols(vectors: list[FeatureVector], targets: list[float]) -> LinearModel:
    """Least-squares fit of target times onto the features.

    Solved via the normal equations with an augmented intercept column.
    Raises DegenerateFitError for fewer than 2 samples, non-finite data, or a
    singular/ill-conditioned design.
    """
    X, schema = vectors_to_matrix(vectors)
    y = np.asarray(targets, dtype=float)
    if len(y) != len(X):
        raise DegenerateFitError(f"{len(X)} vectors but {len(y)} targets")
    if len(y) < 2:
        raise DegenerateFitError("need at least 2 samples")
    if not np.all(np.isfinite(X)) or not np.all(np.isfinite(y)):
        raise DegenerateFitError("non-finite values in training data")

    augmented = np.hstack([np.ones((len(X), 1)), X])
    coef = _solve_normal_equations(augmented, y)
    return LinearModel(
        intercept=float(coef[0]),
        coefficients=tuple(float(c) for c in coef[1:]),
        schema=schema,
    )


def predict_linear(model: LinearModel, x: FeatureVector) -> float:
    """May be negative; clamping policy belongs to the caller."""
    if x.schema != model.schema:
        raise SchemaError(f"vector schema {x.schema} != model schema {model.schema}")
    total = model.intercept
    for c, v in zip(model.coefficients, x.values):
        total += c * v
    return total


@dataclass(frozen=True)
class PowerLawModel:
    """time = coefficient * cost ** exponent, coefficient > 0."""

    coefficient: float
    exponent: float

    def predict(self, cost: float) -> float:
        return predict_power_law(self, cost)


def fit_power_law(costs: list[float], times: list[float]) -> PowerLawModel:
    """Fit time = a * cost^b by OLS on (ln cost, ln time).

    Pairs with a non-positive cost or time cannot be log-transformed; they
    are dropped with a logged count, and at least 2 pairs must survive.
    """
    if len(costs) != len(times):
        raise DegenerateFitError(f"{len(costs)} costs but {len(times)} times")
    kept = [(c, t) for c, t in zip(costs, times) if c > 0 and t > 0]
    dropped = len(costs) - len(kept)
    if dropped:
        logger.warning("power-law fit dropped %d non-positive pair(s)", dropped)
    if len(kept) < 2:
        raise DegenerateFitError(
            f"need at least 2 positive (cost, time) pairs, have {len(kept)}"
        )
    log_vectors = [
        FeatureVector(values=(math.log(c),), schema=_LOG_COST_SCHEMA) for c, _ in kept
    ]
    log_times = [math.log(t) for _, t in kept]
    line = fit_ols(log_vectors, log_times)
    return PowerLawModel(
        coefficient=math.exp(line.intercept), exponent=line.coefficients[0]
    )


def predict_power_law(model: PowerLawModel, cost: float) -> float:
    if cost <= 0:
        raise DomainError(f"power-law prediction requires cost > 0, got {cost}")
    return model.coefficient * cost**model.exponent

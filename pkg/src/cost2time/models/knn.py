"""k-nearest-neighbour regression.

The model is the training pool itself: fitting stores (feature vector,
time) pairs verbatim in insertion order, and prediction averages the times
of the k pool entries nearest the query (Euclidean distance, ties at the
k-th distance broken by lower insertion index). New observations can be
appended without refitting, which is what makes the method attractive for
online use.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import _kernels
from ..errors import DegenerateFitError, DomainError, SchemaError
from ..plan import FeatureVector
from .linear import vectors_to_matrix

DEFAULT_K = 5


@dataclass(frozen=True)
class KnnModel:
    """An immutable pool of (features, time) pairs plus the neighbour count.

    ``weighted`` switches prediction to an inverse-distance weighted mean;
    the default is the plain unweighted mean.
    """

    pool: np.ndarray = field(repr=False)  # shape (n, d), C-contiguous
    times: np.ndarray = field(repr=False)  # shape (n,)
    k: int
    schema: tuple[str, ...]
    weighted: bool = False

    @property
    def pool_size(self) -> int:
        return len(self.times)

    def predict(self, x: FeatureVector) -> float:
        return predict_knn(self, x)

    def append(self, x: FeatureVector, time_ms: float) -> KnnModel:
        return append_observation(self, x, time_ms)


def fit_knn(
    pool: list[tuple[FeatureVector, float]],
    k: int = DEFAULT_K,
    weighted: bool = False,
) -> KnnModel:
    """Store the pool verbatim; no computation happens until prediction."""
    if k < 1:
        raise DegenerateFitError(f"k must be at least 1, got {k}")
    if len(pool) < k:
        raise DegenerateFitError(f"pool of {len(pool)} is smaller than k={k}")
    vectors = [x for x, _ in pool]
    times = [t for _, t in pool]
    matrix, schema = vectors_to_matrix(vectors)
    times_arr = np.asarray(times, dtype=float)
    if not np.all(np.isfinite(matrix)) or not np.all(np.isfinite(times_arr)):
        raise DegenerateFitError("non-finite values in training data")
    if np.any(times_arr <= 0):
        raise DegenerateFitError("pool times must be positive")
    return KnnModel(
        pool=np.ascontiguousarray(matrix),
        times=times_arr,
        k=k,
        schema=schema,
        weighted=weighted,
    )


def predict_knn(model: KnnModel, x: FeatureVector) -> float:
    """Mean time of the k nearest pool entries.

    The neighbour scan runs on the selected kernel backend; the mean is
    accumulated here in selection order so both backends agree exactly.
    """
    if x.schema != model.schema:
        raise SchemaError(f"vector schema {x.schema} != model schema {model.schema}")
    query = np.asarray(x.values, dtype=float)
    idx = _kernels.knn_select(model.pool, query, model.k)
    times = model.times
    if not model.weighted:
        total = 0.0
        for i in idx:
            total += times[i]
        return float(total / model.k)
    # Inverse-distance weighting; exact matches short-circuit to the mean of
    # the zero-distance neighbours.
    dists = [float(np.sqrt(np.sum((model.pool[i] - query) ** 2))) for i in idx]
    exact = [i for i, d in zip(idx, dists) if d == 0.0]
    if exact:
        return float(sum(times[i] for i in exact) / len(exact))
    weights = [1.0 / d for d in dists]
    return float(
        sum(w * times[i] for w, i in zip(weights, idx)) / sum(weights)
    )


def append_observation(model: KnnModel, x: FeatureVector, time_ms: float) -> KnnModel:
    """Return a new model whose pool has (x, time_ms) appended at the end."""
    if time_ms <= 0:
        raise DomainError(f"observation time must be positive, got {time_ms}")
    if x.schema != model.schema:
        raise SchemaError(f"vector schema {x.schema} != model schema {model.schema}")
    new_pool = np.ascontiguousarray(
        np.vstack([model.pool, np.asarray(x.values, dtype=float)])
    )
    new_times = np.append(model.times, float(time_ms))
    return KnnModel(
        pool=new_pool,
        times=new_times,
        k=model.k,
        schema=model.schema,
        weighted=model.weighted,
    )

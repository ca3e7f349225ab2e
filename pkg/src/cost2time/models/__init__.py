"""Regression model zoo: linear, power-law, kNN, SVR, and the
operator-level composition that sums per-operator predictions."""

from .composite import (
    BASE_FAMILIES,
    DEFAULT_MIN_SAMPLES,
    OPERATOR_SCHEMA,
    OperatorLevelModel,
    fit_operator_level,
    predict_operator_level,
    unseen_kinds,
)
from .io import (
    FORMAT_VERSION,
    dumps_model,
    load_model,
    loads_model,
    model_from_dict,
    model_to_dict,
    save_model,
)
from .knn import DEFAULT_K, KnnModel, append_observation, fit_knn, predict_knn
from .linear import (
    LinearModel,
    PowerLawModel,
    fit_ols,
    fit_power_law,
    predict_linear,
    predict_power_law,
    vectors_to_matrix,
)
from .svr import (
    DEFAULT_C,
    DEFAULT_EPSILON,
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    KERNEL_FAMILIES,
    KernelSpec,
    SvrModel,
    fit_svr,
    kernel_eval,
    kernel_matrix,
    predict_svr,
)

__all__ = [
    "BASE_FAMILIES",
    "DEFAULT_C",
    "DEFAULT_EPSILON",
    "DEFAULT_K",
    "DEFAULT_MAX_ITER",
    "DEFAULT_MIN_SAMPLES",
    "DEFAULT_TOL",
    "FORMAT_VERSION",
    "KERNEL_FAMILIES",
    "OPERATOR_SCHEMA",
    "KernelSpec",
    "KnnModel",
    "LinearModel",
    "OperatorLevelModel",
    "PowerLawModel",
    "SvrModel",
    "append_observation",
    "dumps_model",
    "fit_knn",
    "fit_ols",
    "fit_operator_level",
    "fit_power_law",
    "fit_svr",
    "kernel_eval",
    "kernel_matrix",
    "load_model",
    "loads_model",
    "model_from_dict",
    "model_to_dict",
    "predict_knn",
    "predict_linear",
    "predict_operator_level",
    "predict_power_law",
    "predict_svr",
    "save_model",
    "unseen_kinds",
    "vectors_to_matrix",
]

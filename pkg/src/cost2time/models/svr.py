"""Support vector regression with linear, polynomial, and RBF kernels.

Training solves the epsilon-insensitive dual in the difference variables
beta = alpha - alpha* with a maximal-violating-pair coordinate method (the
numeric core lives in the kernel backend). Features and the target are
z-scored before fitting so the shared hyperparameter defaults behave
across the wildly different scales a cost column and a per-operator count
column can have; predictions are mapped back to milliseconds.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .. import _kernels
from ..errors import ConfigError, ConvergenceWarning, DegenerateFitError, SchemaError
from ..plan import FeatureVector
from .linear import vectors_to_matrix

KERNEL_FAMILIES = ("linear", "polynomial", "rbf")

DEFAULT_C = 100.0
DEFAULT_EPSILON = 0.1
DEFAULT_DEGREE = 3
DEFAULT_COEF0 = 1.0
DEFAULT_TOL = 1e-3
DEFAULT_MAX_ITER = 10000


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus the shape parameters that family uses.

    ``gamma=None`` on a polynomial or RBF spec means "resolve to 1/d at fit
    time", mirroring the common library convention; a fitted model always
    carries the resolved value. The linear kernel takes no parameters.
    """

    family: str
    gamma: float | None = None
    degree: int = DEFAULT_DEGREE
    coef0: float = DEFAULT_COEF0

    def __post_init__(self) -> None:
        if self.family not in KERNEL_FAMILIES:
            raise ConfigError(
                f"unknown kernel family {self.family!r}; "
                f"expected one of {', '.join(KERNEL_FAMILIES)}"
            )
        if self.family == "linear" and self.gamma is not None:
            raise ConfigError("the linear kernel takes no gamma")
        if self.gamma is not None and self.gamma <= 0:
            raise ConfigError(f"gamma must be positive, got {self.gamma}")
        if self.degree < 1:
            raise ConfigError(f"degree must be at least 1, got {self.degree}")

    @staticmethod
    def linear() -> KernelSpec:
        return KernelSpec(family="linear")

    @staticmethod
    def polynomial(
        degree: int = DEFAULT_DEGREE,
        gamma: float | None = None,
        coef0: float = DEFAULT_COEF0,
    ) -> KernelSpec:
        return KernelSpec(family="polynomial", gamma=gamma, degree=degree, coef0=coef0)

    @staticmethod
    def rbf(gamma: float | None = None) -> KernelSpec:
        return KernelSpec(family="rbf", gamma=gamma)

    def resolved(self, n_features: int) -> KernelSpec:
        """Return a spec whose gamma is a concrete number (1/d when unset)."""
        if self.family == "linear" or self.gamma is not None:
            return self
        if n_features < 1:
            raise DegenerateFitError("cannot resolve gamma without features")
        return KernelSpec(
            family=self.family,
            gamma=1.0 / n_features,
            degree=self.degree,
            coef0=self.coef0,
        )


def kernel_matrix(spec: KernelSpec, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Pairwise kernel values, shape (len(left), len(right)).

    Gamma must already be resolved for the families that use it. The Gram
    construction is shared by both compute backends, so the solver inputs
    match bit for bit.
    """
    inner = left @ right.T
    if spec.family == "linear":
        return inner
    if spec.gamma is None:
        raise ConfigError("kernel gamma is unresolved; call spec.resolved(d) first")
    if spec.family == "polynomial":
        return (spec.gamma * inner + spec.coef0) ** spec.degree
    sq_left = np.sum(left * left, axis=1)
    sq_right = np.sum(right * right, axis=1)
    sq_dist = sq_left[:, None] + sq_right[None, :] - 2.0 * inner
    np.clip(sq_dist, 0.0, None, out=sq_dist)
    return np.exp(-spec.gamma * sq_dist)


def kernel_eval(spec: KernelSpec, u, v) -> float:
    """Single kernel value k(u, v); accepts FeatureVectors or plain arrays."""
    if isinstance(u, FeatureVector):
        u = u.values
    if isinstance(v, FeatureVector):
        v = v.values
    u_arr = np.asarray(u, dtype=float)
    v_arr = np.asarray(v, dtype=float)
    if u_arr.shape != v_arr.shape:
        raise SchemaError(
            f"kernel arguments have mismatched lengths {u_arr.shape} vs {v_arr.shape}"
        )
    spec = spec.resolved(u_arr.size) if u_arr.size else spec
    return float(kernel_matrix(spec, u_arr.reshape(1, -1), v_arr.reshape(1, -1))[0, 0])


def _standardize_columns(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    means = matrix.mean(axis=0)
    stds = matrix.std(axis=0)
    stds = np.where(stds == 0.0, 1.0, stds)
    return (matrix - means) / stds, means, stds


@dataclass(frozen=True)
class SvrModel:
    """Fitted regressor: support vectors live in standardized feature space."""

    kernel: KernelSpec
    support_vectors: np.ndarray = field(repr=False)
    dual_coefficients: np.ndarray = field(repr=False)
    bias: float
    feature_means: np.ndarray = field(repr=False)
    feature_stds: np.ndarray = field(repr=False)
    target_mean: float
    target_std: float
    schema: tuple[str, ...]
    C: float = DEFAULT_C
    epsilon: float = DEFAULT_EPSILON
    converged: bool = True
    n_updates: int = 0

    @property
    def n_support(self) -> int:
        return len(self.dual_coefficients)

    def predict(self, x: FeatureVector) -> float:
        return predict_svr(self, x)


def fit_svr(
    vectors: list[FeatureVector],
    targets: list[float],
    kernel: KernelSpec | None = None,
    C: float = DEFAULT_C,
    epsilon: float = DEFAULT_EPSILON,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> SvrModel:
    """Fit an epsilon-SVR mapping feature vectors to times.

    ``max_iter`` counts full sweeps, each worth n pair updates. Hitting the
    cap emits a ConvergenceWarning and marks the model unconverged rather
    than failing: a partially optimized model still predicts.
    """
    if kernel is None:
        kernel = KernelSpec.rbf()
    if C <= 0:
        raise ConfigError(f"C must be positive, got {C}")
    if epsilon < 0:
        raise ConfigError(f"epsilon must be non-negative, got {epsilon}")
    if tol <= 0:
        raise ConfigError(f"tol must be positive, got {tol}")
    if len(vectors) != len(targets):
        raise DegenerateFitError(
            f"{len(vectors)} vectors vs {len(targets)} targets"
        )
    if len(vectors) < 2:
        raise DegenerateFitError("SVR needs at least 2 samples")
    matrix, schema = vectors_to_matrix(vectors)
    y = np.asarray(targets, dtype=float)
    if not np.all(np.isfinite(matrix)) or not np.all(np.isfinite(y)):
        raise DegenerateFitError("non-finite values in training data")
    if np.any(y <= 0):
        raise DegenerateFitError("target times must be positive")

    n, d = matrix.shape
    spec = kernel.resolved(d)
    x_std, means, stds = _standardize_columns(matrix)
    y_mean = float(y.mean())
    y_std = float(y.std())
    if y_std == 0.0:
        y_std = 1.0
    y_scaled = (y - y_mean) / y_std

    gram = kernel_matrix(spec, x_std, x_std)
    beta, bias, updates, converged = _kernels.smo_solve(
        np.ascontiguousarray(gram),
        np.ascontiguousarray(y_scaled),
        C,
        epsilon,
        tol,
        max_iter * n,
    )
    if not converged:
        warnings.warn(
            f"SVR optimization stopped after {updates} pair updates "
            f"without reaching tolerance {tol}",
            ConvergenceWarning,
            stacklevel=2,
        )
    mask = beta != 0.0
    return SvrModel(
        kernel=spec,
        support_vectors=np.ascontiguousarray(x_std[mask]),
        dual_coefficients=np.ascontiguousarray(beta[mask]),
        bias=float(bias),
        feature_means=means,
        feature_stds=stds,
        target_mean=y_mean,
        target_std=float(y_std),
        schema=schema,
        C=C,
        epsilon=epsilon,
        converged=bool(converged),
        n_updates=int(updates),
    )


def predict_svr(model: SvrModel, x: FeatureVector) -> float:
    """Kernel expansion over the support vectors, mapped back to ms."""
    if x.schema != model.schema:
        raise SchemaError(f"vector schema {x.schema} != model schema {model.schema}")
    raw = np.asarray(x.values, dtype=float)
    scaled = (raw - model.feature_means) / model.feature_stds
    value = model.bias
    if model.n_support:
        row = kernel_matrix(model.kernel, scaled.reshape(1, -1), model.support_vectors)
        value += float(np.dot(row[0], model.dual_coefficients))
    return value * model.target_std + model.target_mean

"""JSON persistence for every fitted model family.

One document per model, tagged with its family and a format version so
readers can reject documents they do not understand. Floats go through
Python's shortest-round-trip repr, so save/load is lossless.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import ModelFormatError
from .composite import OperatorLevelModel
from .knn import KnnModel
from .linear import LinearModel, PowerLawModel
from .svr import KernelSpec, SvrModel

FORMAT_VERSION = 1

AnyModel = LinearModel | PowerLawModel | KnnModel | SvrModel | OperatorLevelModel


def _kernel_to_dict(spec: KernelSpec) -> dict:
    doc: dict = {"family": spec.family}
    if spec.family == "polynomial":
        doc.update(gamma=spec.gamma, degree=spec.degree, coef0=spec.coef0)
    elif spec.family == "rbf":
        doc.update(gamma=spec.gamma)
    return doc


def _kernel_from_dict(doc: dict) -> KernelSpec:
    family = doc.get("family")
    if family == "linear":
        return KernelSpec.linear()
    if family == "polynomial":
        return KernelSpec.polynomial(
            degree=int(doc["degree"]),
            gamma=doc.get("gamma"),
            coef0=float(doc["coef0"]),
        )
    if family == "rbf":
        return KernelSpec.rbf(gamma=doc.get("gamma"))
    raise ModelFormatError(f"unknown kernel family {family!r}")


def model_to_dict(model: AnyModel) -> dict:
    """Serialize any fitted model to a JSON-ready dictionary."""
    if isinstance(model, LinearModel):
        return {
            "format_version": FORMAT_VERSION,
            "family": "ols",
            "intercept": model.intercept,
            "coefficients": list(model.coefficients),
            "schema": list(model.schema),
        }
    if isinstance(model, PowerLawModel):
        return {
            "format_version": FORMAT_VERSION,
            "family": "power_law",
            "coefficient": model.coefficient,
            "exponent": model.exponent,
        }
    if isinstance(model, KnnModel):
        return {
            "format_version": FORMAT_VERSION,
            "family": "knn",
            "k": model.k,
            "weighted": model.weighted,
            "schema": list(model.schema),
            "pool": [[float(v) for v in row] for row in model.pool],
            "times": [float(t) for t in model.times],
        }
    if isinstance(model, SvrModel):
        return {
            "format_version": FORMAT_VERSION,
            "family": "svr",
            "kernel": _kernel_to_dict(model.kernel),
            "support_vectors": [[float(v) for v in row] for row in model.support_vectors],
            "dual_coefficients": [float(b) for b in model.dual_coefficients],
            "bias": model.bias,
            "feature_means": [float(v) for v in model.feature_means],
            "feature_stds": [float(v) for v in model.feature_stds],
            "target_mean": model.target_mean,
            "target_std": model.target_std,
            "schema": list(model.schema),
            "C": model.C,
            "epsilon": model.epsilon,
            "converged": model.converged,
            "n_updates": model.n_updates,
        }
    if isinstance(model, OperatorLevelModel):
        return {
            "format_version": FORMAT_VERSION,
            "family": "operator_level",
            "base_family": model.base_family,
            "min_samples": model.min_samples,
            "per_kind": {
                kind: model_to_dict(sub) for kind, sub in sorted(model.per_kind.items())
            },
            "fallback": model_to_dict(model.fallback),
        }
    raise ModelFormatError(f"cannot serialize object of type {type(model).__name__}")


def _require(doc: dict, key: str):
    if key not in doc:
        raise ModelFormatError(f"model document is missing key {key!r}")
    return doc[key]


def model_from_dict(doc: dict) -> AnyModel:
    """Rebuild a model from its dictionary form.

    Rejects unknown families and any format version other than the one this
    code writes.
    """
    if not isinstance(doc, dict):
        raise ModelFormatError("model document must be a JSON object")
    version = _require(doc, "format_version")
    if version != FORMAT_VERSION:
        raise ModelFormatError(
            f"unsupported model format version {version!r} (expected {FORMAT_VERSION})"
        )
    family = _require(doc, "family")
    if family == "ols":
        return LinearModel(
            intercept=float(_require(doc, "intercept")),
            coefficients=tuple(float(c) for c in _require(doc, "coefficients")),
            schema=tuple(_require(doc, "schema")),
        )
    if family == "power_law":
        return PowerLawModel(
            coefficient=float(_require(doc, "coefficient")),
            exponent=float(_require(doc, "exponent")),
        )
    if family == "knn":
        schema = tuple(_require(doc, "schema"))
        pool = np.asarray(_require(doc, "pool"), dtype=float)
        if pool.size == 0:
            pool = pool.reshape(0, len(schema))
        return KnnModel(
            pool=np.ascontiguousarray(pool),
            times=np.asarray(_require(doc, "times"), dtype=float),
            k=int(_require(doc, "k")),
            schema=schema,
            weighted=bool(doc.get("weighted", False)),
        )
    if family == "svr":
        means = np.asarray(_require(doc, "feature_means"), dtype=float)
        support = np.asarray(_require(doc, "support_vectors"), dtype=float)
        if support.size == 0:
            support = support.reshape(0, len(means))
        return SvrModel(
            kernel=_kernel_from_dict(_require(doc, "kernel")),
            support_vectors=np.ascontiguousarray(support),
            dual_coefficients=np.asarray(_require(doc, "dual_coefficients"), dtype=float),
            bias=float(_require(doc, "bias")),
            feature_means=means,
            feature_stds=np.asarray(_require(doc, "feature_stds"), dtype=float),
            target_mean=float(_require(doc, "target_mean")),
            target_std=float(_require(doc, "target_std")),
            schema=tuple(_require(doc, "schema")),
            C=float(_require(doc, "C")),
            epsilon=float(_require(doc, "epsilon")),
            converged=bool(doc.get("converged", True)),
            n_updates=int(doc.get("n_updates", 0)),
        )
    if family == "operator_level":
        return OperatorLevelModel(
            base_family=str(_require(doc, "base_family")),
            per_kind={
                kind: model_from_dict(sub)
                for kind, sub in _require(doc, "per_kind").items()
            },
            fallback=model_from_dict(_require(doc, "fallback")),
            min_samples=int(_require(doc, "min_samples")),
        )
    raise ModelFormatError(f"unknown model family {family!r}")


def dumps_model(model: AnyModel) -> str:
    return json.dumps(model_to_dict(model), allow_nan=False, indent=2)


def loads_model(text: str) -> AnyModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"model document is not valid JSON: {exc}") from None
    return model_from_dict(doc)


def save_model(model: AnyModel, path: str | Path) -> None:
    Path(path).write_text(dumps_model(model) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> AnyModel:
    return loads_model(Path(path).read_text(encoding="utf-8"))

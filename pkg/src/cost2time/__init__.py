"""cost2time: execution-time prediction from optimizer plan costs.

Parse execution-plan documents, extract cost and structural features, fit
any of four regressor families at the plan or operator level, and evaluate
them with a seeded k-fold protocol. A Cython kernel accelerates the hot
loops when built; a pure numpy fallback keeps everything runnable without
a compiler.
"""

from ._kernels import backend_name
from .corpus import (
    CardinalityProfile,
    CorpusStore,
    CostModelParams,
    SyntheticSpec,
    TemplateSpec,
    TimeLaw,
    append_sample,
    default_synthetic_spec,
    generate_synthetic,
    ingest,
    load_corpus,
    optimizer_cost,
    parse_time_law,
    save_corpus,
)
from .errors import (
    ConfigError,
    ConvergenceWarning,
    Cost2TimeError,
    DegenerateFitError,
    DomainError,
    DuplicateError,
    EvalError,
    ModelFormatError,
    ParseError,
    SchemaError,
)
from .evaluation import (
    EvalConfig,
    EvalReport,
    MetricsSummary,
    OutlierEntry,
    OutlierReport,
    QueryResult,
    aggregate_metrics,
    cross_validate,
    kfold_split,
    load_report,
    outlier_report,
    relative_error,
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
    append_observation,
    fit_knn,
    fit_ols,
    fit_operator_level,
    fit_power_law,
    fit_svr,
    kernel_eval,
    load_model,
    predict_knn,
    predict_linear,
    predict_operator_level,
    predict_power_law,
    predict_svr,
    save_model,
)
from .plan import (
    COST_ONLY_SCHEMA,
    FeatureVector,
    FlattenedPlan,
    OperatorRecord,
    PlanNode,
    PlanSample,
    build_flattened_schema,
    decompose_operators,
    flatten_plan,
    normalize_operator_kind,
    parse_explain_document,
    sample_from_document,
    sample_to_document,
    to_feature_vector,
)

__version__ = "0.1.0"

__all__ = [
    "COST_ONLY_SCHEMA",
    "CardinalityProfile",
    "ConfigError",
    "ConvergenceWarning",
    "CorpusStore",
    "Cost2TimeError",
    "CostModelParams",
    "DegenerateFitError",
    "DomainError",
    "DuplicateError",
    "EvalConfig",
    "EvalError",
    "EvalReport",
    "FeatureVector",
    "FlattenedPlan",
    "KernelSpec",
    "KnnModel",
    "LinearModel",
    "MetricsSummary",
    "ModelFormatError",
    "OperatorLevelModel",
    "OperatorRecord",
    "OutlierEntry",
    "OutlierReport",
    "ParseError",
    "PlanNode",
    "PlanSample",
    "PowerLawModel",
    "QueryResult",
    "SchemaError",
    "SvrModel",
    "SyntheticSpec",
    "TemplateSpec",
    "TimeLaw",
    "__version__",
    "aggregate_metrics",
    "append_observation",
    "append_sample",
    "backend_name",
    "build_flattened_schema",
    "cross_validate",
    "decompose_operators",
    "default_synthetic_spec",
    "fit_knn",
    "fit_ols",
    "fit_operator_level",
    "fit_power_law",
    "fit_svr",
    "flatten_plan",
    "generate_synthetic",
    "ingest",
    "kernel_eval",
    "kfold_split",
    "load_corpus",
    "load_model",
    "load_report",
    "normalize_operator_kind",
    "optimizer_cost",
    "outlier_report",
    "parse_explain_document",
    "parse_time_law",
    "predict_knn",
    "predict_linear",
    "predict_operator_level",
    "predict_power_law",
    "predict_svr",
    "relative_error",
    "sample_from_document",
    "sample_to_document",
    "save_corpus",
    "save_model",
    "save_report",
    "template_cov",
    "to_feature_vector",
    "write_per_query_csv",
    "write_scatter_csv",
]

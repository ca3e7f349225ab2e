"""Execution-plan parsing and feature extraction.

A plan document is a JSON object wrapping one executed (or planned) query:

    {"query_id": str, "template_id": str|null, "execution_time_ms": num|null,
     "plan": {"Node Type": str, "Startup Cost": num, "Total Cost": num,
              "Plan Rows": num, "Actual Total Time": num?, "Actual Loops": num?,
              "Plans": [<node>, ...]}}

The node keys are a strict subset of PostgreSQL ``EXPLAIN (ANALYZE, FORMAT
JSON)`` output; unknown keys are ignored. From a parsed sample this module
derives the three feature representations used by the predictors: the raw
plan cost, the flattened plan (per-operator-kind instance counts and summed
cardinality estimates), and the per-operator decomposition with exclusive
costs and times.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field

from .errors import ParseError, SchemaError

logger = logging.getLogger(__name__)

# Operator kinds are an open set of normalized tokens: lowercase, with any
# whitespace run collapsed to a single underscore. Unknown engine-specific
# operator names survive normalization verbatim.
_WHITESPACE = re.compile(r"\s+")

COST_ONLY_SCHEMA = ("plan_cost",)


def normalize_operator_kind(raw: str) -> str:
    """Normalize a raw operator name to its canonical token.

    ``"Seq Scan"`` and ``"seq  scan"`` both map to ``"seq_scan"``. The rule is
    idempotent, so already-normalized tokens pass through unchanged.
    """
    if not raw or not raw.strip():
        raise ParseError("empty operator name")
    return _WHITESPACE.sub("_", raw.strip().lower())


@dataclass(frozen=True)
class PlanNode:
    """One operator in a plan tree.

    Costs are in optimizer cost units (arbitrary scale); times are
    milliseconds. ``actual_total_time_ms`` is the per-loop inclusive time as
    reported by the engine; multiply by ``actual_loops`` for the node's total
    inclusive time.
    """

    kind: str
    startup_cost: float
    total_cost: float
    plan_rows: float
    actual_total_time_ms: float | None = None
    actual_loops: int | None = None
    children: tuple[PlanNode, ...] = ()

    def __post_init__(self) -> None:
        if self.startup_cost < 0:
            raise ParseError(f"negative startup cost {self.startup_cost}")
        if self.total_cost < self.startup_cost:
            raise ParseError(
                f"total cost {self.total_cost} below startup cost {self.startup_cost}"
            )
        if self.plan_rows < 0:
            raise ParseError(f"negative plan rows {self.plan_rows}")
        if self.actual_total_time_ms is not None:
            if self.actual_total_time_ms < 0:
                raise ParseError(f"negative actual time {self.actual_total_time_ms}")
            if self.actual_loops is None:
                object.__setattr__(self, "actual_loops", 1)
        if self.actual_loops is not None and self.actual_loops < 1:
            raise ParseError(f"actual loops {self.actual_loops} below 1")

    @property
    def has_timing(self) -> bool:
        return self.actual_total_time_ms is not None

    def walk(self):
        """Yield this node then its descendants, pre-order."""
        yield self
        for child in self.children:
            yield from child.walk()


@dataclass(frozen=True)
class PlanSample:
    """One executed query: its plan tree plus identity and measured time.

    Samples without ``execution_time_ms`` are prediction-only: they can be
    fed to predictors but are rejected by fitting routines.
    """

    query_id: str
    root: PlanNode
    template_id: str | None = None
    execution_time_ms: float | None = None
    has_nonbinary_nodes: bool = False

    def __post_init__(self) -> None:
        if self.execution_time_ms is not None and self.execution_time_ms <= 0:
            raise ParseError(
                f"execution_time_ms must be positive, got {self.execution_time_ms}"
            )

    @property
    def plan_cost(self) -> float:
        """The optimizer's cost for the whole plan (the root's total cost)."""
        return self.root.total_cost

    @property
    def is_timed(self) -> bool:
        return self.execution_time_ms is not None


@dataclass(frozen=True)
class FlattenedPlan:
    """Per-operator-kind (instance count, summed cardinality) plan summary.

    Kinds absent from the plan are absent from ``entries`` (implicitly
    ``(0, 0)``); stored counts are therefore always >= 1.
    """

    entries: dict[str, tuple[int, float]]

    def count(self, kind: str) -> int:
        return self.entries.get(kind, (0, 0.0))[0]

    def cardinality_sum(self, kind: str) -> float:
        return self.entries.get(kind, (0, 0.0))[1]


@dataclass(frozen=True)
class FeatureVector:
    """An ordered list of feature values plus the schema naming each slot.

    Two vectors are comparable (same space) only under identical schemas.
    """

    values: tuple[float, ...]
    schema: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.values) != len(self.schema):
            raise SchemaError(
                f"{len(self.values)} values for {len(self.schema)} schema entries"
            )


@dataclass(frozen=True)
class OperatorRecord:
    """One plan node's costs and times, inclusive and exclusive.

    Exclusive values subtract the children's inclusive values and are clamped
    at zero, so they are safe training targets even for operators (like
    Limit) whose parents can be cheaper than their children. Time fields are
    None for prediction-only samples.
    """

    kind: str
    inclusive_cost: float
    exclusive_cost: float
    plan_rows: float
    inclusive_time_ms: float | None = None
    exclusive_time_ms: float | None = None


def _require(node: dict, key: str, path: str):
    if key not in node:
        raise ParseError(f"{path}: missing required key {key!r}")
    return node[key]


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{path}: expected a number, got {value!r}")
    return float(value)


def _parse_node(node, path: str) -> PlanNode:
    if not isinstance(node, dict):
        raise ParseError(f"{path}: expected an object")
    raw_kind = _require(node, "Node Type", path)
    if not isinstance(raw_kind, str) or not raw_kind.strip():
        raise ParseError(f"{path}: Node Type must be a non-empty string")
    startup = _number(_require(node, "Startup Cost", path), f"{path}.Startup Cost")
    total = _number(_require(node, "Total Cost", path), f"{path}.Total Cost")
    rows = _number(_require(node, "Plan Rows", path), f"{path}.Plan Rows")

    actual_time = node.get("Actual Total Time")
    if actual_time is not None:
        actual_time = _number(actual_time, f"{path}.Actual Total Time")
    actual_loops = node.get("Actual Loops")
    if actual_loops is not None:
        loops = _number(actual_loops, f"{path}.Actual Loops")
        if loops != int(loops):
            raise ParseError(f"{path}.Actual Loops: expected an integer, got {loops}")
        actual_loops = int(loops)

    raw_children = node.get("Plans", [])
    if not isinstance(raw_children, list):
        raise ParseError(f"{path}.Plans: expected a list")
    children = tuple(
        _parse_node(child, f"{path}.Plans[{i}]") for i, child in enumerate(raw_children)
    )
    try:
        return PlanNode(
            kind=normalize_operator_kind(raw_kind),
            startup_cost=startup,
            total_cost=total,
            plan_rows=rows,
            actual_total_time_ms=actual_time,
            actual_loops=actual_loops,
            children=children,
        )
    except ParseError as exc:
        raise ParseError(f"{path}: {exc}") from None


def parse_explain_document(text: str | bytes) -> PlanSample:
    """Parse one plan document into a :class:`PlanSample`.

    Raises :class:`ParseError` naming the offending path for malformed JSON,
    missing required keys, negative costs, or total < startup cost. A node
    with more than two children is parsed anyway; the sample's
    ``has_nonbinary_nodes`` flag records that the plan is not a binary tree.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    return sample_from_document(doc)


def sample_from_document(doc) -> PlanSample:
    """Build a :class:`PlanSample` from an already-decoded document object."""
    if not isinstance(doc, dict):
        raise ParseError("document root: expected an object")
    query_id = _require(doc, "query_id", "document")
    if not isinstance(query_id, str) or not query_id:
        raise ParseError("document.query_id: expected a non-empty string")
    template_id = doc.get("template_id")
    if template_id is not None and not isinstance(template_id, str):
        raise ParseError("document.template_id: expected a string or null")
    exec_time = doc.get("execution_time_ms")
    if exec_time is not None:
        exec_time = _number(exec_time, "document.execution_time_ms")
    root = _parse_node(_require(doc, "plan", "document"), "plan")

    nonbinary = any(len(node.children) > 2 for node in root.walk())
    if nonbinary:
        logger.warning("plan for query %s has a node with >2 children", query_id)
    try:
        return PlanSample(
            query_id=query_id,
            root=root,
            template_id=template_id,
            execution_time_ms=exec_time,
            has_nonbinary_nodes=nonbinary,
        )
    except ParseError as exc:
        raise ParseError(f"document: {exc}") from None


def _node_to_dict(node: PlanNode) -> dict:
    out: dict = {
        "Node Type": node.kind,
        "Startup Cost": node.startup_cost,
        "Total Cost": node.total_cost,
        "Plan Rows": node.plan_rows,
    }
    if node.actual_total_time_ms is not None:
        out["Actual Total Time"] = node.actual_total_time_ms
        out["Actual Loops"] = node.actual_loops
    if node.children:
        out["Plans"] = [_node_to_dict(child) for child in node.children]
    return out


def sample_to_document(sample: PlanSample) -> dict:
    """Serialize a sample back to the plan-document object form.

    Re-parsing the result yields a structurally identical sample (operator
    names are emitted as their normalized tokens, which normalization leaves
    unchanged).
    """
    return {
        "query_id": sample.query_id,
        "template_id": sample.template_id,
        "execution_time_ms": sample.execution_time_ms,
        "plan": _node_to_dict(sample.root),
    }


def flatten_plan(sample: PlanSample) -> FlattenedPlan:
    """Summarize a plan as {kind: (instance count, sum of plan_rows)}."""
    entries: dict[str, tuple[int, float]] = {}
    for node in sample.root.walk():
        count, card = entries.get(node.kind, (0, 0.0))
        entries[node.kind] = (count + 1, card + node.plan_rows)
    return FlattenedPlan(entries=entries)


def build_flattened_schema(samples) -> tuple[str, ...]:
    """Build the fixed flattened-feature schema covering every kind seen.

    Kinds are sorted so the schema is deterministic; each kind contributes a
    ``<kind>.count`` and ``<kind>.card_sum`` slot.
    """
    kinds: set[str] = set()
    for sample in samples:
        for node in sample.root.walk():
            kinds.add(node.kind)
    schema: list[str] = []
    for kind in sorted(kinds):
        schema.append(f"{kind}.count")
        schema.append(f"{kind}.card_sum")
    return tuple(schema)


def to_feature_vector(
    sample: PlanSample,
    mode: str = "cost_only",
    schema: tuple[str, ...] | None = None,
) -> FeatureVector:
    """Project a sample onto a feature vector.

    ``cost_only`` yields the single-entry ``[plan_cost]`` vector. ``flattened``
    lays out each kind's (count, cardinality sum) per the supplied schema,
    zero-filling kinds absent from the plan; a kind present in the plan but
    missing from the schema raises :class:`SchemaError` (the caller must
    rebuild the schema from a corpus that covers it).
    """
    if mode == "cost_only":
        return FeatureVector(values=(sample.plan_cost,), schema=COST_ONLY_SCHEMA)
    if mode != "flattened":
        raise SchemaError(f"unknown feature mode {mode!r}")

    flat = flatten_plan(sample)
    if schema is None:
        schema = build_flattened_schema([sample])
    covered = {name.rsplit(".", 1)[0] for name in schema}
    missing = sorted(set(flat.entries) - covered)
    if missing:
        raise SchemaError(
            f"plan contains kinds absent from schema: {', '.join(missing)}"
        )
    values = []
    for name in schema:
        kind, _, field_name = name.rpartition(".")
        if field_name == "count":
            values.append(float(flat.count(kind)))
        elif field_name == "card_sum":
            values.append(float(flat.cardinality_sum(kind)))
        else:
            raise SchemaError(f"malformed schema entry {name!r}")
    return FeatureVector(values=tuple(values), schema=tuple(schema))


def decompose_operators(sample: PlanSample) -> list[OperatorRecord]:
    """Decompose a plan into per-operator records, pre-order.

    A node's inclusive time is ``actual_total_time_ms * actual_loops``;
    exclusive cost and time subtract the children's inclusive values, clamped
    at zero. Records carry None times when the plan has no measured timing.
    """
    def visit(node: PlanNode) -> tuple[list[OperatorRecord], float, float | None]:
        child_records: list[OperatorRecord] = []
        child_cost = 0.0
        child_time: float | None = 0.0
        for child in node.children:
            c_records, c_cost, c_time = visit(child)
            child_records.extend(c_records)
            child_cost += c_cost
            if child_time is not None and c_time is not None:
                child_time += c_time
            else:
                child_time = None

        inclusive_cost = node.total_cost
        exclusive_cost = max(0.0, inclusive_cost - child_cost)
        if node.actual_total_time_ms is not None:
            inclusive_time = node.actual_total_time_ms * node.actual_loops
        else:
            inclusive_time = None
        if inclusive_time is not None and child_time is not None:
            exclusive_time = max(0.0, inclusive_time - child_time)
        else:
            exclusive_time = None
        record = OperatorRecord(
            kind=node.kind,
            inclusive_cost=inclusive_cost,
            exclusive_cost=exclusive_cost,
            plan_rows=node.plan_rows,
            inclusive_time_ms=inclusive_time,
            exclusive_time_ms=exclusive_time,
        )
        return [record] + child_records, inclusive_cost, inclusive_time

    records, _, _ = visit(sample.root)
    return records

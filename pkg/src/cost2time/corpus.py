"""Corpus persistence, ingestion, and synthetic generation.

A corpus is an ordered collection of plan samples with unique query ids.
The synthetic generator plants a known cost-to-time relationship: it draws
a cardinality profile per instance, prices it with the five-term
analytical cost formula, spreads that cost over a plausible plan tree, and
derives execution times from a configurable law plus multiplicative noise.
That gives the evaluation harness corpora whose right answers are known.
"""

from __future__ import annotations

import json
import logging
import os
import random
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

from .errors import ConfigError, DuplicateError, ParseError
from .plan import PlanNode, PlanSample, sample_from_document, sample_to_document

logger = logging.getLogger(__name__)

CORPUS_VERSION = 1

LAW_FAMILIES = ("linear", "power", "bimodal")


@dataclass(frozen=True)
class CostModelParams:
    """Cost per unit of the five work terms an optimizer prices.

    In order: sequential page reads, random page reads, tuples processed,
    index entries processed, and per-operator evaluations. The defaults are
    plausible relative magnitudes for synthetic data, not engine ground
    truth.
    """

    c_s: float = 1.0
    c_r: float = 4.0
    c_t: float = 0.01
    c_i: float = 0.005
    c_o: float = 0.0025

    def __post_init__(self) -> None:
        for name in ("c_s", "c_r", "c_t", "c_i", "c_o"):
            value = getattr(self, name)
            if not (value >= 0 and value == value and value != float("inf")):
                raise ConfigError(f"{name} must be finite and non-negative, got {value}")


@dataclass(frozen=True)
class CardinalityProfile:
    """Unit counts for the five cost terms; reals are fine for aggregates."""

    n_s: float = 0.0
    n_r: float = 0.0
    n_t: float = 0.0
    n_i: float = 0.0
    n_o: float = 0.0

    def __post_init__(self) -> None:
        for name in ("n_s", "n_r", "n_t", "n_i", "n_o"):
            value = getattr(self, name)
            if not (value >= 0 and value == value and value != float("inf")):
                raise ConfigError(f"{name} must be finite and non-negative, got {value}")


def optimizer_cost(params: CostModelParams, profile: CardinalityProfile) -> float:
    """Five-term dot product: what the optimizer would charge this profile."""
    return (
        profile.n_s * params.c_s
        + profile.n_r * params.c_r
        + profile.n_t * params.c_t
        + profile.n_i * params.c_i
        + profile.n_o * params.c_o
    )


@dataclass(frozen=True)
class TimeLaw:
    """How a template's execution time depends on its optimizer cost.

    linear: time = a * cost. power: time = a * cost^b. bimodal ignores the
    cost entirely and draws t_low with probability p, else t_high; paired
    with a constant-cost template it reproduces the situation where the
    planner prices wildly different workloads identically.
    """

    family: str
    a: float = 0.0
    b: float = 0.0
    t_low: float = 0.0
    t_high: float = 0.0
    p: float = 0.0

    def __post_init__(self) -> None:
        if self.family not in LAW_FAMILIES:
            raise ConfigError(
                f"unknown time law {self.family!r}; "
                f"expected one of {', '.join(LAW_FAMILIES)}"
            )
        if self.family in ("linear", "power") and self.a <= 0:
            raise ConfigError(f"law coefficient must be positive, got {self.a}")
        if self.family == "bimodal":
            if self.t_low <= 0 or self.t_high <= 0:
                raise ConfigError("bimodal modes must be positive times")
            if not 0.0 <= self.p <= 1.0:
                raise ConfigError(f"bimodal probability must lie in [0, 1], got {self.p}")

    @staticmethod
    def linear(a: float) -> TimeLaw:
        return TimeLaw(family="linear", a=a)

    @staticmethod
    def power(a: float, b: float) -> TimeLaw:
        return TimeLaw(family="power", a=a, b=b)

    @staticmethod
    def bimodal(t_low: float, t_high: float, p: float) -> TimeLaw:
        return TimeLaw(family="bimodal", t_low=t_low, t_high=t_high, p=p)

    def to_dict(self) -> dict:
        if self.family == "linear":
            return {"family": "linear", "a": self.a}
        if self.family == "power":
            return {"family": "power", "a": self.a, "b": self.b}
        return {
            "family": "bimodal",
            "t_low": self.t_low,
            "t_high": self.t_high,
            "p": self.p,
        }


def _validate_shape(shape, where: str) -> int:
    """Check a nested (kind, *children) tuple; return its node count."""
    if not isinstance(shape, (tuple, list)) or not shape:
        raise ConfigError(f"{where}: plan shape nodes must be non-empty sequences")
    kind = shape[0]
    if not isinstance(kind, str) or not kind.strip():
        raise ConfigError(f"{where}: plan shape node kind must be a non-empty string")
    children = shape[1:]
    if len(children) > 2:
        raise ConfigError(f"{where}: plan shape nodes take at most two children")
    return 1 + sum(_validate_shape(child, where) for child in children)


def _shape_to_jsonable(shape):
    return [shape[0]] + [_shape_to_jsonable(child) for child in shape[1:]]


@dataclass(frozen=True)
class TemplateSpec:
    """One synthetic query template.

    cardinality_ranges holds five (lo, hi) sampling ranges, one per cost
    term; rows_range bounds the per-node estimated row counts.
    """

    template_id: str
    plan_shape: tuple
    cardinality_ranges: tuple[tuple[float, float], ...]
    rows_range: tuple[int, int]
    law: TimeLaw

    def __post_init__(self) -> None:
        if not self.template_id:
            raise ConfigError("template_id must be non-empty")
        _validate_shape(self.plan_shape, f"template {self.template_id}")
        if len(self.cardinality_ranges) != 5:
            raise ConfigError(
                f"template {self.template_id}: need 5 cardinality ranges, "
                f"got {len(self.cardinality_ranges)}"
            )
        for lo, hi in self.cardinality_ranges:
            if not 0 <= lo <= hi:
                raise ConfigError(
                    f"template {self.template_id}: bad cardinality range ({lo}, {hi})"
                )
        lo, hi = self.rows_range
        if not 0 <= lo <= hi:
            raise ConfigError(
                f"template {self.template_id}: bad rows range ({lo}, {hi})"
            )
        # A bimodal template models a planner blind spot: instances whose
        # costs are identical while their times split between two modes.
        # That requires degenerate cardinality ranges, so the optimizer
        # cost cannot vary within the template.
        if self.law.family == "bimodal":
            if any(lo != hi for lo, hi in self.cardinality_ranges):
                raise ConfigError(
                    f"template {self.template_id}: a bimodal law requires "
                    "constant cardinality ranges (lo == hi) so every "
                    "instance gets the same optimizer cost"
                )

    def to_dict(self) -> dict:
        return {
            "template_id": self.template_id,
            "plan_shape": _shape_to_jsonable(self.plan_shape),
            "cardinality_ranges": [list(r) for r in self.cardinality_ranges],
            "rows_range": list(self.rows_range),
            "law": self.law.to_dict(),
        }


@dataclass(frozen=True)
class SyntheticSpec:
    """Full recipe for a generated corpus; the seed makes it reproducible."""

    templates: tuple[TemplateSpec, ...]
    instances_per_template: int
    noise: float = 0.0
    cost_params: CostModelParams = field(default_factory=CostModelParams)
    seed: int = 42
    label: str = "synthetic"

    def __post_init__(self) -> None:
        if not self.templates:
            raise ConfigError("need at least one template")
        if self.instances_per_template < 1:
            raise ConfigError(
                f"instances_per_template must be at least 1, "
                f"got {self.instances_per_template}"
            )
        if not 0.0 <= self.noise < 0.5:
            raise ConfigError(f"noise must lie in [0, 0.5), got {self.noise}")
        ids = [t.template_id for t in self.templates]
        if len(set(ids)) != len(ids):
            raise ConfigError("template ids must be unique")

    def to_dict(self) -> dict:
        return {
            "templates": [t.to_dict() for t in self.templates],
            "instances_per_template": self.instances_per_template,
            "noise": self.noise,
            "cost_params": {
                "c_s": self.cost_params.c_s,
                "c_r": self.cost_params.c_r,
                "c_t": self.cost_params.c_t,
                "c_i": self.cost_params.c_i,
                "c_o": self.cost_params.c_o,
            },
            "seed": self.seed,
            "label": self.label,
        }


@dataclass(frozen=True)
class CorpusStore:
    """Ordered, duplicate-free collection of samples plus file metadata."""

    samples: tuple[PlanSample, ...]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for sample in self.samples:
            if sample.query_id in seen:
                raise DuplicateError(f"duplicate query_id {sample.query_id!r}")
            seen.add(sample.query_id)

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self) -> Iterator[PlanSample]:
        return iter(self.samples)


def _default_metadata(label: str, source) -> dict:
    return {
        "version": CORPUS_VERSION,
        "label": label,
        "source": source,
        "created_at": None,
    }


def _subtree_masses(shape, rows: Sequence[float], order: list) -> list[float]:
    """Post-order accumulation of 1 + plan_rows over each subtree.

    The +1 per node keeps every mass strictly positive even for zero-row
    plans, which guarantees parents outweigh their children.
    """
    masses = [0.0] * len(rows)

    def visit(node_shape, index: int) -> tuple[float, int]:
        my_index = index
        index += 1
        total = 1.0 + rows[my_index]
        for child in node_shape[1:]:
            child_mass, index = visit(child, index)
            total += child_mass
        masses[my_index] = total
        return total, index

    visit(shape, 0)
    return masses


def _build_nodes(
    shape,
    rows: Sequence[float],
    masses: Sequence[float],
    root_mass: float,
    cost: float,
    time_ms: float,
    index: int,
) -> tuple[PlanNode, int]:
    my_index = index
    index += 1
    children = []
    for child_shape in shape[1:]:
        child, index = _build_nodes(
            child_shape, rows, masses, root_mass, cost, time_ms, index
        )
        children.append(child)
    share = masses[my_index] / root_mass
    node = PlanNode(
        kind=shape[0],
        startup_cost=0.0,
        total_cost=cost * share,
        plan_rows=rows[my_index],
        actual_total_time_ms=time_ms * share,
        actual_loops=1.0,
        children=tuple(children),
    )
    return node, index


def _law_time(law: TimeLaw, cost: float, rng: random.Random) -> float:
    if law.family == "linear":
        return law.a * cost
    if law.family == "power":
        if cost <= 0:
            raise ConfigError("power law needs a positive cost; check ranges")
        return law.a * cost**law.b
    return law.t_low if rng.random() < law.p else law.t_high


def generate_synthetic(spec: SyntheticSpec) -> CorpusStore:
    """Produce a corpus from a single seeded random stream.

    Per instance: five profile draws, one row draw per plan node, a mode
    draw for bimodal laws, then one noise draw. Node costs and times are
    inclusive and proportional to subtree cardinality mass, so exclusive
    values decompose cleanly without clamping.
    """
    rng = random.Random(spec.seed)
    samples: list[PlanSample] = []
    for template in spec.templates:
        node_count = _validate_shape(template.plan_shape, template.template_id)
        rows_lo, rows_hi = template.rows_range
        for i in range(spec.instances_per_template):
            profile = CardinalityProfile(
                *(rng.uniform(lo, hi) for lo, hi in template.cardinality_ranges)
            )
            cost = optimizer_cost(spec.cost_params, profile)
            rows = [float(rng.randint(rows_lo, rows_hi)) for _ in range(node_count)]
            base_time = _law_time(template.law, cost, rng)
            time_ms = base_time * (1.0 + rng.uniform(-spec.noise, spec.noise))
            if time_ms <= 0:
                raise ConfigError(
                    f"template {template.template_id}: law produced a "
                    f"non-positive time ({time_ms}); check its parameters"
                )
            masses = _subtree_masses(template.plan_shape, rows, [])
            root, _ = _build_nodes(
                template.plan_shape, rows, masses, masses[0], cost, time_ms, 0
            )
            samples.append(
                PlanSample(
                    query_id=f"{template.template_id}-{i:04d}",
                    template_id=template.template_id,
                    root=root,
                    execution_time_ms=time_ms,
                )
            )
    metadata = _default_metadata(spec.label, {"generator": spec.to_dict()})
    return CorpusStore(samples=tuple(samples), metadata=metadata)


_DEFAULT_SHAPES = (
    ("seq_scan",),
    ("sort", ("seq_scan",)),
    ("aggregate", ("hash_join", ("seq_scan",), ("hash", ("seq_scan",)))),
    ("nested_loop", ("index_scan",), ("index_scan",)),
    ("limit", ("sort", ("seq_scan",))),
    ("aggregate", ("merge_join", ("sort", ("seq_scan",)), ("sort", ("index_scan",)))),
)

_DEFAULT_GROWTH = 1.45


def default_synthetic_spec(
    template_count: int = 22,
    instances_per_template: int = 100,
    law: TimeLaw | None = None,
    noise: float = 0.05,
    seed: int = 42,
    label: str = "synthetic",
) -> SyntheticSpec:
    """A ready-made spec with per-template cost clusters.

    Template t samples cardinalities around a base that grows geometrically
    with t, so costs cluster per template and spread over several orders of
    magnitude across the corpus, echoing how benchmark templates behave.
    """
    if law is None:
        law = TimeLaw.linear(2.0)
    templates = []
    for t in range(template_count):
        base = 200.0 * _DEFAULT_GROWTH**t
        ranges = (
            (0.9 * base, 1.1 * base),  # sequential pages
            (0.0, 0.02 * base),  # random pages
            (9.0 * base, 11.0 * base),  # tuples
            (1.8 * base, 2.2 * base),  # index entries
            (0.5 * base, 1.0 * base),  # operator evaluations
        )
        rows_lo = max(1, int(2 * base))
        rows_hi = max(rows_lo + 1, int(4 * base))
        templates.append(
            TemplateSpec(
                template_id=f"T{t:02d}",
                plan_shape=_DEFAULT_SHAPES[t % len(_DEFAULT_SHAPES)],
                cardinality_ranges=ranges,
                rows_range=(rows_lo, rows_hi),
                law=law,
            )
        )
    return SyntheticSpec(
        templates=tuple(templates),
        instances_per_template=instances_per_template,
        noise=noise,
        seed=seed,
        label=label,
    )


def parse_time_law(text: str) -> TimeLaw:
    """Parse CLI law syntax: linear:A, power:A,B, or bimodal:LOW,HIGH,P."""
    family, _, args = text.partition(":")
    parts = [p for p in args.split(",") if p] if args else []
    try:
        values = [float(p) for p in parts]
    except ValueError:
        raise ConfigError(f"bad law parameters in {text!r}") from None
    if family == "linear" and len(values) == 1:
        return TimeLaw.linear(values[0])
    if family == "power" and len(values) == 2:
        return TimeLaw.power(values[0], values[1])
    if family == "bimodal" and len(values) == 3:
        return TimeLaw.bimodal(values[0], values[1], values[2])
    raise ConfigError(
        f"bad time law {text!r}; expected linear:A, power:A,B, or bimodal:LOW,HIGH,P"
    )


def ingest(paths: Sequence[str | Path], label: str = "ingested") -> CorpusStore:
    """Parse plan documents from files, preserving file-then-document order.

    Each file holds either a single JSON object (pretty-printed is fine) or
    one object per line. Errors name the file and the byte offset of the
    offending document.
    """
    samples: list[PlanSample] = []
    seen: set[str] = set()
    for path in paths:
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ParseError(f"{path}: cannot read: {exc}") from None
        except UnicodeDecodeError as exc:
            raise ParseError(f"{path}: not valid UTF-8: {exc}") from None
        for offset, doc in _documents_in(text, path):
            try:
                sample = sample_from_document(doc)
            except ParseError as exc:
                raise ParseError(f"{path}: byte {offset}: {exc}") from None
            if sample.query_id in seen:
                raise DuplicateError(
                    f"duplicate query_id {sample.query_id!r} in {path}"
                )
            seen.add(sample.query_id)
            samples.append(sample)
    return CorpusStore(samples=tuple(samples), metadata=_default_metadata(label, "ingested"))


def _documents_in(text: str, path: Path):
    """Yield (byte_offset, parsed_object) pairs for a plan document file."""
    try:
        whole = json.loads(text)
    except json.JSONDecodeError:
        whole = None
    if isinstance(whole, dict):
        yield 0, whole
        return
    if whole is not None:
        raise ParseError(f"{path}: byte 0: expected a JSON object per document")
    offset = 0
    for line in text.splitlines(keepends=True):
        stripped = line.strip()
        if stripped:
            try:
                doc = json.loads(stripped)
            except json.JSONDecodeError as exc:
                raise ParseError(
                    f"{path}: byte {offset}: invalid plan document: {exc.msg}"
                ) from None
            if not isinstance(doc, dict):
                raise ParseError(
                    f"{path}: byte {offset}: expected a JSON object per line"
                )
            yield offset, doc
        offset += len(line.encode("utf-8"))


def save_corpus(store: CorpusStore, path: str | Path) -> None:
    """Write header line plus one document per line, atomically."""
    path = Path(path)
    metadata = store.metadata or _default_metadata("", "ingested")
    header = {
        "corpus_version": metadata.get("version", CORPUS_VERSION),
        "label": metadata.get("label", ""),
        "source": metadata.get("source", "ingested"),
        "created_at": metadata.get("created_at"),
    }
    fd, tmp_name = tempfile.mkstemp(
        dir=path.parent if str(path.parent) else ".", prefix=".corpus-", suffix=".tmp"
    )
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(json.dumps(header, allow_nan=False) + "\n")
            for sample in store.samples:
                doc = sample_to_document(sample)
                handle.write(json.dumps(doc, allow_nan=False) + "\n")
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def load_corpus(path: str | Path) -> CorpusStore:
    """Read a corpus file back; errors point at the offending line."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if not text.strip():
        logger.warning("corpus file %s is empty", path)
        return CorpusStore(samples=(), metadata=_default_metadata("", "ingested"))
    lines = text.splitlines()
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line 1: invalid corpus header: {exc.msg}") from None
    if not isinstance(header, dict):
        raise ParseError(f"{path}: line 1: corpus header must be a JSON object")
    if "corpus_version" not in header:
        raise ParseError(f"{path}: line 1: corpus header lacks corpus_version")
    if header["corpus_version"] != CORPUS_VERSION:
        raise ParseError(
            f"{path}: unsupported corpus version {header['corpus_version']!r} "
            f"(expected {CORPUS_VERSION})"
        )
    samples: list[PlanSample] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: line {lineno}: invalid document: {exc.msg}") from None
        try:
            samples.append(sample_from_document(doc))
        except ParseError as exc:
            raise ParseError(f"{path}: line {lineno}: {exc}") from None
    metadata = {
        "version": header["corpus_version"],
        "label": header.get("label", ""),
        "source": header.get("source", "ingested"),
        "created_at": header.get("created_at"),
    }
    return CorpusStore(samples=tuple(samples), metadata=metadata)


def append_sample(store: CorpusStore, sample: PlanSample) -> CorpusStore:
    """New store with the sample at the end; the original is untouched."""
    for existing in store.samples:
        if existing.query_id == sample.query_id:
            raise DuplicateError(f"duplicate query_id {sample.query_id!r}")
    return CorpusStore(samples=store.samples + (sample,), metadata=store.metadata)

"""Synthetic corpus generation, persistence, and ingestion."""

import json

import pytest

from cost2time.corpus import (
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
from cost2time.errors import ConfigError, DuplicateError, ParseError
from cost2time.plan import decompose_operators, sample_to_document

from builders import node, sample_doc, node_doc, timed_sample


class TestOptimizerCost:
    def test_default_coefficients(self):
        params = CostModelParams()
        assert params.c_s == 1.0
        assert params.c_r == 4.0
        assert params.c_t == 0.01
        assert params.c_i == 0.005
        assert params.c_o == 0.0025

    def test_five_term_sum(self):
        params = CostModelParams()
        profile = CardinalityProfile(n_s=100.0, n_r=1.0, n_t=400.0, n_i=200.0, n_o=400.0)
        assert optimizer_cost(params, profile) == pytest.approx(
            100.0 + 4.0 + 4.0 + 1.0 + 1.0
        )

    def test_linearity_in_each_term(self):
        params = CostModelParams()
        base = CardinalityProfile(10.0, 10.0, 10.0, 10.0, 10.0)
        shifted = CardinalityProfile(11.0, 10.0, 10.0, 10.0, 10.0)
        assert optimizer_cost(params, shifted) - optimizer_cost(params, base) == pytest.approx(params.c_s)

    def test_zero_profile_costs_nothing(self):
        assert optimizer_cost(CostModelParams(), CardinalityProfile(0, 0, 0, 0, 0)) == 0.0

    def test_negative_profile_rejected(self):
        with pytest.raises(ConfigError):
            CardinalityProfile(-1.0, 0, 0, 0, 0)

    def test_negative_coefficient_rejected(self):
        with pytest.raises(ConfigError):
            CostModelParams(c_s=-0.5)


class TestTimeLaw:
    def test_constructors(self):
        assert TimeLaw.linear(2.0).family == "linear"
        assert TimeLaw.power(0.7, 1.3).b == 1.3
        assert TimeLaw.bimodal(10.0, 1000.0, 0.2).p == 0.2

    def test_validation(self):
        with pytest.raises(ConfigError):
            TimeLaw.linear(0.0)
        with pytest.raises(ConfigError):
            TimeLaw.bimodal(0.0, 10.0, 0.5)
        with pytest.raises(ConfigError):
            TimeLaw.bimodal(1.0, 10.0, 1.5)
        with pytest.raises(ConfigError):
            TimeLaw(family="cubic", a=1.0)

    def test_parse_time_law(self):
        assert parse_time_law("linear:2.0") == TimeLaw.linear(2.0)
        assert parse_time_law("power:0.7,1.3") == TimeLaw.power(0.7, 1.3)
        assert parse_time_law("bimodal:10,1000,0.2") == TimeLaw.bimodal(10.0, 1000.0, 0.2)

    def test_parse_rejects_malformed(self):
        for bad in ("linear", "linear:x", "power:1.0", "sine:1.0", "bimodal:1,2"):
            with pytest.raises(ConfigError):
                parse_time_law(bad)

    def test_bimodal_template_requires_constant_cost(self):
        with pytest.raises(ConfigError):
            TemplateSpec(
                template_id="TV",
                plan_shape=("seq_scan",),
                cardinality_ranges=((90.0, 110.0),) + tuple((100.0, 100.0) for _ in range(4)),
                rows_range=(10, 10),
                law=TimeLaw.bimodal(10.0, 1000.0, 0.2),
            )


class TestGenerate:
    def test_deterministic_for_seed(self):
        spec = default_synthetic_spec(template_count=4, instances_per_template=6)
        a = generate_synthetic(spec)
        b = generate_synthetic(spec)
        assert len(a) == len(b) == 24
        for sa, sb in zip(a, b):
            assert sa == sb

    def test_seed_changes_values(self):
        base = default_synthetic_spec(template_count=2, instances_per_template=3)
        other = SyntheticSpec(
            templates=base.templates,
            instances_per_template=base.instances_per_template,
            noise=base.noise,
            cost_params=base.cost_params,
            seed=base.seed + 1,
            label=base.label,
        )
        a = generate_synthetic(base)
        b = generate_synthetic(other)
        assert any(
            sa.execution_time_ms != sb.execution_time_ms for sa, sb in zip(a, b)
        )

    def test_linear_law_exact_at_zero_noise(self):
        spec = default_synthetic_spec(
            template_count=3, instances_per_template=5,
            law=TimeLaw.linear(2.0), noise=0.0,
        )
        store = generate_synthetic(spec)
        for sample in store:
            assert sample.execution_time_ms == pytest.approx(
                2.0 * sample.plan_cost, rel=1e-12
            )

    def test_noise_bounds(self):
        spec = default_synthetic_spec(
            template_count=3, instances_per_template=40,
            law=TimeLaw.linear(2.0), noise=0.05,
        )
        store = generate_synthetic(spec)
        ratios = [s.execution_time_ms / (2.0 * s.plan_cost) for s in store]
        assert all(0.95 <= r <= 1.05 for r in ratios)
        assert max(ratios) > 1.0 > min(ratios)  # noise actually both-sided

    def test_power_law_applied(self):
        spec = default_synthetic_spec(
            template_count=2, instances_per_template=5,
            law=TimeLaw.power(0.7, 1.3), noise=0.0,
        )
        for sample in generate_synthetic(spec):
            assert sample.execution_time_ms == pytest.approx(
                0.7 * sample.plan_cost**1.3, rel=1e-12
            )

    def test_bimodal_draws_both_modes(self):
        shape = ("seq_scan",)
        template = TemplateSpec(
            template_id="TB",
            plan_shape=shape,
            cardinality_ranges=tuple((100.0, 100.0) for _ in range(5)),
            rows_range=(10, 11),
            law=TimeLaw.bimodal(10.0, 1000.0, 0.2),
        )
        spec = SyntheticSpec(
            templates=(template,), instances_per_template=200, noise=0.0, seed=7
        )
        times = [s.execution_time_ms for s in generate_synthetic(spec)]
        low = sum(1 for t in times if t == 10.0)
        high = sum(1 for t in times if t == 1000.0)
        assert low + high == 200
        assert 15 <= low <= 90  # ~Binomial(200, 0.2)

    def test_root_cost_is_plan_cost_and_nodes_conserve(self):
        spec = default_synthetic_spec(template_count=6, instances_per_template=3)
        params = spec.cost_params
        for sample in generate_synthetic(spec):
            recs = decompose_operators(sample)
            assert sum(r.exclusive_cost for r in recs) == pytest.approx(
                sample.plan_cost, rel=1e-12
            )
            # inclusive times decompose without clamping as well
            assert sum(r.exclusive_time_ms for r in recs) == pytest.approx(
                sample.execution_time_ms, rel=1e-9
            )

    def test_instances_get_distinct_ids(self):
        store = generate_synthetic(
            default_synthetic_spec(template_count=2, instances_per_template=4)
        )
        ids = [s.query_id for s in store]
        assert len(set(ids)) == len(ids)
        assert ids[0] == "T00-0000"

    def test_metadata_embeds_generator_spec(self):
        spec = default_synthetic_spec(template_count=2, instances_per_template=2)
        store = generate_synthetic(spec)
        assert store.metadata["version"] == 1
        assert store.metadata["label"] == "synthetic"
        assert store.metadata["source"]["generator"]["seed"] == 42

    def test_nonpositive_time_rejected_at_generation(self):
        template = TemplateSpec(
            template_id="TZ",
            plan_shape=("seq_scan",),
            cardinality_ranges=tuple((0.0, 0.0) for _ in range(5)),
            rows_range=(1, 2),
            law=TimeLaw.linear(2.0),
        )
        spec = SyntheticSpec(templates=(template,), instances_per_template=1, noise=0.0)
        with pytest.raises(ConfigError):
            generate_synthetic(spec)

    def test_noise_range_validated(self):
        with pytest.raises(ConfigError):
            default_synthetic_spec(template_count=1, instances_per_template=1, noise=0.5)

    def test_duplicate_template_ids_rejected(self):
        t = default_synthetic_spec(template_count=1, instances_per_template=1).templates[0]
        with pytest.raises(ConfigError):
            SyntheticSpec(templates=(t, t), instances_per_template=1, noise=0.0)


class TestPersistence:
    def _store(self):
        return generate_synthetic(
            default_synthetic_spec(template_count=3, instances_per_template=4)
        )

    def test_round_trip(self, tmp_path):
        store = self._store()
        path = tmp_path / "corpus.jsonl"
        save_corpus(store, path)
        again = load_corpus(path)
        assert len(again) == len(store)
        assert again.metadata["label"] == store.metadata["label"]
        for a, b in zip(again, store):
            assert a == b

    def test_header_line_shape(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        save_corpus(self._store(), path)
        lines = path.read_text(encoding="utf-8").splitlines()
        header = json.loads(lines[0])
        assert set(header) == {"corpus_version", "label", "source", "created_at"}
        assert header["corpus_version"] == 1
        assert len(lines) == 1 + len(self._store())

    def test_corrupt_line_names_line_number(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        save_corpus(self._store(), path)
        lines = path.read_text(encoding="utf-8").splitlines()
        lines[6] = "{broken json"
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        with pytest.raises(ParseError) as exc:
            load_corpus(path)
        assert "line 7" in str(exc.value)

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        path.write_text('["not", "a", "header"]\n', encoding="utf-8")
        with pytest.raises(ParseError):
            load_corpus(path)

    def test_unknown_version_rejected(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        save_corpus(self._store(), path)
        lines = path.read_text(encoding="utf-8").splitlines()
        header = json.loads(lines[0])
        header["corpus_version"] = 999
        lines[0] = json.dumps(header)
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        with pytest.raises(ParseError):
            load_corpus(path)

    def test_empty_file_warns_and_yields_empty_store(self, tmp_path, caplog):
        path = tmp_path / "empty.jsonl"
        path.write_text("", encoding="utf-8")
        with caplog.at_level("WARNING"):
            store = load_corpus(path)
        assert len(store) == 0
        assert any("empty" in r.message.lower() for r in caplog.records)

    def test_append_sample(self):
        store = self._store()
        extra = timed_sample("extra-1", node("seq_scan", 9.0, 4.0, time_ms=2.0), 2.0)
        grown = append_sample(store, extra)
        assert len(grown) == len(store) + 1
        assert len(store) == len(grown) - 1  # original untouched

    def test_append_duplicate_rejected(self):
        store = self._store()
        first = next(iter(store))
        with pytest.raises(DuplicateError):
            append_sample(store, first)

    def test_store_rejects_duplicate_ids_at_construction(self):
        s = timed_sample("dup", node("seq_scan", 5.0, 2.0, time_ms=1.0), 1.0)
        with pytest.raises(DuplicateError):
            CorpusStore(samples=(s, s), metadata={})


class TestIngest:
    def test_single_document_file(self, tmp_path):
        doc = sample_doc(
            "ing-1", node_doc("Seq Scan", 10.0, 5, time_ms=3.0), exec_time_ms=3.0
        )
        path = tmp_path / "one.json"
        path.write_text(json.dumps(doc), encoding="utf-8")
        store = ingest([path])
        assert len(store) == 1
        assert next(iter(store)).query_id == "ing-1"
        assert store.metadata["label"] == "ingested"

    def test_jsonl_file_with_multiple_documents(self, tmp_path):
        docs = [
            sample_doc(f"ing-{i}", node_doc("Seq Scan", 10.0 + i, 5, time_ms=3.0 + i),
                       exec_time_ms=3.0 + i)
            for i in range(4)
        ]
        path = tmp_path / "many.jsonl"
        path.write_text("\n".join(json.dumps(d) for d in docs) + "\n", encoding="utf-8")
        store = ingest([path])
        assert [s.query_id for s in store] == ["ing-0", "ing-1", "ing-2", "ing-3"]

    def test_multiple_files_merge(self, tmp_path):
        for i in range(2):
            doc = sample_doc(f"f{i}", node_doc("Seq Scan", 10.0, 5, time_ms=3.0),
                             exec_time_ms=3.0)
            (tmp_path / f"file{i}.json").write_text(json.dumps(doc), encoding="utf-8")
        store = ingest([tmp_path / "file0.json", tmp_path / "file1.json"])
        assert len(store) == 2

    def test_duplicate_ids_across_files_rejected(self, tmp_path):
        doc = sample_doc("same", node_doc("Seq Scan", 10.0, 5, time_ms=3.0), exec_time_ms=3.0)
        for i in range(2):
            (tmp_path / f"dup{i}.json").write_text(json.dumps(doc), encoding="utf-8")
        with pytest.raises(DuplicateError):
            ingest([tmp_path / "dup0.json", tmp_path / "dup1.json"])

    def test_parse_error_names_file_and_offset(self, tmp_path):
        good = sample_doc("ok-1", node_doc("Seq Scan", 10.0, 5, time_ms=3.0), exec_time_ms=3.0)
        path = tmp_path / "broken.jsonl"
        text = json.dumps(good) + "\n" + '{"query_id": 7}' + "\n"
        path.write_text(text, encoding="utf-8")
        with pytest.raises(ParseError) as exc:
            ingest([path])
        msg = str(exc.value)
        assert "broken.jsonl" in msg
        assert "byte" in msg

    def test_missing_file_raises_parse_error(self, tmp_path):
        with pytest.raises(ParseError) as exc:
            ingest([tmp_path / "nope.jsonl"])
        assert "nope.jsonl" in str(exc.value)

    def test_round_trip_through_documents(self, tmp_path):
        store = generate_synthetic(
            default_synthetic_spec(template_count=2, instances_per_template=3)
        )
        path = tmp_path / "dump.jsonl"
        path.write_text(
            "\n".join(json.dumps(sample_to_document(s)) for s in store) + "\n",
            encoding="utf-8",
        )
        again = ingest([path])
        for a, b in zip(again, store):
            assert a == b

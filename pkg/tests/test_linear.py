"""OLS and power-law regression against a hand-rolled normal-equations solver."""

import math

import numpy as np
import pytest

from cost2time.errors import DegenerateFitError, DomainError, SchemaError
from cost2time.models.linear import (
    LinearModel,
    PowerLawModel,
    fit_ols,
    fit_power_law,
    predict_linear,
    predict_power_law,
)
from cost2time.plan import COST_ONLY_SCHEMA, FeatureVector

from oracles import ols_normal_equations

SCHEMA_2D = ("f0", "f1")


def vecs(rows, schema):
    return [FeatureVector(tuple(r), schema) for r in rows]


class TestOls:
    def test_exact_line(self):
        xs = vecs([(1.0,), (2.0,), (3.0,), (4.0,)], COST_ONLY_SCHEMA)
        model = fit_ols(xs, [3.0, 5.0, 7.0, 9.0])
        assert model.intercept == pytest.approx(1.0, abs=1e-12)
        assert model.coefficients[0] == pytest.approx(2.0, abs=1e-12)
        q = FeatureVector((10.0,), COST_ONLY_SCHEMA)
        assert predict_linear(model, q) == pytest.approx(21.0, abs=1e-10)

    def test_exact_plane(self):
        rows = [(1.0, 2.0), (2.0, 1.0), (3.0, 5.0), (4.0, 0.5), (0.5, 3.0)]
        y = [4.0 + 2.0 * a - 0.5 * b for a, b in rows]
        model = fit_ols(vecs(rows, SCHEMA_2D), y)
        assert model.intercept == pytest.approx(4.0, abs=1e-9)
        assert model.coefficients[0] == pytest.approx(2.0, abs=1e-9)
        assert model.coefficients[1] == pytest.approx(-0.5, abs=1e-9)

    def test_matches_oracle_on_random_instances(self):
        rng = np.random.default_rng(101)
        for _ in range(60):
            n = int(rng.integers(4, 40))
            d = int(rng.integers(1, 4))
            X = rng.uniform(0.1, 100.0, size=(n, d))
            w = rng.uniform(-3.0, 3.0, size=d)
            y = 2.0 + X @ w + rng.normal(0.0, 0.5, size=n)
            schema = tuple(f"c{j}" for j in range(d))
            model = fit_ols(vecs(X, schema), list(y))
            b0, coefs = ols_normal_equations(X, y)
            scale = max(1.0, abs(b0))
            assert abs(model.intercept - b0) / scale < 1e-9
            for got, want in zip(model.coefficients, coefs):
                assert abs(got - want) / max(1.0, abs(want)) < 1e-9

    def test_residuals_orthogonal_to_design(self):
        rng = np.random.default_rng(5)
        X = rng.uniform(0.0, 10.0, size=(25, 2))
        y = 1.0 + X[:, 0] - 2.0 * X[:, 1] + rng.normal(0, 1, 25)
        model = fit_ols(vecs(X, SCHEMA_2D), list(y))
        preds = np.array([predict_linear(model, v) for v in vecs(X, SCHEMA_2D)])
        resid = y - preds
        assert abs(resid.sum()) < 1e-7
        for j in range(2):
            assert abs(float(resid @ X[:, j])) < 1e-6

    def test_schema_mismatch_at_predict(self):
        model = fit_ols(vecs([(1.0,), (2.0,)], COST_ONLY_SCHEMA), [1.0, 2.0])
        with pytest.raises(SchemaError):
            predict_linear(model, FeatureVector((1.0, 2.0), SCHEMA_2D))

    def test_needs_more_samples_than_features(self):
        with pytest.raises(DegenerateFitError):
            fit_ols(vecs([(1.0, 2.0)], SCHEMA_2D), [1.0])

    def test_duplicated_column_is_degenerate(self):
        rows = [(v, v) for v in (1.0, 2.0, 3.0, 4.0)]
        with pytest.raises(DegenerateFitError):
            fit_ols(vecs(rows, SCHEMA_2D), [1.0, 2.0, 3.0, 4.0])

    def test_constant_feature_is_degenerate(self):
        rows = [(3.0,), (3.0,), (3.0,)]
        with pytest.raises(DegenerateFitError):
            fit_ols(vecs(rows, COST_ONLY_SCHEMA), [1.0, 2.0, 3.0])

    def test_nonfinite_rejected(self):
        with pytest.raises(DegenerateFitError):
            fit_ols(vecs([(1.0,), (float("nan"),)], COST_ONLY_SCHEMA), [1.0, 2.0])
        with pytest.raises(DegenerateFitError):
            fit_ols(vecs([(1.0,), (2.0,)], COST_ONLY_SCHEMA), [1.0, float("inf")])

    def test_length_mismatch_rejected(self):
        with pytest.raises(DegenerateFitError):
            fit_ols(vecs([(1.0,), (2.0,)], COST_ONLY_SCHEMA), [1.0])


class TestPowerLaw:
    def test_exact_power_law_recovered(self):
        costs = [10.0, 25.0, 60.0, 140.0, 300.0]
        times = [3.0 * c**2.0 for c in costs]
        model = fit_power_law(costs, times)
        assert model.coefficient == pytest.approx(3.0, rel=1e-10)
        assert model.exponent == pytest.approx(2.0, abs=1e-10)
        assert predict_power_law(model, 50.0) == pytest.approx(3.0 * 2500.0, rel=1e-9)

    def test_is_ols_in_log_space(self):
        rng = np.random.default_rng(77)
        costs = rng.uniform(1.0, 500.0, size=30)
        times = 0.7 * costs**1.3 * np.exp(rng.normal(0, 0.05, 30))
        model = fit_power_law(list(costs), list(times))
        b0, (b1,) = ols_normal_equations(np.log(costs)[:, None], np.log(times))
        assert model.exponent == pytest.approx(b1, abs=1e-9)
        assert math.log(model.coefficient) == pytest.approx(b0, abs=1e-9)

    def test_nonpositive_pairs_dropped_with_warning(self, caplog):
        with caplog.at_level("WARNING"):
            model = fit_power_law([1.0, 0.0, 2.0, 4.0], [2.0, 9.0, 4.0, 8.0])
        assert model.exponent == pytest.approx(1.0, abs=1e-10)
        assert any("dropped 1" in r.message for r in caplog.records)

    def test_too_few_positive_pairs_rejected(self):
        with pytest.raises(DegenerateFitError):
            fit_power_law([1.0, -1.0], [1.0, 2.0])

    def test_constant_cost_degenerate(self):
        with pytest.raises(DegenerateFitError):
            fit_power_law([5.0, 5.0, 5.0], [1.0, 2.0, 3.0])

    def test_predict_rejects_nonpositive_cost(self):
        model = fit_power_law([1.0, 2.0, 4.0], [2.0, 4.0, 8.0])
        with pytest.raises(DomainError):
            predict_power_law(model, 0.0)

    def test_model_types(self):
        lin = fit_ols(vecs([(1.0,), (2.0,)], COST_ONLY_SCHEMA), [1.0, 2.0])
        pl = fit_power_law([1.0, 2.0, 4.0], [2.0, 4.0, 8.0])
        assert isinstance(lin, LinearModel)
        assert isinstance(pl, PowerLawModel)

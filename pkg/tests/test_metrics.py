import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fairirt.errors import GridError, InputError
from fairirt.irt import CLAMP_EPS
from fairirt.metrics import (
    Fairness,
    MetricConfig,
    PredictionPairRecord,
    auto_lambda,
    build_response_matrix,
    equalised_score,
    fairness_flag,
    satisfies_individual_parity,
    sts_classification,
    sts_regression,
)

prob = st.floats(min_value=0.0, max_value=1.0)
REG = MetricConfig(task="regression")


def rec(m, j, p, pbar, label=None):
    return PredictionPairRecord(m, j, p, pbar, label)


def grid(values, labels=None):
    """records from a {model: {individual: (p, pbar)}} dict"""
    out = []
    for m, row in values.items():
        for j, (p, pbar) in row.items():
            out.append(rec(m, j, p, pbar, None if labels is None else labels[j]))
    return out


class TestSituationTestScore:
    @pytest.mark.parametrize("p,pbar,expected", [(0.7, 0.7, 1.0), (0.9, 0.2, 0.3), (1.0, 0.0, 0.0)])
    def test_classification_hand_cases(self, p, pbar, expected):
        assert sts_classification(p, pbar) == pytest.approx(expected, abs=1e-15)

    @pytest.mark.parametrize("y,ybar,lam,expected", [(3.3, 3.3, 0.7, 1.0), (2.0, 1.0, 1.0, 0.5), (1.0, 3.0, 0.5, 0.0)])
    def test_regression_hand_cases(self, y, ybar, lam, expected):
        assert sts_regression(y, ybar, lam) == pytest.approx(expected, abs=1e-15)

    def test_probability_range(self):
        with pytest.raises(InputError):
            sts_classification(1.2, 0.5)

    def test_zero_original_prediction(self):
        with pytest.raises(InputError, match="undefined relative difference"):
            sts_regression(0.0, 1.0, 1.0)

    @given(prob, prob)
    def test_symmetric_and_bounded(self, p, q):
        s = sts_classification(p, q)
        assert 0.0 <= s <= 1.0
        assert s == sts_classification(q, p)

    @given(st.integers(0, 1024), st.integers(0, 1024))
    def test_parity_is_the_strict_case(self, k, l):
        # dyadic grid: every difference is exact, so 1 - |p - q| cannot round to 1
        p, q = k / 1024, l / 1024
        assert (sts_classification(p, q) == 1.0) == satisfies_individual_parity(p, q)


class TestAutoLambda:
    def test_hand_cases(self):
        assert auto_lambda([rec("m", "a", 2.0, 1.0)]) == 1.0  # r_max = 0.5
        assert auto_lambda([rec("m", "a", 1.0, 5.0)]) == 0.25  # r_max = 4
        assert auto_lambda([rec("m", "a", 3.0, 3.0)]) == 1.0

    def test_all_degenerate(self):
        with pytest.raises(InputError):
            auto_lambda([rec("m", "a", 0.0, 1.0)])

    def test_bounds_random_batches(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            n = rng.integers(1, 20)
            y = rng.normal(0, rng.uniform(0.1, 100), n)
            ybar = y + rng.normal(0, rng.uniform(0.01, 200), n)
            recs = [rec("m", f"i{k}", float(a), float(b)) for k, (a, b) in enumerate(zip(y, ybar))]
            lam = auto_lambda(recs)
            scores = [sts_regression(r.value_original, r.value_flipped, lam) for r in recs]
            assert min(scores) >= -1e-12 and max(scores) <= 1.0


class TestEqualisedScore:
    def test_hand_cases(self):
        cfg = MetricConfig(metric="es")
        assert equalised_score(0.4, 0.4, 0, cfg) == 1.0
        assert equalised_score(0.8, 0.3, 1, cfg) == pytest.approx(0.5)
        assert equalised_score(2.5, 2.5, 1, MetricConfig(task="regression", metric="es")) == 1.0

    def test_label_required(self):
        with pytest.raises(InputError):
            equalised_score(0.8, 0.3, None, MetricConfig(metric="es"))
        with pytest.raises(InputError):
            equalised_score(0.8, 0.3, 2, MetricConfig(metric="es"))

    def _records(self):
        labels = {"a": 1, "b": 0, "c": 1}
        vals = {"m1": {"a": (0.9, 0.6), "b": (0.2, 0.9), "c": (0.5, 0.5)},
                "m2": {"a": (0.7, 0.7), "b": (0.1, 0.1), "c": (0.4, 0.9)}}
        return grid(vals, labels)

    def test_opportunity_keeps_positive_label_only(self):
        m = build_response_matrix(self._records(), MetricConfig(metric="es", conditioning="eopp"))
        assert m.individual_ids == ("a", "c")
        assert sorted(m.excluded_cells) == [("m1", "b"), ("m2", "b")]
        np.testing.assert_allclose(m.values, [[0.7, 1 - CLAMP_EPS], [1 - CLAMP_EPS, 0.5]])

    def test_odds_keeps_both_labels(self):
        m = build_response_matrix(self._records(), MetricConfig(metric="es", conditioning="eodd"))
        assert m.individual_ids == ("a", "b", "c")
        assert m.values[0, 1] == pytest.approx(0.3)

    def test_conditioning_changes_model_scores(self):
        eodd = build_response_matrix(self._records(), MetricConfig(metric="es", conditioning="eodd"))
        eopp = build_response_matrix(self._records(), MetricConfig(metric="es", conditioning="eopp"))
        assert eodd.values.mean(axis=1)[0] != pytest.approx(eopp.values.mean(axis=1)[0])

    def test_missing_label_is_an_error(self):
        recs = self._records()
        recs[0] = rec("m1", "a", 0.9, 0.6)
        with pytest.raises(InputError, match="label"):
            build_response_matrix(recs, MetricConfig(metric="es"))

    def test_conflicting_labels(self):
        recs = self._records()
        recs[3] = rec("m2", "a", 0.7, 0.7, 0)
        with pytest.raises(InputError, match="conflicting"):
            build_response_matrix(recs, MetricConfig(metric="es"))


class TestFairnessFlag:
    def test_hand_cases(self):
        assert fairness_flag(0.8) is Fairness.FAIR
        assert fairness_flag(0.3) is Fairness.UNFAIR
        assert fairness_flag(0.5, 0.5) is Fairness.UNFAIR

    def test_epsilon_range(self):
        with pytest.raises(InputError):
            fairness_flag(0.5, 1.0)


class TestBuildMatrix:
    def test_identical_predictions_clamp_to_top(self):
        vals = {m: {j: (0.3, 0.3) for j in ("a", "b")} for m in ("m1", "m2")}
        mat = build_response_matrix(grid(vals), MetricConfig())
        assert np.all(mat.values == 1 - CLAMP_EPS)
        assert mat.clamp_count == 4

    def test_cells_follow_the_scalar_metric(self):
        vals = {"m1": {"a": (0.9, 0.2), "b": (0.7, 0.7)}, "m2": {"a": (0.1, 0.6), "b": (0.55, 0.45)}}
        mat = build_response_matrix(grid(vals), MetricConfig())
        for i, m in enumerate(("m1", "m2")):
            for k, j in enumerate(("a", "b")):
                expected = min(sts_classification(*vals[m][j]), 1 - CLAMP_EPS)
                assert mat.values[i, k] == pytest.approx(expected, abs=1e-15)

    def test_missing_cell_is_named(self):
        vals = {"m1": {"a": (0.5, 0.5), "b": (0.5, 0.5)}, "m2": {"a": (0.5, 0.5)}}
        with pytest.raises(GridError, match=r"\(m2, b\)"):
            build_response_matrix(grid(vals), MetricConfig())

    def test_duplicate_cell(self):
        recs = grid({"m1": {"a": (0.5, 0.5), "b": (0.5, 0.5)}, "m2": {"a": (0.5, 0.5), "b": (0.5, 0.5)}})
        with pytest.raises(GridError, match="duplicate"):
            build_response_matrix(recs + [recs[0]], MetricConfig())

    def test_bad_probability_names_record(self):
        recs = grid({"m1": {"a": (0.5, 1.5), "b": (0.5, 0.5)}, "m2": {"a": (0.5, 0.5), "b": (0.5, 0.5)}})
        with pytest.raises(InputError, match=r"\(m1, a\)"):
            build_response_matrix(recs, MetricConfig())

    def test_regression_zero_is_excluded_and_counted(self):
        vals = {"m1": {"a": (2.0, 1.0), "b": (0.0, 1.0), "c": (1.0, 1.5)},
                "m2": {"a": (1.0, 1.0), "b": (3.0, 3.0), "c": (4.0, 1.0)}}
        mat = build_response_matrix(grid(vals), REG)
        assert mat.individual_ids == ("a", "c")
        assert mat.excluded_cells == (("m1", "b"),)
        # r_max = 0.75 from (4, 1), so lambda stays 1
        assert mat.values[0, 0] == pytest.approx(0.5)
        assert mat.values[1, 1] == pytest.approx(0.25)

    def test_auto_lambda_rescales(self):
        vals = {"m1": {"a": (1.0, 5.0), "b": (2.0, 2.0)}, "m2": {"a": (2.0, 3.0), "b": (1.0, 2.0)}}
        mat = build_response_matrix(grid(vals), REG)
        assert mat.values[0, 0] == pytest.approx(CLAMP_EPS)
        assert mat.values[1, 1] == pytest.approx(0.75)

    def test_fixed_lambda_out_of_range(self):
        vals = {"m1": {"a": (1.0, 5.0), "b": (2.0, 2.0)}, "m2": {"a": (2.0, 3.0), "b": (1.0, 2.0)}}
        with pytest.raises(InputError, match="outside"):
            build_response_matrix(grid(vals), MetricConfig(task="regression", lambda_mode=1.0))

    def test_order_invariance(self):
        rng = np.random.default_rng(4)
        vals = {f"m{i}": {f"j{k}": tuple(rng.uniform(0, 1, 2)) for k in range(5)} for i in range(4)}
        recs = grid(vals)
        base = build_response_matrix(recs, MetricConfig())
        shuffled = list(recs)
        random.Random(0).shuffle(shuffled)
        other = build_response_matrix(shuffled, MetricConfig())
        rows = [other.model_ids.index(m) for m in base.model_ids]
        cols = [other.individual_ids.index(j) for j in base.individual_ids]
        np.testing.assert_array_equal(base.values, other.values[np.ix_(rows, cols)])

    def test_first_appearance_order(self):
        recs = [rec("z", "q", 0.5, 0.5), rec("a", "q", 0.5, 0.5), rec("z", "b", 0.5, 0.5), rec("a", "b", 0.5, 0.5)]
        mat = build_response_matrix(recs, MetricConfig())
        assert mat.model_ids == ("z", "a") and mat.individual_ids == ("q", "b")

    def test_no_records(self):
        with pytest.raises(InputError, match="no records"):
            build_response_matrix([], MetricConfig())

    @pytest.mark.parametrize("kw", [{"task": "ranking"}, {"metric": "dp"}, {"epsilon": 0.0},
                                    {"lambda_mode": -1.0}, {"lambda_mode": "fixed"}, {"conditioning": "x"}])
    def test_config_validation(self, kw):
        with pytest.raises(InputError):
            MetricConfig(**kw)

"""Survival core: step functions, KM/NA estimators, splits."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graftsurv.exceptions import DataError
from graftsurv.survival import (
    StepFunction,
    censoring_survival,
    event_table,
    kaplan_meier,
    make_splits,
    make_survival_target,
    nelson_aalen,
    observed_events,
)


def surv(times, events):
    return make_survival_target(times, events)


class TestStepFunction:
    def test_baseline_before_first_knot(self):
        f = StepFunction([1.0, 3.0], [0.5, 0.25], baseline=1.0)
        assert f(0.0) == 1.0
        assert f(0.999) == 1.0

    def test_right_continuous_at_knots(self):
        f = StepFunction([1.0, 3.0], [0.5, 0.25], baseline=1.0)
        assert f(1.0) == 0.5
        assert f(2.999) == 0.5
        assert f(3.0) == 0.25

    def test_constant_after_last_knot(self):
        f = StepFunction([1.0, 3.0], [0.5, 0.25], baseline=1.0)
        assert f(1e9) == 0.25

    def test_vectorized_evaluation(self):
        f = StepFunction([1.0, 3.0], [0.5, 0.25], baseline=1.0)
        np.testing.assert_array_equal(f([0.0, 1.0, 2.0, 3.0, 4.0]), [1.0, 0.5, 0.5, 0.25, 0.25])

    def test_no_knots_is_constant_baseline(self):
        f = StepFunction([], [], baseline=1.0)
        assert f(0.0) == 1.0 and f(100.0) == 1.0

    def test_rejects_unsorted_times(self):
        with pytest.raises(DataError):
            StepFunction([3.0, 1.0], [0.5, 0.25], baseline=1.0)

    def test_rejects_duplicate_times(self):
        with pytest.raises(DataError):
            StepFunction([1.0, 1.0], [0.5, 0.25], baseline=1.0)


class TestTargets:
    def test_pack_and_count(self):
        y = surv([1.0, 2.0, 3.0], [True, False, True])
        assert observed_events(y) == 2
        np.testing.assert_array_equal(y["time"], [1.0, 2.0, 3.0])

    def test_rejects_negative_times(self):
        with pytest.raises(DataError):
            surv([-1.0, 2.0], [True, False])

    def test_rejects_non_binary_events(self):
        with pytest.raises(DataError):
            surv([1.0, 2.0], [2, 0])


class TestEventTable:
    def test_hand_example(self):
        # times 1,2,2,3,4; events at 1, 2 (one of the tied pair), 3.
        y = surv([1, 2, 2, 3, 4], [1, 0, 1, 1, 0])
        times, deaths, at_risk = event_table(y)
        np.testing.assert_array_equal(times, [1, 2, 3])
        np.testing.assert_array_equal(deaths, [1, 1, 1])
        # The row censored at 2 is still at risk at time 2.
        np.testing.assert_array_equal(at_risk, [5, 4, 2])


class TestKaplanMeier:
    def test_hand_example(self):
        y = surv([1, 2, 2, 3, 4], [1, 0, 1, 1, 0])
        S = kaplan_meier(y)
        np.testing.assert_array_equal(S.times, [1, 2, 3])
        np.testing.assert_allclose(S.values, [0.8, 0.6, 0.3])
        assert S(0.5) == 1.0
        assert S(10.0) == pytest.approx(0.3)

    def test_no_censoring_equals_empirical_survival(self):
        rng = np.random.default_rng(7)
        t = rng.integers(1, 20, size=200).astype(float)
        y = surv(t, np.ones_like(t, dtype=bool))
        S = kaplan_meier(y)
        for u in np.unique(t):
            assert S(u) == pytest.approx(np.mean(t > u))

    def test_non_increasing_and_bounded(self):
        rng = np.random.default_rng(11)
        t = rng.exponential(10, size=300)
        e = rng.random(300) < 0.5
        S = kaplan_meier(surv(t, e))
        assert np.all(np.diff(S.values) <= 0)
        assert np.all((S.values >= 0) & (S.values <= 1))

    def test_all_censored_is_flat_one(self):
        S = kaplan_meier(surv([1, 2, 3], [0, 0, 0]))
        assert S.times.size == 0
        assert S(2.0) == 1.0


class TestNelsonAalen:
    def test_hand_example(self):
        y = surv([1, 2, 2, 3, 4], [1, 0, 1, 1, 0])
        H = nelson_aalen(y)
        np.testing.assert_array_equal(H.times, [1, 2, 3])
        np.testing.assert_allclose(H.values, [0.2, 0.45, 0.95])
        assert H(0.0) == 0.0

    def test_non_decreasing(self):
        rng = np.random.default_rng(13)
        t = rng.exponential(10, size=300)
        e = rng.random(300) < 0.4
        H = nelson_aalen(surv(t, e))
        assert np.all(np.diff(H.values) >= 0)

    def test_exp_minus_na_dominates_km(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            n = rng.integers(5, 60)
            t = rng.exponential(5, size=n)
            e = rng.random(n) < 0.6
            if not e.any():
                continue
            y = surv(t, e)
            S, H = kaplan_meier(y), nelson_aalen(y)
            grid = np.linspace(0, t.max() * 1.1, 50)
            assert np.all(np.exp(-H(grid)) >= S(grid) - 1e-12)


class TestCensoringSurvival:
    def test_hand_example(self):
        y = surv([1, 2, 2, 3, 4], [1, 0, 1, 1, 0])
        G = censoring_survival(y)
        np.testing.assert_array_equal(G.times, [2, 4])
        np.testing.assert_allclose(G.values, [0.75, 0.0])

    def test_no_censoring_gives_flat_one(self):
        G = censoring_survival(surv([1, 2, 3], [1, 1, 1]))
        assert G.times.size == 0
        assert G(2.5) == 1.0


class TestMakeSplits:
    def test_ten_rows_split_six_two_two(self):
        (plan,) = make_splits(10, 1, 42)
        assert plan.train.size == 6 and plan.valid.size == 2 and plan.test.size == 2

    def test_registry_scale_sizes(self):
        (plan,) = make_splits(106372, 1, 0)
        assert plan.test.size == 21274 and plan.valid.size == 21274
        assert plan.train.size == 63824

    def test_deterministic_per_seed(self):
        a = make_splits(100, 3, 5)
        b = make_splits(100, 3, 5)
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x.train, y.train)
            np.testing.assert_array_equal(x.test, y.test)

    def test_repeats_differ(self):
        a, b = make_splits(100, 2, 5)
        assert not np.array_equal(a.test, b.test)
        assert a.seed == 5 and b.seed == 6

    @given(st.integers(10, 300), st.integers(1, 4), st.integers(0, 1000))
    @settings(max_examples=40, deadline=None)
    def test_partition_properties(self, n, k, seed):
        for plan in make_splits(n, k, seed):
            allidx = np.concatenate([plan.train, plan.valid, plan.test])
            np.testing.assert_array_equal(np.sort(allidx), np.arange(n))
            assert plan.test.size == int(np.floor(0.2 * n))
            assert plan.valid.size == plan.test.size
            assert plan.train.size >= plan.test.size

    def test_rejects_tiny_inputs(self):
        with pytest.raises(DataError):
            make_splits(9, 1, 0)
        with pytest.raises(DataError):
            make_splits(100, 0, 0)

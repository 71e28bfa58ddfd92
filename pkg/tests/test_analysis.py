"""Bootstrap ranking confidence and random-search equivalence."""

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from bbo_arena.analysis import (
    BootstrapConfig,
    bootstrap_scores,
    expected_min_of_m,
    expected_min_weights,
    expected_min_weights_exact,
    pooled_rs_curve,
    rank_confidence,
    rs_equivalence,
)
from bbo_arena.errors import ConfigError, DataError
from bbo_arena.scoring import ProblemCalibration
from bbo_arena.seeding import rng_for


def enumeration_oracle(pool, m):
    """Mean of subset minima over all size-m subsets, in exact rationals."""
    subsets = list(itertools.combinations(sorted(Fraction(x) for x in pool), m))
    return sum(min(s) for s in subsets) / Fraction(len(subsets))


class TestExpectedMin:
    def test_pair_example(self):
        # pool {1,2,3,4}, m=2: six pairs with minima 1,1,1,2,2,3 -> 10/6
        assert expected_min_of_m([1, 2, 3, 4], 2, exact=True) == Fraction(10, 6)
        assert expected_min_of_m([1, 2, 3, 4], 2) == pytest.approx(10 / 6, abs=1e-12)

    def test_m_one_is_pool_mean(self):
        pool = [0.5, 1.5, 7.0, 2.0, 3.0]
        assert expected_min_of_m(pool, 1) == pytest.approx(np.mean(pool), abs=1e-12)

    def test_m_equals_pool_size_is_min(self):
        pool = [4.0, 2.0, 9.0]
        assert expected_min_of_m(pool, 3) == pytest.approx(2.0, abs=1e-12)

    def test_matches_enumeration_exactly_on_small_pools(self):
        rng = rng_for(42)
        for size in range(2, 13):
            pool = [float(x) for x in rng.uniform(0, 10, size)]
            for m in range(1, size + 1):
                assert expected_min_of_m(pool, m, exact=True) == enumeration_oracle(pool, m)

    def test_float_weights_match_exact_weights(self):
        for M, m in [(10, 3), (50, 17), (1500, 128), (1500, 1)]:
            w = expected_min_weights(M, m)
            assert w.sum() == pytest.approx(1.0, abs=1e-12)
            if M <= 50:
                exact = [float(x) for x in expected_min_weights_exact(M, m)]
                assert w == pytest.approx(exact, abs=1e-12)

    def test_invalid_m_rejected(self):
        with pytest.raises(ConfigError):
            expected_min_weights(5, 6)
        with pytest.raises(ConfigError):
            expected_min_weights(5, 0)


def uniform_calibrations(n_problems=2, pool_size=2000, seed=0):
    cals = []
    for p in range(n_problems):
        rng = rng_for(seed, "pool", p)
        samples = rng.uniform(0.0, 1.0, pool_size)
        cals.append(
            ProblemCalibration(
                f"p{p}",
                clip=float(np.median(samples)),
                opt=float(samples.min()),
                samples=samples,
            )
        )
    return cals


class TestPooledCurve:
    def test_curve_monotone_and_bounded(self):
        cals = uniform_calibrations()
        curve = pooled_rs_curve(cals)
        assert np.all(np.diff(curve.scores) >= 0)
        assert np.all(curve.per_problem[:, 1:] <= curve.per_problem[:, :-1] + 1e-12)
        assert curve.scores[0] >= 0.0 and curve.scores[-1] <= 100.0

    def test_small_pool_rejected(self):
        cals = uniform_calibrations(pool_size=500)
        with pytest.raises(DataError):
            pooled_rs_curve(cals)

    def test_missing_pool_rejected(self):
        cals = [ProblemCalibration("p", 1.0, 0.0, samples=None)]
        with pytest.raises(DataError):
            pooled_rs_curve(cals)

    def test_grid_beyond_pool_rejected(self):
        cals = uniform_calibrations()
        with pytest.raises(DataError):
            pooled_rs_curve(cals, m_grid=[1, 5000])

    def test_crashes_behave_like_clip(self):
        rng = rng_for(9)
        samples = rng.uniform(0.0, 1.0, 2000)
        clip = float(np.median(samples))
        crashed = samples.copy()
        crashed[::10] = math.inf
        clipped = samples.copy()
        clipped[::10] = clip
        base = ProblemCalibration("p", clip, float(samples.min()), clipped)
        with_crashes = ProblemCalibration("p", clip, float(samples.min()), crashed)
        a = pooled_rs_curve([base]).scores
        b = pooled_rs_curve([with_crashes]).scores
        assert a == pytest.approx(b, abs=1e-10)


class TestRsEquivalence:
    def test_score_on_grid_maps_back(self):
        cals = uniform_calibrations()
        curve = pooled_rs_curve(cals)
        for idx in (0, 10, 100, len(curve.m_grid) - 1):
            eq = rs_equivalence(float(curve.scores[idx]), curve, budget=128)
            if idx == 0:
                assert eq.iters == 1.0
            else:
                assert eq.iters == pytest.approx(curve.m_grid[idx], rel=1e-6)

    def test_efficiency_definition(self):
        cals = uniform_calibrations()
        curve = pooled_rs_curve(cals)
        target = float(curve.scores[min(255, len(curve.scores) - 1)])
        eq = rs_equivalence(target, curve, budget=128)
        assert eq.efficiency == pytest.approx(eq.iters / 128.0, abs=1e-12)

    def test_monotone_in_score(self):
        cals = uniform_calibrations()
        curve = pooled_rs_curve(cals)
        scores = np.linspace(float(curve.scores[0]), float(curve.scores[-1]), 25)
        iters = [rs_equivalence(float(s), curve).iters for s in scores]
        assert all(b >= a for a, b in zip(iters, iters[1:]))

    def test_saturation_sentinel(self):
        cals = uniform_calibrations()
        curve = pooled_rs_curve(cals)
        eq = rs_equivalence(float(curve.scores[-1]) + 1.0, curve)
        assert eq.saturated and eq.iters == curve.pool_size
        assert eq.iters_label().startswith(">")


class TestBootstrap:
    def test_replication_floor(self):
        with pytest.raises(ConfigError):
            BootstrapConfig(replications=50)

    def test_single_trial_is_point_mass(self):
        cals = [ProblemCalibration("p", 1.0, 0.0)]
        finals = {"a": np.array([[0.25]]), "b": np.array([[0.5]])}
        scores = bootstrap_scores(finals, cals, BootstrapConfig(200, seed=1))
        assert np.ptp(scores["a"]) == 0.0 and scores["a"][0] == pytest.approx(75.0)

    def test_dominance_gives_certain_ranking(self):
        cals = [ProblemCalibration("p", 1.0, 0.0)]
        finals = {
            "worse": np.array([[0.5, 0.6, 0.7]]),
            "better": np.array([[0.1, 0.2, 0.3]]),
        }
        scores = bootstrap_scores(finals, cals, BootstrapConfig(500, seed=2))
        dist = rank_confidence(scores)
        assert dist.rankings[0][0] == ("better", "worse")
        assert dist.rankings[0][1] == 1.0
        assert dist.confidence_set(0.9) == ((("better", "worse"), 1.0),)

    def test_symmetric_teams_split_even(self):
        # same score multiset per team (so the resampling distributions
        # are identical), independent draws: each order is a coin flip
        cals = [ProblemCalibration("p", 1.0, 0.0)]
        rng = rng_for(3)
        values = rng.uniform(0.2, 0.8, size=(1, 12))
        finals = {"a": values, "b": values[:, ::-1].copy()}
        scores = bootstrap_scores(finals, cals, BootstrapConfig(1000, seed=4))
        dist = rank_confidence(scores)
        top = dict(dist.rankings)
        assert top[("a", "b")] == pytest.approx(0.5, abs=0.06)

    def test_identical_teams_tie_breaks_by_order(self):
        cals = [ProblemCalibration("p", 1.0, 0.0)]
        values = np.array([[0.3, 0.4, 0.5]])
        scores = bootstrap_scores(
            {"x": values, "y": values.copy()}, cals, BootstrapConfig(300, seed=5)
        )
        # identical draws per replication would differ; force exact ties
        scores["y"] = scores["x"].copy()
        dist = rank_confidence(scores)
        assert dist.rankings[0][0] == ("x", "y") and dist.rankings[0][1] == 1.0

    def test_mismatched_shapes_rejected(self):
        cals = [ProblemCalibration("p", 1.0, 0.0)]
        with pytest.raises(ConfigError):
            bootstrap_scores(
                {"a": np.zeros((1, 3)), "b": np.zeros((1, 4))},
                cals,
                BootstrapConfig(200),
            )

    def test_frequencies_sum_to_one(self):
        cals = [ProblemCalibration("p", 1.0, 0.0)]
        rng = rng_for(6)
        finals = {t: rng.uniform(0, 1, size=(1, 5)) for t in ("a", "b", "c")}
        scores = bootstrap_scores(finals, cals, BootstrapConfig(400, seed=7))
        dist = rank_confidence(scores)
        assert sum(f for _, f in dist.rankings) == pytest.approx(1.0, abs=1e-12)
        for team, hist in dist.rank_histogram.items():
            assert hist.sum() == pytest.approx(1.0, abs=1e-12)

    def test_histogram_consistent_with_rankings(self):
        cals = [ProblemCalibration("p", 1.0, 0.0)]
        rng = rng_for(8)
        finals = {t: rng.uniform(0, 1, size=(1, 6)) for t in ("a", "b", "c")}
        scores = bootstrap_scores(finals, cals, BootstrapConfig(300, seed=9))
        dist = rank_confidence(scores)
        for team in finals:
            first_freq = sum(f for order, f in dist.rankings if order[0] == team)
            assert dist.rank_histogram[team][0] == pytest.approx(first_freq, abs=1e-12)

    def test_resampled_values_are_members_of_original(self):
        cals = [ProblemCalibration("p", 1.0, 0.0)]
        vals = np.array([[0.11, 0.37, 0.52, 0.74]])
        scores = bootstrap_scores({"a": vals}, cals, BootstrapConfig(200, seed=10))
        # every bootstrap score is a mean of 4 draws from the 4 values
        possible = set()
        from itertools import product

        for combo in product(vals[0], repeat=4):
            possible.add(round(100 * (1 - float(np.mean(combo))), 9))
        got = {round(float(s), 9) for s in scores["a"]}
        assert got <= possible

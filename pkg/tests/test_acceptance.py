"""Acceptance gate: one test per criterion, each printing a PASS line.

The reference experiment (12 problems, N=16 trials, T=16 batches of 8)
runs once as a session fixture; its results feed the self-consistency,
separation, ensemble, and warm-start criteria.  Pure-math criteria run
standalone in under a few seconds.
"""

import itertools
import json
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from bbo_arena.analysis import (
    BootstrapConfig,
    bootstrap_scores,
    expected_min_of_m,
    rank_confidence,
    rs_equivalence,
)
from bbo_arena.experiment import (
    ExperimentManifest,
    leaderboard_rows,
    per_problem_scores,
    run_experiment,
)
from bbo_arena.harness import StudyConfig, run_study
from bbo_arena.optimizers import create_optimizer
from bbo_arena.problems import make_synthetic_problem
from bbo_arena.scoring import (
    ProblemCalibration,
    calibrate,
    cumulative_min,
    final_clipped_by_trial,
    leaderboard_score,
    median_score,
    normalized_curve,
)
from bbo_arena.seeding import rng_for
from bbo_arena.space import ParamSpec, SearchSpace

from test_harness import SlowOptimizer, VirtualClock
from test_space import random_space

BASE_SEED = 2020
MEMBERS = ["turbo-lite", "gp-ei"]
ENSEMBLE = "ensemble:turbo-lite+gp-ei"


def _elapsed(t0):
    return f"{time.perf_counter() - t0:.1f}s"


@pytest.fixture(scope="session")
def reference_results(tmp_path_factory):
    out = tmp_path_factory.mktemp("reference-run")
    manifest = ExperimentManifest(
        suite="reference",
        optimizers=["random-search", *MEMBERS, ENSEMBLE],
        trials=16,
        batches=16,
        batch_size=8,
        seed=BASE_SEED,
        out=str(out),
        calibration_samples=4000,
        workers=2,
    )
    return run_experiment(manifest)


@pytest.fixture(scope="session")
def warm_rerun(reference_results, tmp_path_factory):
    out = tmp_path_factory.mktemp("warm-run")
    manifest = ExperimentManifest(
        suite="reference",
        optimizers=["random-search", "turbo-lite"],
        trials=16,
        batches=16,
        batch_size=8,
        seed=BASE_SEED,
        out=str(out),
        calibration_samples=4000,
        workers=2,
        warm_start_from=str(reference_results.out_dir),
    )
    return run_experiment(manifest)


def crafted_tensor():
    FA = np.array(
        [[8, 12, math.inf], [6, 4, math.inf], [7, math.inf, 3], [5, 9, 2]], dtype=float
    )
    FB = np.array([[2, 6, 4], [5, 3, 4], [1.5, 2, 4], [3, 2.5, 4]], dtype=float)
    F = np.stack([FA, FB])
    cals = [ProblemCalibration("A", 10.0, 0.0), ProblemCalibration("B", 4.0, 1.0)]
    return F, cals


def test_criterion_1_scoring_math_exactness():
    t0 = time.perf_counter()
    F, cals = crafted_tensor()
    # per-batch grand means worked by hand in exact fractions:
    # problem A norms 14/15, 2/3, 13/30, 11/30; problem B 7/9, 2/3, 1/2, 1/2
    expected_curve = [77 / 90, 2 / 3, 7 / 15, 13 / 30]
    curve = normalized_curve(F, cals)
    assert curve == pytest.approx(expected_curve, abs=1e-12)
    assert list(cumulative_min(np.array([3.0, 5.0, 2.0, 4.0]))) == [3, 3, 2, 2]
    assert leaderboard_score(F, cals) == pytest.approx(100 * 17 / 30, abs=1e-12)
    assert median_score(F, cals) == pytest.approx(100 * 19 / 30, abs=1e-12)
    assert time.perf_counter() - t0 < 1.0
    print(f"\n[PASS] criterion 1: scoring math exact to 1e-12 ({_elapsed(t0)})")


def test_criterion_2_score_endpoints():
    t0 = time.perf_counter()
    problem = make_synthetic_problem("identity")
    cal = calibrate(problem, rng_for(0, "cal-endpoints"), 1000)

    class Fixed:
        def __init__(self, value):
            self.value = value

        def __call__(self, space, seed, warm_start=None):
            outer = self

            class _Opt(create_optimizer("random-search", space, seed).__class__):
                def _suggest(self, n):
                    return [{"x": outer.value} for _ in range(n)]

            return _Opt(space, seed)

    cfg = StudyConfig(batches=4, batch_size=2, n_trials=2, base_seed=0)
    tensors = {}
    for label, value in (("oracle", 0.0), ("clip-level", float(cal.clip))):
        rows = [
            run_study(problem, Fixed(value), cfg, trial, optimizer_id=label)[0]
            for trial in range(cfg.n_trials)
        ]
        tensors[label] = np.stack(rows, axis=1)[None, :, :]
    oracle = leaderboard_score(tensors["oracle"], [cal])
    clip_level = leaderboard_score(tensors["clip-level"], [cal])
    assert oracle == 100.0
    assert clip_level == 0.0
    assert time.perf_counter() - t0 < 1.0
    print(f"\n[PASS] criterion 2: oracle scores 100.000, clip-level scores 0.000 ({_elapsed(t0)})")


def test_criterion_3_affine_invariance():
    t0 = time.perf_counter()
    F, cals = crafted_tensor()
    base_score = leaderboard_score(F, cals)
    base_median = median_score(F, cals)
    a, b = 3.7, -11.0
    F2 = F.copy()
    F2[1] = np.where(np.isfinite(F2[1]), a * F2[1] + b, math.inf)
    cals2 = [cals[0], ProblemCalibration("B", a * 4.0 + b, a * 1.0 + b)]
    assert abs(leaderboard_score(F2, cals2) - base_score) < 1e-9
    assert abs(median_score(F2, cals2) - base_median) < 1e-9
    assert time.perf_counter() - t0 < 5.0
    print(f"\n[PASS] criterion 3: affine rescaling changes score by < 1e-9 ({_elapsed(t0)})")


def test_criterion_4_order_statistics_oracle():
    t0 = time.perf_counter()
    rng = rng_for(4, "pools")
    checked = 0
    for size in range(2, 13):
        pool = [float(x) for x in rng.uniform(0.0, 50.0, size)]
        fractions_pool = sorted(Fraction(x) for x in pool)
        for m in range(1, size + 1):
            subsets = itertools.combinations(fractions_pool, m)
            total = sum(min(s) for s in subsets)
            oracle = total / Fraction(math.comb(size, m))
            assert expected_min_of_m(pool, m, exact=True) == oracle
            checked += 1
    assert time.perf_counter() - t0 < 5.0
    print(f"\n[PASS] criterion 4: pooled estimator exact vs enumeration on {checked} (pool, m) cases ({_elapsed(t0)})")


def test_criterion_5_random_search_self_consistency(reference_results):
    t0 = time.perf_counter()
    rows, curve = leaderboard_rows(reference_results)
    assert curve is not None
    rs = next(r for r in rows if r.team == "random-search")
    assert 128 * 0.9 <= rs.rs_iters <= 128 * 1.1
    assert 0.90 <= rs.rs_efficiency <= 1.10
    print(
        f"\n[PASS] criterion 5: random search maps to {rs.rs_iters:.1f} iters, "
        f"efficiency {rs.rs_efficiency:.3f} ({_elapsed(t0)})"
    )


def test_criterion_6_bayesian_optimization_beats_random_search(reference_results):
    t0 = time.perf_counter()
    cals = reference_results.resolved_calibrations()
    scores = {
        opt: leaderboard_score(t.F, cals) for opt, t in reference_results.tensors.items()
    }
    rs = scores["random-search"]
    for member in MEMBERS:
        assert scores[member] >= rs + 5.0, f"{member}: {scores[member]:.3f} vs rs {rs:.3f}"
    print(
        f"\n[PASS] criterion 6: turbo-lite {scores['turbo-lite']:.3f}, "
        f"gp-ei {scores['gp-ei']:.3f} vs random search {rs:.3f} (gap >= 5) ({_elapsed(t0)})"
    )


def test_criterion_7_ensembling_helps(reference_results):
    t0 = time.perf_counter()
    cals = reference_results.resolved_calibrations()
    scores = {
        opt: leaderboard_score(t.F, cals) for opt, t in reference_results.tensors.items()
    }
    best_member = max(scores[m] for m in MEMBERS)
    assert scores[ENSEMBLE] >= best_member - 0.5
    per = per_problem_scores(reference_results)
    p25 = {opt: float(np.percentile(v[~np.isnan(v)], 25)) for opt, v in per.items()}
    for member in MEMBERS:
        assert p25[ENSEMBLE] >= p25[member], f"p25 {p25[ENSEMBLE]:.2f} < {member} {p25[member]:.2f}"
    print(
        f"\n[PASS] criterion 7: ensemble {scores[ENSEMBLE]:.3f} vs best member "
        f"{best_member:.3f}; p25 {p25[ENSEMBLE]:.2f} >= members ({_elapsed(t0)})"
    )


def test_criterion_8_bootstrap_correctness():
    t0 = time.perf_counter()
    cals = [ProblemCalibration("p", 1.0, 0.0)]
    dominance = {
        "better": np.array([[0.05, 0.10, 0.15, 0.12]]),
        "worse": np.array([[0.55, 0.60, 0.65, 0.62]]),
    }
    scores = bootstrap_scores(dominance, cals, BootstrapConfig(1000, seed=8))
    dist = rank_confidence(scores)
    assert dist.confidence_set(0.9) == ((("better", "worse"), 1.0),)

    rng = rng_for(8, "sym")
    values = rng.uniform(0.2, 0.8, size=(1, 10))
    symmetric = {"a": values, "b": values[:, ::-1].copy()}
    scores = bootstrap_scores(symmetric, cals, BootstrapConfig(10_000, seed=9))
    dist = rank_confidence(scores)
    freq = dict(dist.rankings)[("a", "b")]
    assert freq == pytest.approx(0.5, abs=0.02)
    assert time.perf_counter() - t0 < 60.0
    print(
        f"\n[PASS] criterion 8: dominance certain at 1.0, symmetric order at "
        f"{freq:.3f} (50% +- 2%) ({_elapsed(t0)})"
    )


def test_criterion_9_budget_cutoff_semantics():
    t0 = time.perf_counter()
    problem = make_synthetic_problem("sphere", dim=2)
    clock = VirtualClock()
    suggest_calls = []

    def factory(space, seed, warm_start=None):
        opt = SlowOptimizer(space, seed, clock, slow_batch=3, seconds=50.0)
        original = opt.suggest

        def tracked(n):
            suggest_calls.append(n)
            return original(n)

        opt.suggest = tracked
        return opt

    cfg = StudyConfig(batches=16, batch_size=8, n_trials=1, base_seed=1)
    F, cut, log = run_study(problem, factory, cfg, 0, optimizer_id="slow", clock=clock)
    assert len(suggest_calls) == 3  # no suggest calls after batch 3
    assert log.cutoff_after == 3 and cut[3:].all()
    cal = ProblemCalibration(problem.id, clip=1.0, opt=0.0)
    score = leaderboard_score(F[None, :, None], [cal])
    manual = 100.0 * (1.0 - min(min(F[:3]), 1.0))
    assert score == pytest.approx(manual, abs=1e-12)
    assert time.perf_counter() - t0 < 1.0
    print(f"\n[PASS] criterion 9: cut off after batch 3, score equals cummin of batches 1-3 ({_elapsed(t0)})")


def test_criterion_10_warm_start_direction(reference_results, warm_rerun):
    t0 = time.perf_counter()
    cold_cals = reference_results.resolved_calibrations()
    warm_cals = warm_rerun.resolved_calibrations()
    aware, ignoring = "turbo-lite", "random-search"

    cold_scores = {
        opt: leaderboard_score(reference_results.tensors[opt].F, cold_cals)
        for opt in (aware, ignoring)
    }
    warm_scores = {
        opt: leaderboard_score(warm_rerun.tensors[opt].F, warm_cals)
        for opt in (aware, ignoring)
    }
    assert warm_scores[aware] > cold_scores[aware], (
        f"warm {warm_scores[aware]:.3f} vs cold {cold_scores[aware]:.3f}"
    )

    # warm-start-ignoring optimizer: bootstrap 95% CI of the change covers 0
    cfg = BootstrapConfig(2000, seed=10)
    cold_final = final_clipped_by_trial(reference_results.tensors[ignoring].F, cold_cals)
    warm_final = final_clipped_by_trial(warm_rerun.tensors[ignoring].F, warm_cals)
    boots = bootstrap_scores({"cold": cold_final, "warm": warm_final}, cold_cals, cfg)
    delta = boots["warm"] - boots["cold"]
    lo, hi = np.percentile(delta, [2.5, 97.5])
    assert lo <= 0.0 <= hi
    print(
        f"\n[PASS] criterion 10: warm-aware {cold_scores[aware]:.3f} -> "
        f"{warm_scores[aware]:.3f}; ignoring delta CI [{lo:.3f}, {hi:.3f}] covers 0 ({_elapsed(t0)})"
    )


def test_criterion_11_property_fuzz():
    t0 = time.perf_counter()
    rng = rng_for(11, "fuzz")
    # 100 random spaces: encode/decode round trip
    for _ in range(100):
        space = random_space(rng)
        for _ in range(3):
            s = space.sample(rng)
            back = space.decode(space.encode(s))
            for p in space.params:
                if p.kind == "real":
                    assert abs(back[p.name] - s[p.name]) <= 1e-12 * max(abs(s[p.name]), 1e-30)
                else:
                    assert back[p.name] == s[p.name]

    # suggestion validity and crash containment for every optimizer family
    specs = ["random-search", "turbo-lite", "gp-ei", "de", ENSEMBLE, "switch:gp-ei>de@2"]
    for spec in specs:
        frng = rng_for(11, spec)
        for _ in range(8):
            space = random_space(frng)
            opt = create_optimizer(spec, space, seed=int(frng.integers(2**31)))
            for _ in range(2):
                batch = opt.suggest(4)
                assert len(batch) == 4
                losses = []
                for s in batch:
                    space.validate(s)
                    losses.append(math.inf if frng.random() < 0.25 else float(frng.random()))
                opt.observe(batch, losses)  # crashes must never raise

    # cumulative-min monotonicity on random tensors with crashes
    for _ in range(50):
        F = rng.uniform(size=(4, 8, 3))
        F[rng.random(F.shape) < 0.15] = math.inf
        S = cumulative_min(F, axis=1)
        assert np.all(S[:, 1:, :] <= S[:, :-1, :])
    assert time.perf_counter() - t0 < 120.0
    print(f"\n[PASS] criterion 11: zero violations across round-trip, validity, and monotonicity fuzz ({_elapsed(t0)})")

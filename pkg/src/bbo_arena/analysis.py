"""Post-hoc statistics: bootstrap ranking confidence and random-search
equivalence.

The bootstrap resamples, per problem and independently per team, the N
final trial scores with replacement, and recomputes the full normalized
grand-mean score per replication.  Ranking teams inside each replication
produces a distribution over complete rankings; the smallest set of
rankings covering 90% of replications is the reported confidence set.

The random-search curve estimates what RS would score after m
evaluations from a pool of single-evaluation draws, using the unbiased
order-statistics estimator for E[min of m i.i.d. draws]:
``E_m = sum_i x_(i) * C(M - i, m - 1) / C(M, m)`` over the pool sorted
ascending (1-based i).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import ConfigError, DataError
from .scoring import grand_mean_from_final
from .seeding import rng_for


@dataclass(frozen=True)
class BootstrapConfig:
    replications: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if self.replications < 100:
            raise ConfigError(f"replications must be >= 100, got {self.replications}")


def bootstrap_scores(final_by_team: dict, calibrations: list, cfg: BootstrapConfig) -> dict:
    """Per-team bootstrap score distributions, shape (B,) each.

    ``final_by_team`` maps team id to its (P, N) final clipped values.
    Every team must cover the same problems with the same trial count.
    Replication i draws from a stream seeded by (cfg.seed, i), so the
    distribution is independent of evaluation order.
    """
    teams = list(final_by_team)
    if not teams:
        raise ConfigError("bootstrap needs at least one team")
    shape = final_by_team[teams[0]].shape
    P = len(calibrations)
    for team, mat in final_by_team.items():
        if mat.shape != shape or mat.shape[0] != P:
            raise ConfigError(
                f"{team}: shape {mat.shape} does not match {shape} over {P} problems"
            )
    n_trials = shape[1]
    B = cfg.replications
    out = {team: np.empty(B) for team in teams}
    stacked = np.stack([final_by_team[t] for t in teams])  # (teams, P, N)
    for i in range(B):
        rng = rng_for(cfg.seed, "bootstrap", i)
        idx = rng.integers(0, n_trials, size=(len(teams), P, n_trials))
        resampled = np.take_along_axis(stacked, idx, axis=2)
        for t_idx, team in enumerate(teams):
            out[team][i] = grand_mean_from_final(resampled[t_idx], calibrations)
    return out


@dataclass(frozen=True)
class RankingDistribution:
    """Frequencies of complete rankings across bootstrap replications."""

    rankings: tuple  # ((team ids best-first), frequency), sorted by frequency
    rank_histogram: dict  # team -> np.ndarray of P(rank r)
    replications: int

    def confidence_set(self, level: float = 0.9) -> tuple:
        """Smallest prefix of rankings whose frequencies sum to >= level."""
        total, out = 0.0, []
        for ranking, freq in self.rankings:
            out.append((ranking, freq))
            total += freq
            if total >= level:
                break
        return tuple(out)


def rank_confidence(scores_by_team: dict) -> RankingDistribution:
    """Rank teams inside each replication (ties stay in team order)."""
    teams = list(scores_by_team)
    matrix = np.stack([scores_by_team[t] for t in teams])  # (teams, B)
    B = matrix.shape[1]
    counts: Counter = Counter()
    hist = {t: np.zeros(len(teams)) for t in teams}
    order_keys = np.arange(len(teams))
    for i in range(B):
        order = np.lexsort((order_keys, -matrix[:, i]))
        ranking = tuple(teams[j] for j in order)
        counts[ranking] += 1
        for rank, j in enumerate(order):
            hist[teams[j]][rank] += 1
    for t in teams:
        hist[t] /= B
    ranked = tuple(
        (ranking, count / B)
        for ranking, count in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    )
    return RankingDistribution(ranked, hist, B)


# --- random-search equivalence ----------------------------------------------


def expected_min_weights(M: int, m: int) -> np.ndarray:
    """L-estimator weights over the ascending order statistics.

    Proportional to ``C(M - i, m - 1)``, normalized in log space so that
    large pools neither overflow nor lose mass.
    """
    if not 1 <= m <= M:
        raise ConfigError(f"need 1 <= m <= M, got m={m}, M={M}")
    i = np.arange(1, M + 1)
    valid = i <= M - m + 1
    logw = np.full(M, -np.inf)
    a = (M - i[valid]).astype(float)
    logw[valid] = gammaln(a + 1.0) - gammaln(a - (m - 1) + 1.0)
    return np.exp(logw - logsumexp(logw))


def expected_min_weights_exact(M: int, m: int) -> list:
    """Exact rational weights C(M - i, m - 1) / C(M, m), 1-based i."""
    denom = math.comb(M, m)
    return [Fraction(math.comb(M - i, m - 1), denom) for i in range(1, M + 1)]


def expected_min_of_m(pool, m: int, exact: bool = False):
    """Unbiased estimate of E[min of m i.i.d. draws] from a pool.

    With ``exact=True`` the result is a :class:`Fraction` computed with
    integer binomials (pools must be modest in size).
    """
    values = sorted(float(x) for x in pool)
    M = len(values)
    if exact:
        weights = expected_min_weights_exact(M, m)
        return sum(Fraction(v) * w for v, w in zip(values, weights))
    return float(np.dot(values, expected_min_weights(M, m)))


@dataclass(frozen=True)
class RSCurve:
    """Expected random-search score after m single evaluations."""

    m_grid: np.ndarray  # increasing ints
    per_problem: np.ndarray  # (P, len(m_grid)) expected clipped minima
    scores: np.ndarray  # aggregate 0-100 score per grid point
    problem_ids: list
    pool_size: int

    def to_rows(self):
        return [(int(m), float(s)) for m, s in zip(self.m_grid, self.scores)]


def _default_grid(M: int) -> np.ndarray:
    dense = np.arange(1, min(M, 512) + 1)
    if M <= 512:
        return dense
    sparse = np.unique(np.geomspace(512, M, 257).astype(int))
    return np.unique(np.concatenate([dense, sparse]))


def pooled_rs_curve(calibrations: list, pools: list | None = None, m_grid=None) -> RSCurve:
    """Score-versus-m curve from per-problem pools of single RS draws.

    Pools default to the calibration samples.  Values are clipped at the
    problem baseline first (a crash behaves exactly like a clip-level
    draw), which makes the estimator match the scoring pipeline's
    clip-then-running-min semantics.
    """
    if pools is None:
        pools = [cal.samples for cal in calibrations]
    if any(p is None for p in pools):
        raise DataError("a problem is missing its random-search pool")
    M = min(len(p) for p in pools)
    if M < 1000:
        raise DataError(f"pools must hold >= 1000 evaluations, got {M}")
    m_grid = _default_grid(M) if m_grid is None else np.asarray(m_grid, dtype=int)
    if m_grid.max() > M:
        raise DataError(f"cannot estimate beyond the pool size {M}")
    weights = [expected_min_weights(M, int(m)) for m in m_grid]
    per_problem = np.empty((len(calibrations), len(m_grid)))
    for p, (cal, pool) in enumerate(zip(calibrations, pools)):
        clipped = np.minimum(np.asarray(pool, dtype=float)[:M], cal.clip)
        clipped.sort()
        for j, w in enumerate(weights):
            per_problem[p, j] = float(np.dot(clipped, w))
    scores = np.array(
        [
            grand_mean_from_final(per_problem[:, j : j + 1], calibrations)
            for j in range(len(m_grid))
        ]
    )
    scores = np.maximum.accumulate(scores)  # guard float wiggle; E_m is monotone
    return RSCurve(m_grid, per_problem, scores, [c.problem_id for c in calibrations], M)


@dataclass(frozen=True)
class RSEquivalence:
    iters: float
    efficiency: float
    saturated: bool = False  # score above everything the pool can attain

    def iters_label(self) -> str:
        return f">{int(self.iters)}" if self.saturated else f"{self.iters:.0f}"


def rs_equivalence(score: float, curve: RSCurve, budget: int = 128) -> RSEquivalence:
    """Random-search evaluations needed to match ``score``.

    Log-linear interpolation between grid points; scores below the
    one-evaluation mark floor at m = 1, scores above the pool's reach
    return a saturated marker at the pool size.
    """
    scores, grid = curve.scores, curve.m_grid
    if score <= scores[0]:
        return RSEquivalence(float(grid[0]), float(grid[0]) / budget)
    if score > scores[-1]:
        return RSEquivalence(float(curve.pool_size), float(curve.pool_size) / budget, True)
    hi = int(np.searchsorted(scores, score, side="left"))
    lo = hi - 1
    while lo > 0 and scores[lo] >= scores[hi]:  # skip flat spans
        lo -= 1
    s_lo, s_hi = scores[lo], scores[hi]
    frac = 0.0 if s_hi == s_lo else (score - s_lo) / (s_hi - s_lo)
    log_m = math.log(grid[lo]) + frac * (math.log(grid[hi]) - math.log(grid[lo]))
    iters = math.exp(log_m)
    return RSEquivalence(iters, iters / budget)

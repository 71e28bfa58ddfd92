"""Normalized 0-100 scoring.

Per problem and trial, the batch-min series is reduced to its running
best, clipped at the problem's baseline (the median loss of one random
draw), averaged over trials, linearly rescaled between the best known
loss (0) and the baseline (1), and finally averaged over problems.  The
leaderboard score is ``100 * (1 - grand_mean)`` at the final batch:
0 means "about one random guess", 100 means "always finds the best
known optimum".  The pipeline is invariant to an affine rescaling of
any single objective.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import CalibrationError, ConfigError, DataError, EvaluationCrash, ShapeError
from .problems import Problem, evaluate

log = logging.getLogger(__name__)

MIN_CALIBRATION_SAMPLES = 1000


@dataclass(frozen=True)
class ProblemCalibration:
    """Normalization anchors for one problem.

    ``clip`` is the median loss of a single random-search evaluation;
    ``opt`` is the best known loss.  ``samples`` keeps the raw
    calibration pool (inf where the evaluation crashed) because the same
    draws double as the random-search pool for equivalence curves.
    """

    problem_id: str
    clip: float
    opt: float
    samples: np.ndarray | None = None
    crash_count: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.clip) and math.isfinite(self.opt)):
            raise DataError(f"{self.problem_id}: calibration anchors must be finite")
        if self.opt > self.clip:
            raise DataError(f"{self.problem_id}: opt {self.opt} exceeds clip {self.clip}")

    @property
    def n_samples(self) -> int:
        return 0 if self.samples is None else len(self.samples)

    @property
    def crash_rate(self) -> float:
        n = self.n_samples
        return self.crash_count / n if n else 0.0

    @property
    def degenerate(self) -> bool:
        return not (self.clip > self.opt)


def calibrate(problem: Problem, rng: np.random.Generator, n_rs_samples: int = 10_000) -> ProblemCalibration:
    """Estimate clip/opt anchors from single random-search evaluations.

    Crashes are excluded from the median pool but kept in ``samples``
    (as inf) and counted in the crash rate.  ``opt`` is the analytic
    optimum when the problem has one, else the pool minimum; it is
    lowered later with every observed evaluation via
    :func:`resolve_opt`.
    """
    if n_rs_samples < MIN_CALIBRATION_SAMPLES:
        raise ConfigError(f"n_rs_samples must be >= {MIN_CALIBRATION_SAMPLES}")
    samples = np.empty(n_rs_samples)
    crashes = 0
    for i in range(n_rs_samples):
        suggestion = problem.space.sample(rng)
        eval_seed = int(rng.integers(2**62))
        try:
            samples[i] = evaluate(problem, suggestion, eval_seed)
        except EvaluationCrash:
            samples[i] = math.inf
            crashes += 1
    finite = samples[np.isfinite(samples)]
    if len(finite) == 0:
        raise CalibrationError(f"{problem.id}: every calibration sample crashed")
    clip = float(np.median(finite))
    opt = problem.known_opt if problem.known_opt is not None else float(np.min(finite))
    return ProblemCalibration(problem.id, clip, float(opt), samples, crashes)


def resolve_opt(calibrations: list, tensors_by_optimizer: dict) -> list:
    """Lower each problem's ``opt`` to the pooled observed minimum.

    Problems with an analytic optimum keep it; the rest take the best
    loss seen across every optimizer, trial, and calibration sample, so
    normalized performance stays within [0, 1].
    """
    out = []
    for p_idx, cal in enumerate(calibrations):
        observed = [cal.opt]
        for tensor in tensors_by_optimizer.values():
            if tensor.problem_ids[p_idx] != cal.problem_id:
                raise ConfigError("tensor problem order does not match calibrations")
            block = tensor.F[p_idx]
            finite = block[np.isfinite(block)]
            if len(finite):
                observed.append(float(finite.min()))
        out.append(replace(cal, opt=min(observed)))
    return out


def cumulative_min(F: np.ndarray, axis: int | None = None) -> np.ndarray:
    """Running best over batches; axis defaults to 0 for a series, 1 for
    a (P, T, N) tensor."""
    F = np.asarray(F, dtype=float)
    if axis is None:
        axis = 0 if F.ndim == 1 else 1
    if F.shape[axis] == 0:
        raise ShapeError("cumulative_min needs a nonempty batch axis")
    return np.minimum.accumulate(F, axis=axis)


def clip_scores(S: np.ndarray, clip) -> np.ndarray:
    """Elementwise min with the baseline; maps inf (crashes) to clip."""
    return np.minimum(np.asarray(S, dtype=float), clip)


def _clips_column(calibrations) -> np.ndarray:
    return np.asarray([c.clip for c in calibrations])[:, None, None]


def _aggregate(perf_pt: np.ndarray, calibrations) -> tuple[np.ndarray, np.ndarray, list]:
    """Normalize per-problem performance and take the grand mean over
    problems; returns (curve over t, per-problem final norms, dropped ids)."""
    kept_rows, norms, dropped = [], [], []
    for p, cal in enumerate(calibrations):
        if cal.degenerate:
            dropped.append(cal.problem_id)
            norms.append(math.nan)
            continue
        kept_rows.append((perf_pt[p] - cal.opt) / (cal.clip - cal.opt))
        norms.append(kept_rows[-1][-1])
    if dropped:
        log.warning("dropping degenerate problems (clip == opt): %s", dropped)
    if not kept_rows:
        raise DataError("every problem is degenerate; nothing to score")
    T = perf_pt.shape[1]
    curve = np.array([math.fsum(row[t] for row in kept_rows) / len(kept_rows) for t in range(T)])
    return curve, np.asarray(norms), dropped


def _trial_average(Sc: np.ndarray, average: str) -> np.ndarray:
    P, T, _ = Sc.shape
    if average == "median":
        return np.median(Sc, axis=2)
    return np.array([[math.fsum(Sc[p, t]) / Sc.shape[2] for t in range(T)] for p in range(P)])


def normalized_curve(F: np.ndarray, calibrations: list, average: str = "mean") -> np.ndarray:
    """Grand-mean normalized performance per batch (0 optimal, 1 baseline)."""
    F = np.asarray(F, dtype=float)
    if F.ndim != 3 or F.shape[0] != len(calibrations):
        raise ShapeError(f"expected (P, T, N) with P == {len(calibrations)}, got {F.shape}")
    Sc = clip_scores(cumulative_min(F, axis=1), _clips_column(calibrations))
    curve, _, _ = _aggregate(_trial_average(Sc, average), calibrations)
    return curve


def leaderboard_score(F: np.ndarray, calibrations: list) -> float:
    """0-100 score at the final batch, trials aggregated by the mean."""
    return 100.0 * (1.0 - float(normalized_curve(F, calibrations, "mean")[-1]))


def median_score(F: np.ndarray, calibrations: list) -> float:
    """Same pipeline with the median over trials instead of the mean."""
    return 100.0 * (1.0 - float(normalized_curve(F, calibrations, "median")[-1]))


def per_problem_final_scores(F: np.ndarray, calibrations: list) -> np.ndarray:
    """Per-problem 0-100 scores at the final batch (nan where degenerate)."""
    F = np.asarray(F, dtype=float)
    Sc = clip_scores(cumulative_min(F, axis=1), _clips_column(calibrations))
    _, norms, _ = _aggregate(_trial_average(Sc, "mean"), calibrations)
    return 100.0 * (1.0 - norms)


def final_clipped_by_trial(F: np.ndarray, calibrations: list) -> np.ndarray:
    """Final-batch clipped running best per (problem, trial): the
    bootstrap's resampling unit."""
    F = np.asarray(F, dtype=float)
    Sc = clip_scores(cumulative_min(F, axis=1), _clips_column(calibrations))
    return Sc[:, -1, :]


def grand_mean_from_final(final_pn: np.ndarray, calibrations: list) -> float:
    """Score a (P, N) matrix of final clipped values (bootstrap helper)."""
    perf = np.array([[math.fsum(row) / len(row)] for row in final_pn])
    curve, _, _ = _aggregate(perf, calibrations)
    return 100.0 * (1.0 - float(curve[-1]))

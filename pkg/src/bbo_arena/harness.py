"""Study execution: the (problem, optimizer, trial) loop.

A study runs T batches of k suggestions against one problem.  Suggest
wall time is metered (evaluation time is not); an optimizer that blows
the per-iteration budget or the cumulative budget is cut off from
further suggest calls, keeping whatever it found so far.  Objective
crashes become infinite losses; optimizer exceptions downgrade the rest
of the study to random-search fallback suggestions so the run always
produces a full tensor.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, EvaluationCrash
from .optimizers import ObservationArchive, create_optimizer, strategy_id, validate_strategy
from .problems import Problem, ProblemSuite, evaluate
from .seeding import rng_for, stable_seed
from .space import anonymize


@dataclass(frozen=True)
class StudyConfig:
    batches: int = 16
    batch_size: int = 8
    n_trials: int = 10
    total_budget: float = 640.0
    per_iter_budget: float = 40.0
    base_seed: int = 0

    def __post_init__(self):
        if self.batches < 1 or self.batch_size < 1 or self.n_trials < 1:
            raise ConfigError("batches, batch_size, and n_trials must be >= 1")
        if self.total_budget <= 0 or self.per_iter_budget <= 0:
            raise ConfigError("budgets must be positive")


@dataclass
class BatchRecord:
    batch: int  # 1-based
    suggestions: list
    losses: list  # math.inf marks a crash
    suggest_seconds: float
    fallback: bool = False


@dataclass
class StudyLog:
    problem_id: str
    optimizer_id: str
    trial: int
    records: list = field(default_factory=list)
    cutoff_after: int | None = None  # last batch that ran before the cut
    fallback_from: int | None = None  # first batch served by the rs fallback
    error: str | None = None

    def observations(self):
        for rec in self.records:
            yield from zip(rec.suggestions, rec.losses)


@dataclass
class EvalTensor:
    """F[p][t][n]: best loss in batch t of trial n on problem p."""

    optimizer_id: str
    problem_ids: list
    F: np.ndarray  # (P, T, N), +inf where every evaluation crashed
    cutoff: np.ndarray  # (P, T, N) bool, batches never suggested

    def __post_init__(self):
        if self.F.shape != self.cutoff.shape or self.F.ndim != 3:
            raise ConfigError(f"inconsistent tensor shapes {self.F.shape} / {self.cutoff.shape}")


class BudgetTracker:
    """Applies the per-iteration and cumulative suggest-time limits."""

    def __init__(self, per_iter: float, total: float):
        self.per_iter = per_iter
        self.total = total
        self.spent = 0.0
        self.tripped = False

    def record(self, seconds: float) -> bool:
        """Account one suggest call; returns True if the study is now cut off."""
        self.spent += seconds
        if seconds > self.per_iter or self.spent > self.total:
            self.tripped = True
        return self.tripped


def trial_eval_seed(base_seed: int, problem_id: str, trial: int) -> int:
    # shared across optimizers so trial n sees the same split everywhere
    return stable_seed(base_seed, problem_id, trial, "trial")


def run_study(
    problem: Problem,
    make_optimizer,
    cfg: StudyConfig,
    trial_index: int,
    *,
    optimizer_id: str = "optimizer",
    clock=None,
    warm_start: ObservationArchive | None = None,
    anonymized: bool = False,
):
    """One full study; returns (F row (T,), cutoff mask (T,), StudyLog).

    ``make_optimizer(space, seed, warm_start)`` must build a fresh
    optimizer; ``clock`` defaults to ``time.monotonic`` and is
    injectable for deterministic budget tests.
    """
    clock = clock or time.monotonic
    T, k = cfg.batches, cfg.batch_size
    opt_space, name_map = problem.space, None
    if anonymized:
        opt_space, name_map = anonymize(problem.space)
    seed = stable_seed(cfg.base_seed, optimizer_id, problem.id, trial_index)
    eval_seed = trial_eval_seed(cfg.base_seed, problem.id, trial_index)
    fallback_rng = rng_for(cfg.base_seed, optimizer_id, problem.id, trial_index, "fallback")
    log = StudyLog(problem.id, optimizer_id, trial_index)

    try:
        optimizer = make_optimizer(opt_space, seed, warm_start)
    except Exception as exc:  # noqa: BLE001 - optimizer bugs must not kill the run
        optimizer = None
        log.error = f"construction failed: {exc!r}"
        log.fallback_from = 1

    F = np.full(T, math.inf)
    cutoff = np.zeros(T, dtype=bool)
    budget = BudgetTracker(cfg.per_iter_budget, cfg.total_budget)

    for t in range(T):
        if budget.tripped:
            cutoff[t] = True
            continue
        suggestions, dt, fallback = None, 0.0, optimizer is None
        if optimizer is not None:
            t0 = clock()
            try:
                suggestions = optimizer.suggest(k)
                if len(suggestions) != k:
                    raise ConfigError(f"expected {k} suggestions, got {len(suggestions)}")
                for s in suggestions:
                    opt_space.validate(s)
            except Exception as exc:  # noqa: BLE001
                optimizer = None
                fallback = True
                suggestions = None
                log.error = log.error or f"suggest failed at batch {t + 1}: {exc!r}"
                log.fallback_from = t + 1
            dt = clock() - t0
        if suggestions is None:
            suggestions = [opt_space.sample(fallback_rng) for _ in range(k)]
        losses = []
        for s in suggestions:
            raw = name_map.invert(s) if name_map else s
            try:
                losses.append(float(evaluate(problem, raw, eval_seed)))
            except EvaluationCrash:
                losses.append(math.inf)
        F[t] = min(losses)
        log.records.append(BatchRecord(t + 1, suggestions, losses, dt, fallback))
        if budget.record(dt):
            log.cutoff_after = t + 1
            optimizer = None  # cut off: no further suggest or observe calls
            continue
        if optimizer is not None:
            try:
                optimizer.observe(suggestions, losses)
            except Exception as exc:  # noqa: BLE001
                optimizer = None
                log.error = log.error or f"observe failed at batch {t + 1}: {exc!r}"
                log.fallback_from = t + 2
    return F, cutoff, log


def _study_task(args):
    problem, spec, cfg, trial, opt_id, warm, anonymized = args
    make = _SpecFactory(spec)
    return run_study(
        problem, make, cfg, trial, optimizer_id=opt_id, warm_start=warm, anonymized=anonymized
    )


class _SpecFactory:
    """Picklable optimizer factory from a registry spec."""

    def __init__(self, spec):
        self.spec = spec

    def __call__(self, space, seed, warm_start=None):
        return create_optimizer(self.spec, space, seed, warm_start)


def run_suite(
    suite: ProblemSuite,
    optimizer_specs: list,
    cfg: StudyConfig,
    *,
    anonymized: bool = False,
    workers: int = 1,
    warm_archives: dict | None = None,
):
    """All (problem, optimizer, trial) studies; returns (tensors, logs).

    ``tensors`` maps optimizer id to :class:`EvalTensor`; ``logs`` maps
    ``(optimizer_id, problem_id, trial)`` to the study log.  Studies are
    independent; seeds derive from indices, so execution order and
    worker count do not affect results.
    """
    ids = [validate_strategy(spec) for spec in optimizer_specs]
    if len(set(ids)) != len(ids):
        raise ConfigError(f"duplicate optimizer ids: {ids}")
    T, N = cfg.batches, cfg.n_trials
    tensors, logs = {}, {}
    tasks = []
    for spec, opt_id in zip(optimizer_specs, ids):
        for p_idx, problem in enumerate(suite.problems):
            warm = (warm_archives or {}).get(problem.id)
            for trial in range(N):
                tasks.append((p_idx, trial, opt_id, (problem, spec, cfg, trial, opt_id, warm, anonymized)))
    results = {}
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for (p_idx, trial, opt_id, _), out in zip(
                tasks, pool.map(_study_task, [t[3] for t in tasks], chunksize=1)
            ):
                results[(opt_id, p_idx, trial)] = out
    else:
        for p_idx, trial, opt_id, args in tasks:
            results[(opt_id, p_idx, trial)] = _study_task(args)
    P = len(suite.problems)
    for opt_id in ids:
        F = np.full((P, T, N), math.inf)
        cut = np.zeros((P, T, N), dtype=bool)
        for p_idx, problem in enumerate(suite.problems):
            for trial in range(N):
                f_row, c_row, log = results[(opt_id, p_idx, trial)]
                F[p_idx, :, trial] = f_row
                cut[p_idx, :, trial] = c_row
                logs[(opt_id, problem.id, trial)] = log
        tensors[opt_id] = EvalTensor(opt_id, list(suite.ids), F, cut)
    return tensors, logs

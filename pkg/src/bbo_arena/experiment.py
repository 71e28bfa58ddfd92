"""Experiment orchestration: run, persist, resume, score.

A results directory is laid out as::

    out/
      manifest.json                     resolved run configuration
      suite.json                        problem descriptors
      calibrations.json                 clip/opt summaries per problem
      results/<optimizer>/<problem>/trial_<n>.jsonl   one record per batch
      leaderboard.csv|.json, scores.csv, rs_curve.csv, analysis.json
      figures/*.png

Studies are resumable by (optimizer, problem, trial): complete JSONL
files are loaded instead of re-run unless ``fresh`` is set.  The
calibration sample pools live in a cache directory (``BBO_ARENA_CACHE``
overrides its location) keyed by problem id, calibration seed, and
sample count.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .analysis import BootstrapConfig, RSCurve, bootstrap_scores, pooled_rs_curve, rank_confidence, rs_equivalence
from .errors import ConfigError, DataError
from .harness import EvalTensor, StudyConfig, _study_task
from .optimizers import ObservationArchive, strategy_id, validate_strategy
from .problems import REFERENCE_SUITE, ProblemSuite, suite_from_manifest
from .scoring import (
    ProblemCalibration,
    calibrate,
    final_clipped_by_trial,
    leaderboard_score,
    median_score,
    per_problem_final_scores,
    resolve_opt,
)
from .seeding import rng_for
from .space import anonymize

WARM_HARVEST_CAP = 32  # best observations kept per source problem


@dataclass
class ExperimentManifest:
    suite: object = "reference"  # "reference" | path | list of entries
    optimizers: list = field(default_factory=lambda: ["random-search"])
    trials: int = 10
    batches: int = 16
    batch_size: int = 8
    seed: int = 0
    anonymize: bool = False
    out: str = "results"
    calibration_samples: int = 10_000
    warm_start_from: str | None = None
    workers: int = 1

    def study_config(self) -> StudyConfig:
        return StudyConfig(
            batches=self.batches,
            batch_size=self.batch_size,
            n_trials=self.trials,
            base_seed=self.seed,
        )

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentManifest":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown manifest keys: {sorted(unknown)}")
        return cls(**data)


def resolve_suite(spec) -> tuple[ProblemSuite, list]:
    """Accepts "reference", a manifest path, or inline problem entries."""
    if isinstance(spec, str):
        if spec == "reference":
            return suite_from_manifest(REFERENCE_SUITE), list(REFERENCE_SUITE)
        path = Path(spec)
        if not path.exists():
            raise ConfigError(f"suite file not found: {path}")
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"suite file {path} is not valid JSON: {exc}") from exc
        if isinstance(data, dict):
            entries = data.get("problems")
            label = data.get("split_label", "practice")
        else:
            entries, label = data, "practice"
        return suite_from_manifest(entries, label), entries
    if isinstance(spec, list):
        return suite_from_manifest(spec), spec
    raise ConfigError(f"suite must be a name, path, or entry list, got {type(spec).__name__}")


def _safe_name(identifier: str) -> str:
    safe = re.sub(r"[^A-Za-z0-9._-]+", "_", identifier)
    if safe != identifier:
        digest = hashlib.sha256(identifier.encode()).hexdigest()[:8]
        safe = f"{safe}-{digest}"
    return safe


def _dump_json(data, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _loss_to_json(loss: float):
    return None if math.isinf(loss) else loss


def _loss_from_json(value) -> float:
    return math.inf if value is None else float(value)


# --- calibration cache --------------------------------------------------------


def calibration_cache_dir(out_dir: Path) -> Path:
    env = os.environ.get("BBO_ARENA_CACHE")
    return Path(env) if env else out_dir / "calibration-cache"


def _calibration_path(cache_dir: Path, problem_id: str, seed: int, n: int) -> Path:
    return cache_dir / f"{_safe_name(problem_id)}-s{seed}-n{n}.json"


def _save_calibration(cal: ProblemCalibration, path: Path, seed: int) -> None:
    _dump_json(
        {
            "problem": cal.problem_id,
            "seed": seed,
            "n": cal.n_samples,
            "clip": cal.clip,
            "opt": cal.opt,
            "crash_count": cal.crash_count,
            "samples": [_loss_to_json(x) for x in cal.samples],
        },
        path,
    )


def _load_calibration(path: Path) -> ProblemCalibration:
    data = json.loads(path.read_text())
    samples = np.array([_loss_from_json(v) for v in data["samples"]])
    return ProblemCalibration(
        data["problem"], data["clip"], data["opt"], samples, data["crash_count"]
    )


def run_calibrations(suite: ProblemSuite, seed: int, n_samples: int, cache_dir: Path, workers: int = 1) -> list:
    """Calibrate every problem, reusing cached pools when the key matches."""
    todo = []
    slots: list = [None] * len(suite.problems)
    for idx, problem in enumerate(suite.problems):
        path = _calibration_path(cache_dir, problem.id, seed, n_samples)
        if path.exists():
            slots[idx] = _load_calibration(path)
        else:
            todo.append((idx, problem, path))
    if todo:
        args = [(problem, seed, n_samples) for _, problem, _ in todo]
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                done = list(pool.map(_calibrate_task, args))
        else:
            done = [_calibrate_task(a) for a in args]
        for (idx, _, path), cal in zip(todo, done):
            _save_calibration(cal, path, seed)
            slots[idx] = cal
    return slots


def _calibrate_task(args):
    problem, seed, n_samples = args
    return calibrate(problem, rng_for(seed, "calibration", problem.id), n_samples)


# --- study persistence --------------------------------------------------------


def _trial_path(out_dir: Path, optimizer_id: str, problem_id: str, trial: int) -> Path:
    return (
        out_dir
        / "results"
        / _safe_name(optimizer_id)
        / _safe_name(problem_id)
        / f"trial_{trial}.jsonl"
    )


def _write_study(path: Path, log, batches: int) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = []
    for rec in log.records:
        lines.append(
            json.dumps(
                {
                    "batch": rec.batch,
                    "suggestions": rec.suggestions,
                    "losses": [_loss_to_json(l) for l in rec.losses],
                    "suggest_seconds": rec.suggest_seconds,
                    "fallback": rec.fallback,
                },
                sort_keys=True,
            )
        )
    lines.append(
        json.dumps(
            {
                "completed": True,
                "batches": batches,
                "cutoff_after": log.cutoff_after,
                "error": log.error,
            },
            sort_keys=True,
        )
    )
    path.write_text("\n".join(lines) + "\n")


def _read_study(path: Path, batches: int):
    """Returns (F row, cutoff row, observations) or None when incomplete."""
    if not path.exists():
        return None
    lines = [l for l in path.read_text().splitlines() if l.strip()]
    if not lines:
        return None
    try:
        footer = json.loads(lines[-1])
    except json.JSONDecodeError:
        return None
    if not footer.get("completed") or footer.get("batches") != batches:
        return None
    F = np.full(batches, math.inf)
    cutoff = np.zeros(batches, dtype=bool)
    executed = 0
    observations = []
    for line in lines[:-1]:
        rec = json.loads(line)
        losses = [_loss_from_json(v) for v in rec["losses"]]
        F[rec["batch"] - 1] = min(losses)
        executed = max(executed, rec["batch"])
        observations.extend(zip(rec["suggestions"], losses))
    cutoff[executed:] = True
    if executed == batches:
        cutoff[:] = False
    return F, cutoff, observations


# --- warm-start harvest ---------------------------------------------------------


def harvest_warm_archives(results_dir, cap: int = WARM_HARVEST_CAP) -> dict:
    """Prior observations pooled across problems with equal space signatures.

    For each problem in the prior run, the best ``cap`` finite
    observations (across all optimizers and trials) are kept; each
    problem's warm archive merges the kept points of every problem whose
    search-space signature matches its own, itself included.
    """
    results_dir = Path(results_dir)
    manifest = load_manifest(results_dir)
    suite, _ = resolve_suite(manifest.suite)
    cfg = manifest.study_config()
    per_problem: dict[str, list] = {p.id: [] for p in suite.problems}
    for spec in manifest.optimizers:
        opt_id = strategy_id(spec)
        for problem in suite.problems:
            for trial in range(cfg.n_trials):
                loaded = _read_study(_trial_path(results_dir, opt_id, problem.id, trial), cfg.batches)
                if loaded is None:
                    continue
                _, _, observations = loaded
                per_problem[problem.id].extend(
                    (s, l) for s, l in observations if math.isfinite(l)
                )
    best: dict[str, list] = {}
    for pid, obs in per_problem.items():
        best[pid] = sorted(obs, key=lambda sl: sl[1])[:cap]
    archives = {}
    for problem in suite.problems:
        space = problem.space
        if manifest.anonymize:
            space, _ = anonymize(space)
        signature = space.signature()
        archive = ObservationArchive(signature=signature)
        for other in suite.problems:
            other_space = other.space
            if manifest.anonymize:
                other_space, _ = anonymize(other_space)
            if other_space.signature() != signature:
                continue
            for s, l in best[other.id]:
                archive.add(s, l)
        if len(archive):
            archives[problem.id] = archive
    return archives


# --- running ---------------------------------------------------------------------


@dataclass
class ExperimentResults:
    out_dir: Path
    manifest: ExperimentManifest
    suite: ProblemSuite
    calibrations: list
    tensors: dict  # optimizer id -> EvalTensor

    def resolved_calibrations(self) -> list:
        return resolve_opt(self.calibrations, self.tensors)

    def rs_curve(self) -> RSCurve | None:
        if any(c.samples is None for c in self.calibrations):
            return None
        return pooled_rs_curve(self.resolved_calibrations())


def load_manifest(out_dir) -> ExperimentManifest:
    path = Path(out_dir) / "manifest.json"
    if not path.exists():
        raise DataError(f"no manifest at {path}; is this a results directory?")
    return ExperimentManifest.from_dict(json.loads(path.read_text()))


def run_experiment(manifest: ExperimentManifest, fresh: bool = False) -> ExperimentResults:
    """Calibrate, run every study (resuming completed ones), persist."""
    for spec in manifest.optimizers:
        validate_strategy(spec)
    ids = [strategy_id(spec) for spec in manifest.optimizers]
    if len(set(ids)) != len(ids):
        raise ConfigError(f"duplicate optimizer ids: {ids}")
    suite, entries = resolve_suite(manifest.suite)
    cfg = manifest.study_config()
    out_dir = Path(manifest.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    _dump_json(manifest.to_dict(), out_dir / "manifest.json")
    _dump_json({"split_label": suite.split_label, "problems": entries}, out_dir / "suite.json")

    cache_dir = calibration_cache_dir(out_dir)
    calibrations = run_calibrations(
        suite, manifest.seed, manifest.calibration_samples, cache_dir, manifest.workers
    )
    _dump_json(
        {
            c.problem_id: {
                "clip": c.clip,
                "opt": c.opt,
                "crash_count": c.crash_count,
                "n_samples": c.n_samples,
            }
            for c in calibrations
        },
        out_dir / "calibrations.json",
    )

    warm = {}
    if manifest.warm_start_from:
        warm = harvest_warm_archives(manifest.warm_start_from)

    T, N, P = cfg.batches, cfg.n_trials, len(suite.problems)
    loaded: dict[tuple, tuple] = {}
    pending = []
    for spec, opt_id in zip(manifest.optimizers, ids):
        for p_idx, problem in enumerate(suite.problems):
            for trial in range(N):
                key = (opt_id, p_idx, trial)
                path = _trial_path(out_dir, opt_id, problem.id, trial)
                if not fresh:
                    prior = _read_study(path, T)
                    if prior is not None:
                        loaded[key] = prior[:2]
                        continue
                pending.append(
                    (key, path, (problem, spec, cfg, trial, opt_id, warm.get(problem.id), manifest.anonymize))
                )
    if pending:
        if manifest.workers > 1:
            with ProcessPoolExecutor(max_workers=manifest.workers) as pool:
                outcomes = pool.map(_study_task, [p[2] for p in pending], chunksize=1)
                for (key, path, _), (F_row, cut_row, log) in zip(pending, outcomes):
                    _write_study(path, log, T)
                    loaded[key] = (F_row, cut_row)
        else:
            for key, path, args in pending:
                F_row, cut_row, log = _study_task(args)
                _write_study(path, log, T)
                loaded[key] = (F_row, cut_row)

    tensors = {}
    for opt_id in ids:
        F = np.full((P, T, N), math.inf)
        cut = np.zeros((P, T, N), dtype=bool)
        for p_idx in range(P):
            for trial in range(N):
                F_row, cut_row = loaded[(opt_id, p_idx, trial)]
                F[p_idx, :, trial] = F_row
                cut[p_idx, :, trial] = cut_row
        tensors[opt_id] = EvalTensor(opt_id, list(suite.ids), F, cut)
    return ExperimentResults(out_dir, manifest, suite, calibrations, tensors)


def load_experiment(out_dir) -> ExperimentResults:
    """Rebuild results from disk; fails on incomplete studies."""
    out_dir = Path(out_dir)
    manifest = load_manifest(out_dir)
    suite, _ = resolve_suite(manifest.suite)
    cfg = manifest.study_config()
    cache_dir = calibration_cache_dir(out_dir)
    summary_path = out_dir / "calibrations.json"
    if not summary_path.exists():
        raise DataError(f"missing calibrations.json in {out_dir}")
    summaries = json.loads(summary_path.read_text())
    calibrations = []
    for problem in suite.problems:
        cached = _calibration_path(cache_dir, problem.id, manifest.seed, manifest.calibration_samples)
        if cached.exists():
            calibrations.append(_load_calibration(cached))
        else:
            info = summaries.get(problem.id)
            if info is None:
                raise DataError(f"no calibration for {problem.id} in {out_dir}")
            calibrations.append(
                ProblemCalibration(problem.id, info["clip"], info["opt"], None, info["crash_count"])
            )
    T, N, P = cfg.batches, cfg.n_trials, len(suite.problems)
    tensors = {}
    for spec in manifest.optimizers:
        opt_id = strategy_id(spec)
        F = np.full((P, T, N), math.inf)
        cut = np.zeros((P, T, N), dtype=bool)
        for p_idx, problem in enumerate(suite.problems):
            for trial in range(N):
                got = _read_study(_trial_path(out_dir, opt_id, problem.id, trial), T)
                if got is None:
                    raise DataError(
                        f"incomplete study {opt_id}/{problem.id}/trial_{trial} in {out_dir}"
                    )
                F[p_idx, :, trial], cut[p_idx, :, trial] = got[0], got[1]
        tensors[opt_id] = EvalTensor(opt_id, list(suite.ids), F, cut)
    return ExperimentResults(out_dir, manifest, suite, calibrations, tensors)


# --- leaderboard -------------------------------------------------------------------


@dataclass(frozen=True)
class LeaderboardRow:
    rank: int | None  # None marks the unranked RS anchor row
    team: str
    score: float
    median: float | None
    rs_iters: float | None
    rs_efficiency: float | None
    rs_saturated: bool = False

    def iters_label(self) -> str:
        if self.rs_iters is None:
            return ""
        return f">{self.rs_iters:.0f}" if self.rs_saturated else f"{self.rs_iters:.0f}"


def leaderboard_rows(results: ExperimentResults) -> tuple[list, RSCurve | None]:
    """Ranked rows plus the random-search curve used for equivalences.

    When random search was not among the run strategies, an unranked
    anchor row is appended with the curve's score at the evaluation
    budget and efficiency exactly 1.
    """
    cals = results.resolved_calibrations()
    curve = results.rs_curve()
    budget = results.manifest.batches * results.manifest.batch_size
    scored = []
    for opt_id, tensor in results.tensors.items():
        scored.append(
            (opt_id, leaderboard_score(tensor.F, cals), median_score(tensor.F, cals))
        )
    scored.sort(key=lambda row: (-row[1], row[0]))
    rows = []
    for rank, (opt_id, score, med) in enumerate(scored, start=1):
        if curve is None:
            rows.append(LeaderboardRow(rank, opt_id, score, med, None, None))
        else:
            eq = rs_equivalence(score, curve, budget)
            rows.append(
                LeaderboardRow(rank, opt_id, score, med, eq.iters, eq.efficiency, eq.saturated)
            )
    if curve is not None and "random-search" not in results.tensors:
        idx = int(np.searchsorted(curve.m_grid, budget))
        idx = min(idx, len(curve.m_grid) - 1)
        rows.append(
            LeaderboardRow(None, "random-search", float(curve.scores[idx]), None, float(budget), 1.0)
        )
    return rows, curve


def per_problem_scores(results: ExperimentResults) -> dict:
    cals = results.resolved_calibrations()
    return {
        opt_id: per_problem_final_scores(tensor.F, cals)
        for opt_id, tensor in results.tensors.items()
    }


def run_analysis(results: ExperimentResults, cfg: BootstrapConfig) -> dict:
    """Bootstrap score intervals, ranking frequencies, 90% confidence set."""
    cals = results.resolved_calibrations()
    finals = {
        opt_id: final_clipped_by_trial(tensor.F, cals)
        for opt_id, tensor in results.tensors.items()
    }
    scores = bootstrap_scores(finals, cals, cfg)
    distribution = rank_confidence(scores)
    report = {
        "replications": cfg.replications,
        "seed": cfg.seed,
        "trials": results.manifest.trials,
        "teams": {
            team: {
                "p2.5": float(np.percentile(s, 2.5)),
                "p50": float(np.percentile(s, 50)),
                "p97.5": float(np.percentile(s, 97.5)),
            }
            for team, s in scores.items()
        },
        "rankings": [
            {"order": list(r), "frequency": f} for r, f in distribution.rankings[:10]
        ],
        "confidence_set": {
            "level": 0.9,
            "rankings": [
                {"order": list(r), "frequency": f}
                for r, f in distribution.confidence_set(0.9)
            ],
        },
        "warnings": ["single trial: bootstrap distributions are degenerate"]
        if results.manifest.trials == 1
        else [],
    }
    return report, scores

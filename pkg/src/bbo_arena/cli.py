"""Command-line entry point.

Subcommands: ``run``, ``leaderboard``, ``analyze``, ``warmstart-rerun``,
``calibrate``.  Exit codes: 0 success, 2 configuration or usage error,
3 runtime data error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .analysis import BootstrapConfig
from .errors import ConfigError, DataError
from .experiment import (
    ExperimentManifest,
    calibration_cache_dir,
    leaderboard_rows,
    load_experiment,
    per_problem_scores,
    resolve_suite,
    run_analysis,
    run_calibrations,
    run_experiment,
)
from .reports import (
    plot_bootstrap_scores,
    plot_leaderboard_vs_rs,
    plot_problem_profiles,
    write_analysis_json,
    write_leaderboard_csv,
    write_leaderboard_json,
    write_rs_curve_csv,
    write_scores_csv,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3


def _add_run_flags(parser, with_suite=True):
    if with_suite:
        parser.add_argument("--suite", help="'reference', a suite JSON path, or omitted to use the manifest")
    parser.add_argument("--optimizers", help="comma-separated strategy ids")
    parser.add_argument("--trials", type=int, help="repeated trials per problem (N)")
    parser.add_argument("--batches", type=int, help="batches per study (T)")
    parser.add_argument("--batch-size", type=int, help="suggestions per batch (k)")
    parser.add_argument("--seed", type=int, help="base seed")
    parser.add_argument("--anonymize", action="store_true", default=None,
                        help="hand optimizers anonymized parameter names (P1, P2, ...)")
    parser.add_argument("--workers", type=int, help="parallel study workers")
    parser.add_argument("--out", help="results directory")
    parser.add_argument("--calibration-samples", type=int, dest="calibration_samples")


def _manifest_from_args(args) -> ExperimentManifest:
    base = {}
    if getattr(args, "manifest", None):
        path = Path(args.manifest)
        if not path.exists():
            raise ConfigError(f"manifest file not found: {path}")
        base = json.loads(path.read_text())
    manifest = ExperimentManifest.from_dict(base) if base else ExperimentManifest()
    overrides = {
        "suite": getattr(args, "suite", None),
        "trials": args.trials,
        "batches": args.batches,
        "batch_size": args.batch_size,
        "seed": args.seed,
        "anonymize": args.anonymize,
        "workers": args.workers,
        "out": args.out,
        "calibration_samples": args.calibration_samples,
    }
    if args.optimizers:
        overrides["optimizers"] = [s.strip() for s in args.optimizers.split(",") if s.strip()]
    for key, value in overrides.items():
        if value is not None:
            setattr(manifest, key, value)
    return manifest


def _emit_leaderboard(results, out_dir: Path) -> int:
    rows, curve = leaderboard_rows(results)
    if curve is None:
        print(
            "warning: random-search pools unavailable (calibration cache missing); "
            "rs_iters and rs_efficiency columns omitted",
            file=sys.stderr,
        )
    per_problem = per_problem_scores(results)
    write_leaderboard_csv(rows, out_dir / "leaderboard.csv")
    write_leaderboard_json(rows, out_dir / "leaderboard.json")
    write_scores_csv(rows, results.suite.ids, per_problem, out_dir / "scores.csv")
    if curve is not None:
        write_rs_curve_csv(curve, out_dir / "rs_curve.csv")
        budget = results.manifest.batches * results.manifest.batch_size
        plot_leaderboard_vs_rs(curve, rows, budget, out_dir / "figures" / "leaderboard_vs_rs.png")
    plot_problem_profiles(per_problem, out_dir / "figures" / "problem_profiles.png")
    header = f"{'rank':>4}  {'team':<32} {'score':>8} {'median':>8} {'rs_iters':>9} {'rs_eff':>8}"
    print(header)
    print("-" * len(header))
    for row in rows:
        rank = "-" if row.rank is None else str(row.rank)
        med = "" if row.median is None else f"{row.median:8.3f}"
        eff = "" if row.rs_efficiency is None else f"{row.rs_efficiency:8.3f}"
        print(f"{rank:>4}  {row.team:<32} {row.score:8.3f} {med:>8} {row.iters_label():>9} {eff:>8}")
    return EXIT_OK


def cmd_run(args) -> int:
    manifest = _manifest_from_args(args)
    results = run_experiment(manifest, fresh=args.fresh)
    n_studies = len(results.tensors) * len(results.suite.problems) * manifest.trials
    print(f"completed {n_studies} studies into {results.out_dir}")
    return EXIT_OK


def cmd_leaderboard(args) -> int:
    results = load_experiment(args.results_dir)
    return _emit_leaderboard(results, Path(args.results_dir))


def cmd_analyze(args) -> int:
    results = load_experiment(args.results_dir)
    cfg = BootstrapConfig(replications=args.bootstrap_B, seed=args.bootstrap_seed)
    report, scores = run_analysis(results, cfg)
    out_dir = Path(args.results_dir)
    write_analysis_json(report, out_dir / "analysis.json")
    plot_bootstrap_scores(scores, out_dir / "figures" / "bootstrap_scores.png")
    for warning in report["warnings"]:
        print(f"warning: {warning}", file=sys.stderr)
    print(f"bootstrap over B={cfg.replications} replications:")
    for entry in report["confidence_set"]["rankings"]:
        print(f"  {entry['frequency']:7.2%}  {' > '.join(entry['order'])}")
    print(f"report written to {out_dir / 'analysis.json'}")
    return EXIT_OK


def cmd_warmstart_rerun(args) -> int:
    prior_dir = Path(args.results_dir)
    prior = load_experiment(prior_dir)  # validates the prior run exists and is complete
    manifest = ExperimentManifest.from_dict(prior.manifest.to_dict())
    manifest.warm_start_from = str(prior_dir)
    manifest.anonymize = False  # the rerun exposes real parameter names
    manifest.out = args.out or str(prior_dir) + "-warm"
    for key in ("trials", "batches", "batch_size", "seed", "workers"):
        value = getattr(args, key, None)
        if value is not None:
            setattr(manifest, key, value)
    if args.optimizers:
        manifest.optimizers = [s.strip() for s in args.optimizers.split(",") if s.strip()]
    results = run_experiment(manifest, fresh=args.fresh)
    print(f"warm-start rerun written to {results.out_dir}")
    return _emit_leaderboard(results, results.out_dir)


def cmd_calibrate(args) -> int:
    suite, _ = resolve_suite(args.suite)
    out_dir = Path(args.out or "results")
    out_dir.mkdir(parents=True, exist_ok=True)
    cache = calibration_cache_dir(out_dir)
    cals = run_calibrations(suite, args.seed or 0, args.calibration_samples or 10_000,
                            cache, args.workers or 1)
    for cal in cals:
        print(
            f"{cal.problem_id}: clip={cal.clip:.6g} opt={cal.opt:.6g} "
            f"crash_rate={cal.crash_rate:.3f} (n={cal.n_samples})"
        )
    print(f"cached under {cache}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bbo-arena",
        description="Benchmark harness for batch black-box hyperparameter optimizers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="calibrate and execute a suite of studies")
    p_run.add_argument("--manifest", help="experiment manifest JSON; flags override its fields")
    _add_run_flags(p_run)
    p_run.add_argument("--fresh", action="store_true", help="ignore prior partial results")
    p_run.set_defaults(func=cmd_run)

    p_lb = sub.add_parser("leaderboard", help="score a finished run and write tables and figures")
    p_lb.add_argument("results_dir")
    p_lb.set_defaults(func=cmd_leaderboard)

    p_an = sub.add_parser("analyze", help="bootstrap ranking confidence for a finished run")
    p_an.add_argument("results_dir")
    p_an.add_argument("--bootstrap-B", type=int, default=10_000, dest="bootstrap_B")
    p_an.add_argument("--bootstrap-seed", type=int, default=0, dest="bootstrap_seed")
    p_an.set_defaults(func=cmd_analyze)

    p_ws = sub.add_parser(
        "warmstart-rerun",
        help="rerun a prior experiment with visible names and harvested archives",
    )
    p_ws.add_argument("results_dir", help="prior results directory to harvest from")
    p_ws.add_argument("--out", help="output directory (default: <prior>-warm)")
    p_ws.add_argument("--optimizers")
    p_ws.add_argument("--trials", type=int)
    p_ws.add_argument("--batches", type=int)
    p_ws.add_argument("--batch-size", type=int)
    p_ws.add_argument("--seed", type=int)
    p_ws.add_argument("--workers", type=int)
    p_ws.add_argument("--fresh", action="store_true")
    p_ws.set_defaults(func=cmd_warmstart_rerun)

    p_cal = sub.add_parser("calibrate", help="populate the calibration cache for a suite")
    p_cal.add_argument("--suite", required=True)
    p_cal.add_argument("--seed", type=int)
    p_cal.add_argument("--calibration-samples", type=int, dest="calibration_samples")
    p_cal.add_argument("--workers", type=int)
    p_cal.add_argument("--out")
    p_cal.set_defaults(func=cmd_calibrate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

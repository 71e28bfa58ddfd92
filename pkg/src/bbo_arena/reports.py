"""Delimited outputs and the figures rendered alongside them."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

LEADERBOARD_COLUMNS = ["rank", "team", "score", "median", "rs_iters", "rs_efficiency"]


def write_leaderboard_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(LEADERBOARD_COLUMNS)
        for row in rows:
            writer.writerow(
                [
                    "" if row.rank is None else row.rank,
                    row.team,
                    f"{row.score:.3f}",
                    "" if row.median is None else f"{row.median:.3f}",
                    row.iters_label(),
                    "" if row.rs_efficiency is None else f"{row.rs_efficiency:.3f}",
                ]
            )


def write_leaderboard_json(rows, path) -> None:
    payload = [
        {
            "rank": row.rank,
            "team": row.team,
            "score": row.score,
            "median": row.median,
            "rs_iters": row.rs_iters,
            "rs_efficiency": row.rs_efficiency,
            "rs_saturated": row.rs_saturated,
        }
        for row in rows
    ]
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_scores_csv(rows, problem_ids, per_problem, path) -> None:
    """One line per optimizer: score, median, then per-problem norm perf."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["optimizer", "score", "median"] + [f"norm:{p}" for p in problem_ids])
        for row in rows:
            if row.rank is None:
                continue
            norms = per_problem.get(row.team)
            cells = ["" if np.isnan(v) else f"{(100.0 - v) / 100.0:.6f}" for v in norms]
            writer.writerow([row.team, f"{row.score:.3f}", f"{row.median:.3f}"] + cells)


def write_rs_curve_csv(curve, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["m", "expected_score"])
        for m, score in curve.to_rows():
            writer.writerow([m, f"{score:.6f}"])


def write_analysis_json(report, path) -> None:
    Path(path).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")


# --- figures -------------------------------------------------------------------


def _new_axes(width=7.0, height=4.4):
    fig, ax = plt.subplots(figsize=(width, height))
    ax.grid(alpha=0.3)
    return fig, ax


def _save(fig, path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def plot_leaderboard_vs_rs(curve, rows, budget, path) -> None:
    """Score-versus-evaluations curve with each strategy's equivalence point."""
    fig, ax = _new_axes()
    ax.plot(curve.m_grid, curve.scores, color="0.3", label="random search (pooled)")
    ax.axvline(budget, color="0.6", linestyle=":", label=f"budget = {budget}")
    colors = plt.cm.tab10.colors
    for i, row in enumerate(rows):
        if row.rank is None or row.rs_iters is None:
            continue
        marker = "x" if row.rs_saturated else "o"
        ax.scatter([row.rs_iters], [row.score], color=colors[i % 10], marker=marker, zorder=3)
        ax.axhline(row.score, color=colors[i % 10], alpha=0.35, linewidth=0.8)
        ax.annotate(row.team, (row.rs_iters, row.score), textcoords="offset points",
                    xytext=(4, 4), fontsize=8, color=colors[i % 10])
    ax.set_xscale("log")
    ax.set_xlabel("random-search evaluations (log scale)")
    ax.set_ylabel("leaderboard score")
    ax.legend(loc="lower right", fontsize=8)
    _save(fig, path)


def plot_bootstrap_scores(scores_by_team, path) -> None:
    """Bootstrap score distributions, best median first."""
    teams = sorted(scores_by_team, key=lambda t: -np.median(scores_by_team[t]))
    fig, ax = _new_axes()
    ax.boxplot(
        [scores_by_team[t] for t in teams],
        tick_labels=teams,
        whis=(2.5, 97.5),
        showfliers=False,
    )
    ax.set_ylabel("bootstrap score")
    ax.tick_params(axis="x", rotation=20)
    _save(fig, path)


def plot_problem_profiles(per_problem, path) -> None:
    """Distribution of per-problem scores for each strategy."""
    teams = list(per_problem)
    fig, ax = _new_axes()
    data = [np.asarray(per_problem[t])[~np.isnan(per_problem[t])] for t in teams]
    ax.boxplot(data, tick_labels=teams, showfliers=True)
    ax.set_ylabel("per-problem score")
    ax.tick_params(axis="x", rotation=20)
    _save(fig, path)

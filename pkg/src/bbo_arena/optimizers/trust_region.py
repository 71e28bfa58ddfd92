"""Local surrogate optimization in an adaptive trust region.

A box around the incumbent shrinks on failed batches and expands on
streaks of improving ones.  Candidates are perturbations of the
incumbent inside the box; a GP fit to the archive points near the box
scores them, and each suggestion takes the best point of one joint
posterior sample (batch Thompson sampling).  Discrete dims keep a side
floor of one encoded step so that at least one alternative value stays
reachable no matter how often the region shrinks.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from ..errors import SurrogateFitError
from ..gp import GaussianProcess
from ..space import SearchSpace, snap_unit_points
from .base import Optimizer

log = logging.getLogger(__name__)

INITIAL_SIDE = 0.8
SIDE_MIN = 2.0**-7
SIDE_MAX = 1.6
SUCCESS_TOL = 3
N_CANDIDATES = 256


@dataclass(frozen=True)
class TrustRegionState:
    center: np.ndarray
    side_lengths: np.ndarray
    floors: np.ndarray
    success_count: int = 0
    failure_count: int = 0
    success_tol: int = SUCCESS_TOL
    failure_tol: int = 1
    side_min: float = SIDE_MIN
    side_max: float = SIDE_MAX


def initial_state(space: SearchSpace) -> TrustRegionState:
    dim = space.encoded_dim
    floors = space.encoded_steps()
    sides = np.clip(np.full(dim, INITIAL_SIDE), np.maximum(SIDE_MIN, floors), SIDE_MAX)
    return TrustRegionState(
        center=np.full(dim, 0.5),
        side_lengths=sides,
        floors=floors,
        failure_tol=max(1, dim),
    )


def tr_update(state: TrustRegionState, batch_best_improved: bool) -> TrustRegionState:
    """Expand after ``success_tol`` improving batches, halve after
    ``failure_tol`` failures; sides stay within caps and per-dim floors."""
    if batch_best_improved:
        succ, fail = state.success_count + 1, 0
    else:
        succ, fail = 0, state.failure_count + 1
    sides = state.side_lengths
    if succ >= state.success_tol:
        sides = sides * 2.0
        succ = 0
    elif fail >= state.failure_tol:
        sides = sides * 0.5
        fail = 0
    sides = np.clip(sides, np.maximum(state.side_min, state.floors), state.side_max)
    return replace(state, side_lengths=sides, success_count=succ, failure_count=fail)


class TrustRegionOptimizer(Optimizer):
    supports_warm_start = True

    def __init__(self, space, seed, warm_start=None):
        super().__init__(space, seed, warm_start)
        self.state = initial_state(space)
        self._best_seen = math.inf

    # -- suggest ------------------------------------------------------------

    def _suggest(self, n):
        if not self.archive.finite():
            return self._space_filling(n)
        incumbent = self.archive.best(1)[0]
        center = self.space.encode(incumbent.params)
        self.state = replace(self.state, center=center)
        candidates = self._candidates(center, n)
        try:
            gp = self._fit_local_gp(center)
            draws = gp.sample_joint(candidates, n, self.rng)
        except SurrogateFitError:
            log.warning("trust-region surrogate fit failed; sampling region uniformly")
            return [self.space.decode(c) for c in candidates[:n]]
        picked = []
        for row in draws:
            order = np.argsort(row, kind="stable")
            idx = next((i for i in order if i not in picked), int(order[0]))
            picked.append(int(idx))
        return [self.space.decode(candidates[i]) for i in picked]

    def _candidates(self, center, n):
        dim = self.space.encoded_dim
        m = max(N_CANDIDATES, 2 * n)
        half = self.state.side_lengths / 2.0
        lb = np.clip(center - half, 0.0, 1.0)
        ub = np.clip(center + half, 0.0, 1.0)
        pts = lb + self.rng.random((m, dim)) * (ub - lb)
        # perturb only a subset of dims per candidate, TuRBO style
        p_perturb = min(1.0, 20.0 / dim)
        mask = self.rng.random((m, dim)) <= p_perturb
        rows_without = ~mask.any(axis=1)
        mask[rows_without, self.rng.integers(dim, size=int(rows_without.sum()))] = True
        pts = np.where(mask, pts, center)
        # snap to representable points so decode(encode(.)) is exact
        return snap_unit_points(self.space, pts)

    def _fit_local_gp(self, center) -> GaussianProcess:
        X, y = self.archive.encoded(self.space)
        half = self.state.side_lengths  # enlarged region: twice the box
        lb = np.clip(center - half, 0.0, 1.0)
        ub = np.clip(center + half, 0.0, 1.0)
        inside = np.all((X >= lb - 1e-12) & (X <= ub + 1e-12), axis=1)
        if inside.sum() >= max(4, self.space.encoded_dim + 1):
            X, y = X[inside], y[inside]
        if len(X) > 512:
            keep = np.argsort(y, kind="stable")[:512]
            X, y = X[keep], y[keep]
        return GaussianProcess().fit(X, y, self.rng)

    # -- observe ------------------------------------------------------------

    def _observe(self, suggestions, losses):
        finite = [l for l in losses if math.isfinite(l)]
        improved = bool(finite) and min(finite) < self._best_seen
        if improved:
            self._best_seen = min(finite)
        self.state = tr_update(self.state, improved)

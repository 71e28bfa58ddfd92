"""Global GP regression with expected-improvement acquisition.

EI is maximized over a seeded candidate pool (2048 per encoded dim,
capped at 1e5) rather than by gradient ascent, which handles one-hot and
rounded dims uniformly.  Batches use the constant-liar rule: each picked
point is imputed at the incumbent value before choosing the next.
"""

from __future__ import annotations

import logging
import math

import numpy as np

from ..errors import SurrogateFitError
from ..gp import ConstantLiarPosterior, GaussianProcess, expected_improvement
from ..space import snap_unit_points
from .base import Optimizer

log = logging.getLogger(__name__)

POOL_PER_DIM = 2048
POOL_CAP = 100_000
MAX_TRAIN = 512


class GpEiOptimizer(Optimizer):
    supports_warm_start = True

    def _suggest(self, n):
        if len(self.archive.finite()) < 2:
            return self._space_filling(n)
        X, y = self.archive.encoded(self.space)
        if len(X) > MAX_TRAIN:
            keep = np.argsort(y, kind="stable")[:MAX_TRAIN]
            X, y = X[keep], y[keep]
        incumbent = float(np.min(y))
        try:
            gp = GaussianProcess().fit(X, y, self.rng)
        except SurrogateFitError:
            log.warning("GP fit failed; falling back to random suggestions")
            return self._random_suggestions(n)
        pool = self._candidate_pool()
        posterior = ConstantLiarPosterior(gp, pool)
        picked: list[int] = []
        suggestions = []
        for _ in range(n):
            mu, sd = posterior.mean_sd()
            ei = expected_improvement(mu, sd, incumbent)
            if picked:
                ei[picked] = -1.0
            idx = int(np.argmax(ei))
            picked.append(idx)
            suggestions.append(self.space.decode(pool[idx]))
            try:
                posterior.add_fantasy(pool[idx], incumbent)
            except SurrogateFitError:
                log.warning("constant-liar update failed; keeping previous posterior")
        return suggestions

    def _candidate_pool(self) -> np.ndarray:
        size = min(POOL_PER_DIM * self.space.encoded_dim, POOL_CAP)
        u = self.rng.random((size, self.space.encoded_dim))
        return snap_unit_points(self.space, u)

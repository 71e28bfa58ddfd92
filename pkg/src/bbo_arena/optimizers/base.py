"""Suggest-observe optimizer contract and the observation archive.

Optimizers are open loop: ``suggest(n)`` returns ``n`` valid suggestions
and ``observe`` reports losses for previously suggested (or any other)
points.  Nothing forces an evaluation to happen between the two calls.
Crashed evaluations arrive as ``math.inf`` losses and must never crash
an optimizer.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from ..space import SearchSpace, Suggestion

WARM_START_QUEUE = 8  # prior points replayed as the first batch


@dataclass(frozen=True)
class Observation:
    params: dict
    loss: float  # math.inf marks a crash
    origin: str = "run"  # "run" | "warm-start"


class ObservationArchive:
    """Append-only record of (suggestion, loss) pairs with provenance."""

    def __init__(self, signature=None):
        self.signature = signature
        self._obs: list[Observation] = []

    def __len__(self) -> int:
        return len(self._obs)

    def __iter__(self):
        return iter(self._obs)

    def add(self, params: Suggestion, loss: float, origin: str = "run") -> None:
        loss = float(loss)
        if math.isnan(loss):
            loss = math.inf
        self._obs.append(Observation(dict(params), loss, origin))

    def finite(self) -> list[Observation]:
        return [o for o in self._obs if math.isfinite(o.loss)]

    def best(self, k: int = 1) -> list[Observation]:
        return sorted(self.finite(), key=lambda o: o.loss)[:k]

    def best_loss(self) -> float:
        finite = self.finite()
        return min(o.loss for o in finite) if finite else math.inf

    def worst_finite_loss(self) -> float:
        finite = self.finite()
        return max(o.loss for o in finite) if finite else math.inf

    def encoded(self, space: SearchSpace, impute_crashes: bool = True):
        """Training arrays (X, y); crashes imputed above the worst loss.

        Crash rows are imputed at ``worst + 0.1 * |worst|`` where
        ``worst`` is the worst finite loss seen; with no finite loss yet,
        crash rows are dropped.
        """
        X, y = [], []
        worst = self.worst_finite_loss()
        for o in self._obs:
            loss = o.loss
            if not math.isfinite(loss):
                if not impute_crashes or not math.isfinite(worst):
                    continue
                loss = worst + 0.1 * abs(worst)
            X.append(space.encode(o.params))
            y.append(loss)
        if not X:
            return np.zeros((0, space.encoded_dim)), np.zeros(0)
        return np.asarray(X), np.asarray(y)


def latin_hypercube(rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
    """n stratified points in the unit cube, one stratum per row per dim."""
    strata = np.tile(np.arange(n, dtype=float), (dim, 1))
    strata = rng.permuted(strata, axis=1).T
    return (strata + rng.random((n, dim))) / n


class Optimizer:
    """Base class: owns the space, a seeded rng, and the archive."""

    supports_warm_start = False

    def __init__(self, space: SearchSpace, seed: int, warm_start: ObservationArchive | None = None):
        self.space = space
        self.seed = int(seed)
        self.rng = np.random.default_rng(self.seed)
        self.archive = ObservationArchive(signature=space.signature())
        self._queue: list[Suggestion] = []
        if warm_start is not None and self.supports_warm_start:
            self.ingest_warm_start(warm_start)

    # -- warm starting ----------------------------------------------------

    def ingest_warm_start(self, prior: ObservationArchive) -> None:
        """Queue the prior's best points and absorb the rest.

        The prior must match this space's signature (names, kinds, warps,
        ranges); otherwise it is ignored with a warning.
        """
        if prior.signature is not None and prior.signature != self.space.signature():
            warnings.warn("warm-start archive ignored: search-space signature mismatch")
            return
        entries = list(prior)
        for o in entries:
            try:
                self.space.validate(o.params)
            except ValueError:
                warnings.warn("warm-start archive ignored: entries invalid for this space")
                return
        ranked = sorted(
            (o for o in entries if math.isfinite(o.loss)), key=lambda o: o.loss
        )
        queued = ranked[:WARM_START_QUEUE]
        self._queue.extend(dict(o.params) for o in queued)
        queued_ids = {id(o) for o in queued}
        for o in entries:
            if id(o) not in queued_ids:
                self.archive.add(o.params, o.loss, origin="warm-start")

    # -- protocol ----------------------------------------------------------

    def suggest(self, n_suggestions: int) -> list[Suggestion]:
        if n_suggestions < 1:
            raise ConfigError("n_suggestions must be >= 1")
        out = []
        while self._queue and len(out) < n_suggestions:
            out.append(self._queue.pop(0))
        if len(out) < n_suggestions:
            out.extend(self._suggest(n_suggestions - len(out)))
        return out

    def observe(self, suggestions: list[Suggestion], losses: list[float]) -> None:
        if len(suggestions) != len(losses):
            raise ConfigError("suggestions and losses must have equal length")
        for s, loss in zip(suggestions, losses):
            self.archive.add(s, loss)
        self._observe(suggestions, losses)

    # -- hooks ---------------------------------------------------------------

    def _suggest(self, n: int) -> list[Suggestion]:
        raise NotImplementedError

    def _observe(self, suggestions, losses) -> None:
        pass

    def _space_filling(self, n: int) -> list[Suggestion]:
        cube = latin_hypercube(self.rng, n, self.space.encoded_dim)
        return [self.space.decode(row) for row in cube]

    def _random_suggestions(self, n: int) -> list[Suggestion]:
        return [self.space.sample(self.rng) for _ in range(n)]

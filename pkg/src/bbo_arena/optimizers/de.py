"""Differential evolution (rand/1/bin) in the warped unit cube.

The population is seeded lazily from the best archive points (padded
with random draws), so a phase-switch ensemble that starts this
optimizer late inherits the incumbent region found so far.  Selection
happens on observe: a child replaces its target slot when its loss is
no worse; crashed children carry an infinite loss and lose every
comparison against a finite parent.
"""

from __future__ import annotations

import math

import numpy as np

from ..space import Suggestion, snap_unit_points
from .base import Optimizer

POPULATION = 24
F_SCALE = 0.8
CROSSOVER = 0.9


def _key(space, s: Suggestion) -> tuple:
    return tuple(s[name] for name in space.names)


class DifferentialEvolutionOptimizer(Optimizer):
    supports_warm_start = True

    def __init__(self, space, seed, warm_start=None):
        super().__init__(space, seed, warm_start)
        self._pop_x: np.ndarray | None = None
        self._pop_loss: np.ndarray | None = None
        self._cursor = 0
        self._pending: dict[tuple, list[int]] = {}

    def _init_population(self):
        dim = self.space.encoded_dim
        best = self.archive.best(POPULATION)
        xs = [self.space.encode(o.params) for o in best]
        losses = [o.loss for o in best]
        while len(xs) < POPULATION:
            s = self.space.sample(self.rng)
            xs.append(self.space.encode(s))
            losses.append(math.inf)
        self._pop_x = np.asarray(xs[:POPULATION]).reshape(POPULATION, dim)
        self._pop_loss = np.asarray(losses[:POPULATION])

    def _suggest(self, n):
        if self._pop_x is None:
            self._init_population()
        dim = self.space.encoded_dim
        out = []
        for _ in range(n):
            target = self._cursor % POPULATION
            self._cursor += 1
            r = [target]
            while len(r) < 4:
                j = int(self.rng.integers(POPULATION))
                if j not in r:
                    r.append(j)
            _, r1, r2, r3 = r
            mutant = self._pop_x[r1] + F_SCALE * (self._pop_x[r2] - self._pop_x[r3])
            mutant = np.clip(mutant, 0.0, 1.0)
            cross = self.rng.random(dim) <= CROSSOVER
            cross[int(self.rng.integers(dim))] = True
            child = np.where(cross, mutant, self._pop_x[target])
            child = snap_unit_points(self.space, child[None, :])[0]
            suggestion = self.space.decode(child)
            self._pending.setdefault(_key(self.space, suggestion), []).append(target)
            out.append(suggestion)
        return out

    def _observe(self, suggestions, losses):
        if self._pop_x is None:
            return
        for s, loss in zip(suggestions, losses):
            targets = self._pending.get(_key(self.space, s))
            if not targets:
                continue
            target = targets.pop(0)
            if not targets:
                self._pending.pop(_key(self.space, s), None)
            if loss <= self._pop_loss[target]:
                self._pop_x[target] = self.space.encode(s)
                self._pop_loss[target] = loss

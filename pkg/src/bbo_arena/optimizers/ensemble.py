"""Optimizer combinators: slot-split portfolios and phase switching.

Both broadcast every observation to every member, so each member sees
the full evaluation history regardless of who suggested what.
"""

from __future__ import annotations

from ..errors import ConfigError
from ..seeding import stable_seed
from .base import Optimizer


def allocate_slots(weights, n: int) -> list[int]:
    """Largest-remainder apportionment of n slots; ties favor earlier members."""
    if not weights or any(w < 0 for w in weights):
        raise ConfigError(f"weights must be nonempty and nonnegative, got {weights}")
    total = float(sum(weights))
    if total <= 0:
        raise ConfigError("at least one weight must be positive")
    quotas = [n * w / total for w in weights]
    slots = [int(q) for q in quotas]
    remainders = sorted(
        range(len(weights)), key=lambda i: (-(quotas[i] - slots[i]), i)
    )
    for i in remainders[: n - sum(slots)]:
        slots[i] += 1
    return slots


class SlotSplitEnsemble(Optimizer):
    """Splits each batch across members in proportion to their weights.

    A single-member ensemble is bit-identical to the bare member under
    the same seed: the member receives the ensemble's seed unchanged.
    """

    supports_warm_start = True

    def __init__(self, space, seed, member_factories, weights=None, warm_start=None):
        if not member_factories:
            raise ConfigError("slot-split ensemble needs at least one member")
        weights = list(weights) if weights is not None else [1.0] * len(member_factories)
        if len(weights) != len(member_factories):
            raise ConfigError(
                f"{len(member_factories)} members but {len(weights)} weights"
            )
        if any(w < 0 for w in weights) or sum(weights) <= 0:
            raise ConfigError(f"weights must be nonnegative with a positive sum: {weights}")
        self.weights = weights
        super().__init__(space, seed, warm_start=None)
        if len(member_factories) == 1:
            seeds = [seed]
        else:
            seeds = [stable_seed(seed, "member", i) for i in range(len(member_factories))]
        self.members = [
            factory(space, s, warm_start) for factory, s in zip(member_factories, seeds)
        ]

    def _suggest(self, n):
        out = []
        for member, slots in zip(self.members, allocate_slots(self.weights, n)):
            if slots > 0:
                out.extend(member.suggest(slots))
        return out

    def _observe(self, suggestions, losses):
        for member in self.members:
            member.observe(suggestions, losses)


class PhaseSwitchEnsemble(Optimizer):
    """Runs one strategy up to a switch batch, another from then on.

    The second member keeps receiving observations from batch one, so
    when it takes over, its own initialization (e.g. a DE population
    built from the archive's best points) reflects the search so far.
    """

    supports_warm_start = True

    def __init__(self, space, seed, first_factory, second_factory, switch_batch, warm_start=None):
        if switch_batch < 1:
            raise ConfigError(f"switch_batch must be >= 1, got {switch_batch}")
        super().__init__(space, seed, warm_start=None)
        self.switch_batch = int(switch_batch)
        self.first = first_factory(space, stable_seed(seed, "first"), warm_start)
        self.second = second_factory(space, stable_seed(seed, "second"), warm_start)
        self._batch = 0

    def _suggest(self, n):
        self._batch += 1
        member = self.first if self._batch < self.switch_batch else self.second
        return member.suggest(n)

    def _observe(self, suggestions, losses):
        self.first.observe(suggestions, losses)
        self.second.observe(suggestions, losses)

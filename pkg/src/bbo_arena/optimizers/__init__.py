"""Optimizer registry.

Strategies are referenced by string id or by a JSON-style config dict.
String forms::

    random-search | turbo-lite | gp-ei | de
    ensemble:turbo-lite+gp-ei          (slot split, equal weights)
    switch:gp-ei>de@12                 (phase switch at batch 12)

Dict form::

    {"id": "nvidia-style", "type": "slot-split",
     "members": ["turbo-lite", "gp-ei"], "weights": [1, 1]}
    {"id": "automl-style", "type": "phase-switch",
     "first": "gp-ei", "second": "de", "switch_batch": 12}
"""

from __future__ import annotations

import re

from ..errors import ConfigError
from ..space import SearchSpace
from .base import ObservationArchive, Observation, Optimizer, latin_hypercube
from .de import DifferentialEvolutionOptimizer
from .ensemble import PhaseSwitchEnsemble, SlotSplitEnsemble, allocate_slots
from .gp_ei import GpEiOptimizer
from .random_search import RandomSearchOptimizer
from .trust_region import TrustRegionOptimizer, TrustRegionState, initial_state, tr_update

BASE_OPTIMIZERS = {
    "random-search": RandomSearchOptimizer,
    "turbo-lite": TrustRegionOptimizer,
    "gp-ei": GpEiOptimizer,
    "de": DifferentialEvolutionOptimizer,
}

_SWITCH_RE = re.compile(r"^switch:(?P<first>[^>]+)>(?P<second>[^@]+)@(?P<batch>\d+)$")


def available_ids() -> list:
    return sorted(BASE_OPTIMIZERS)


def strategy_id(spec) -> str:
    """Canonical label used in results directories and leaderboards."""
    if isinstance(spec, str):
        return spec
    if isinstance(spec, dict):
        if "id" in spec:
            return str(spec["id"])
        if spec.get("type") == "slot-split":
            return "ensemble:" + "+".join(strategy_id(m) for m in spec.get("members", []))
        if spec.get("type") == "phase-switch":
            return (
                f"switch:{strategy_id(spec.get('first'))}>"
                f"{strategy_id(spec.get('second'))}@{spec.get('switch_batch')}"
            )
    raise ConfigError(f"cannot derive an id from strategy spec {spec!r}")


def _factory(spec):
    """A picklable (space, seed, warm_start) -> Optimizer callable."""
    if isinstance(spec, str):
        spec = spec.strip()
        if spec in BASE_OPTIMIZERS:
            return BASE_OPTIMIZERS[spec]
        if spec.startswith("ensemble:"):
            members = [m for m in spec[len("ensemble:") :].split("+") if m]
            if not members:
                raise ConfigError(f"empty ensemble spec {spec!r}")
            return _SlotSplitFactory(tuple(members), None)
        m = _SWITCH_RE.match(spec)
        if m:
            return _PhaseSwitchFactory(m["first"], m["second"], int(m["batch"]))
        raise ConfigError(f"unknown optimizer {spec!r}; known ids: {available_ids()}")
    if isinstance(spec, dict):
        kind = spec.get("type")
        if kind == "slot-split":
            return _SlotSplitFactory(tuple(spec.get("members", ())), spec.get("weights"))
        if kind == "phase-switch":
            for key in ("first", "second", "switch_batch"):
                if key not in spec:
                    raise ConfigError(f"phase-switch config missing {key!r}: {spec}")
            return _PhaseSwitchFactory(spec["first"], spec["second"], int(spec["switch_batch"]))
        if kind in BASE_OPTIMIZERS:
            return BASE_OPTIMIZERS[kind]
        raise ConfigError(f"unknown strategy type {kind!r} in {spec}")
    raise ConfigError(f"optimizer spec must be a string or object, got {type(spec).__name__}")


class _SlotSplitFactory:
    def __init__(self, members, weights):
        if not members:
            raise ConfigError("slot-split config needs members")
        self.member_factories = tuple(_factory(m) for m in members)
        self.weights = weights

    def __call__(self, space, seed, warm_start=None):
        return SlotSplitEnsemble(space, seed, self.member_factories, self.weights, warm_start)


class _PhaseSwitchFactory:
    def __init__(self, first, second, switch_batch):
        self.first = _factory(first)
        self.second = _factory(second)
        self.switch_batch = switch_batch

    def __call__(self, space, seed, warm_start=None):
        return PhaseSwitchEnsemble(space, seed, self.first, self.second, self.switch_batch, warm_start)


def create_optimizer(spec, space: SearchSpace, seed: int, warm_start: ObservationArchive | None = None) -> Optimizer:
    """Instantiate a strategy from a string id or config dict."""
    return _factory(spec)(space, seed, warm_start)


def validate_strategy(spec) -> str:
    """Parse a strategy spec without instantiating; returns its id."""
    _factory(spec)
    return strategy_id(spec)


__all__ = [
    "BASE_OPTIMIZERS",
    "DifferentialEvolutionOptimizer",
    "GpEiOptimizer",
    "ObservationArchive",
    "Observation",
    "Optimizer",
    "PhaseSwitchEnsemble",
    "RandomSearchOptimizer",
    "SlotSplitEnsemble",
    "TrustRegionOptimizer",
    "TrustRegionState",
    "allocate_slots",
    "available_ids",
    "create_optimizer",
    "initial_state",
    "latin_hypercube",
    "strategy_id",
    "tr_update",
    "validate_strategy",
]

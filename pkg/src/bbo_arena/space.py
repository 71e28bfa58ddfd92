"""Mixed-type search spaces with warping and unit-cube encoding.

A search space is an ordered list of parameters.  Real and integer
parameters carry a warp (``linear``, ``log``, ``logit``, ``bilog``) that
maps their raw range onto ``[0, 1]``; booleans occupy one linear
dimension thresholded at ``0.5``; categoricals occupy a one-hot block.
Every suggestion (a plain ``dict`` of raw values) can therefore be
encoded as a point in ``[0, 1]^encoded_dim`` and decoded back exactly.

The JSON config dialect accepted by :func:`parse_space_config` looks like::

    {
        "C":   {"type": "real", "space": "log", "range": [1.0, 1000.0]},
        "k":   {"type": "int",  "space": "linear", "range": [1, 25]},
        "mode": {"type": "cat", "values": ["a", "b"]},
        "flag": {"type": "bool"}
    }
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Union

import numpy as np

from .errors import ConfigError, DomainError, ShapeError, SuggestionError

Value = Union[bool, int, float, str]
Suggestion = dict  # name -> raw value

KINDS = ("real", "int", "cat", "bool")
WARPS = ("linear", "log", "logit", "bilog")

_REL_TOL = 1e-9  # slack for float range checks on real params


def _logit(x: float) -> float:
    return math.log(x / (1.0 - x))


def _bilog(x: float) -> float:
    return math.copysign(math.log1p(abs(x)), x)


def _bilog_inv(g: float) -> float:
    return math.copysign(math.expm1(abs(g)), g)


@dataclass(frozen=True)
class ParamSpec:
    """One parameter of a search space.

    ``range`` applies to numeric kinds, ``values`` to categoricals; a
    bool carries neither.  ``warp`` is meaningful for numeric kinds only.
    """

    name: str
    kind: str
    warp: str = "linear"
    range: tuple | None = None
    values: tuple | None = None

    def __post_init__(self):
        if not self.name:
            raise ConfigError("parameter name must be nonempty")
        if self.kind not in KINDS:
            raise ConfigError(f"{self.name}: unknown kind {self.kind!r}")
        if self.kind in ("real", "int"):
            if self.warp not in WARPS:
                raise ConfigError(f"{self.name}: unknown warp {self.warp!r}")
            if self.range is None or len(self.range) != 2:
                raise ConfigError(f"{self.name}: numeric kind needs a (lo, hi) range")
            lo, hi = self.range
            if not (lo < hi):
                raise ConfigError(f"{self.name}: range must satisfy lo < hi, got {self.range}")
            if self.kind == "int":
                if int(lo) != lo or int(hi) != hi:
                    raise ConfigError(f"{self.name}: int range must be integral, got {self.range}")
                if hi < lo + 1:
                    raise ConfigError(f"{self.name}: int range needs hi >= lo + 1")
                object.__setattr__(self, "range", (int(lo), int(hi)))
            else:
                object.__setattr__(self, "range", (float(lo), float(hi)))
            if self.warp == "log" and lo <= 0:
                raise ConfigError(f"{self.name}: log warp requires lo > 0")
            if self.warp == "logit" and not (0 < lo < hi < 1):
                raise ConfigError(f"{self.name}: logit warp requires 0 < lo < hi < 1")
            if self.values is not None:
                raise ConfigError(f"{self.name}: numeric kind takes no values list")
        elif self.kind == "cat":
            if not self.values:
                raise ConfigError(f"{self.name}: cat kind needs a nonempty values list")
            vals = tuple(self.values)
            if len(set(vals)) != len(vals):
                raise ConfigError(f"{self.name}: duplicate category values")
            object.__setattr__(self, "values", vals)
            if self.range is not None:
                raise ConfigError(f"{self.name}: cat kind takes no range")
        else:  # bool
            if self.range is not None or self.values is not None:
                raise ConfigError(f"{self.name}: bool kind takes no range or values")

    @property
    def width(self) -> int:
        """Number of unit-cube dimensions this parameter occupies."""
        return len(self.values) if self.kind == "cat" else 1

    def contains(self, value) -> bool:
        """Whether ``value`` is a legal raw value for this parameter."""
        if self.kind == "bool":
            return isinstance(value, (bool, np.bool_))
        if self.kind == "cat":
            return value in self.values
        if isinstance(value, (bool, np.bool_)) or not isinstance(value, (int, float, np.integer, np.floating)):
            return False
        lo, hi = self.range
        if self.kind == "int":
            return float(value).is_integer() and lo <= value <= hi
        span = hi - lo
        return lo - _REL_TOL * span <= value <= hi + _REL_TOL * span


def warp_value(spec: ParamSpec, raw) -> float:
    """Map a raw numeric/bool value onto the unit interval.

    linear: ``(x - lo) / (hi - lo)``; log: the same in ln-space; logit:
    log-odds then linear rescale; bilog: ``sign(x) * ln(1 + |x|)`` then
    linear rescale.
    """
    if spec.kind == "bool":
        if not isinstance(raw, (bool, np.bool_)):
            raise DomainError(f"{spec.name}: expected a bool, got {raw!r}")
        return 1.0 if raw else 0.0
    if spec.kind == "cat":
        raise DomainError(f"{spec.name}: categorical parameters are one-hot encoded, not warped")
    if not spec.contains(raw):
        raise DomainError(f"{spec.name}: value {raw!r} outside range {spec.range}")
    lo, hi = spec.range
    x = float(min(max(raw, lo), hi))
    if spec.warp == "linear":
        u = (x - lo) / (hi - lo)
    elif spec.warp == "log":
        if x <= 0:
            raise DomainError(f"{spec.name}: log warp undefined for {x}")
        u = (math.log(x) - math.log(lo)) / (math.log(hi) - math.log(lo))
    elif spec.warp == "logit":
        u = (_logit(x) - _logit(lo)) / (_logit(hi) - _logit(lo))
    else:  # bilog
        u = (_bilog(x) - _bilog(lo)) / (_bilog(hi) - _bilog(lo))
    return min(max(u, 0.0), 1.0)


def unwarp_value(spec: ParamSpec, u: float):
    """Inverse of :func:`warp_value`.

    Integers round to the nearest value and clamp into range; bools
    threshold at 0.5.
    """
    if not (0.0 <= u <= 1.0):
        raise DomainError(f"{spec.name}: unit coordinate {u} outside [0, 1]")
    if spec.kind == "bool":
        return bool(u >= 0.5)
    if spec.kind == "cat":
        raise DomainError(f"{spec.name}: categorical parameters decode from one-hot blocks")
    lo, hi = spec.range
    if spec.warp == "linear":
        x = lo + u * (hi - lo)
    elif spec.warp == "log":
        x = math.exp(math.log(lo) + u * (math.log(hi) - math.log(lo)))
    elif spec.warp == "logit":
        g = _logit(lo) + u * (_logit(hi) - _logit(lo))
        x = 1.0 / (1.0 + math.exp(-g))
    else:  # bilog
        g = _bilog(lo) + u * (_bilog(hi) - _bilog(lo))
        x = _bilog_inv(g)
    if spec.kind == "int":
        return int(min(max(math.floor(x + 0.5), lo), hi))
    return float(min(max(x, lo), hi))


@dataclass(frozen=True)
class SearchSpace:
    """An ordered, immutable collection of :class:`ParamSpec`."""

    params: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(self.params))
        names = [p.name for p in self.params]
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate parameter names: {names}")

    @property
    def names(self) -> list:
        return [p.name for p in self.params]

    @property
    def encoded_dim(self) -> int:
        return sum(p.width for p in self.params)

    def __len__(self) -> int:
        return len(self.params)

    def __getitem__(self, name: str) -> ParamSpec:
        for p in self.params:
            if p.name == name:
                return p
        raise KeyError(name)

    def signature(self) -> tuple:
        """Structural identity: names, kinds, warps, ranges, values.

        Two spaces with equal signatures accept exactly the same
        suggestions; warm-start transfer requires signature equality.
        """
        return tuple((p.name, p.kind, p.warp, p.range, p.values) for p in self.params)

    def validate(self, suggestion: Suggestion) -> None:
        """Raise :class:`SuggestionError` naming every offending parameter."""
        offenders = []
        for p in self.params:
            if p.name not in suggestion or not p.contains(suggestion[p.name]):
                offenders.append(p.name)
        extras = set(suggestion) - set(self.names)
        offenders.extend(sorted(extras))
        if offenders:
            raise SuggestionError(
                f"invalid suggestion, offending parameters: {offenders}", offenders
            )

    def encode(self, suggestion: Suggestion) -> np.ndarray:
        """Encode a valid suggestion as a point in ``[0,1]^encoded_dim``."""
        self.validate(suggestion)
        out = np.zeros(self.encoded_dim)
        i = 0
        for p in self.params:
            if p.kind == "cat":
                out[i + p.values.index(suggestion[p.name])] = 1.0
                i += p.width
            else:
                out[i] = warp_value(p, suggestion[p.name])
                i += 1
        return out

    def decode(self, u) -> Suggestion:
        """Decode a unit-cube point; categorical blocks decode by argmax."""
        u = np.asarray(u, dtype=float)
        if u.shape != (self.encoded_dim,):
            raise ShapeError(f"expected length {self.encoded_dim}, got shape {u.shape}")
        if np.any(u < -1e-12) or np.any(u > 1.0 + 1e-12):
            raise DomainError("encoded point has entries outside [0, 1]")
        u = np.clip(u, 0.0, 1.0)
        out = {}
        i = 0
        for p in self.params:
            if p.kind == "cat":
                block = u[i : i + p.width]
                out[p.name] = p.values[int(np.argmax(block))]
                i += p.width
            else:
                out[p.name] = unwarp_value(p, float(u[i]))
                i += 1
        return out

    def encoded_steps(self) -> np.ndarray:
        """Width of one discrete step per encoded dim, in unit coordinates.

        0 for real dims; ``1/(hi - lo)`` for ints; 1 for bool and one-hot
        dims, whose values sit a full axis apart.
        """
        out = []
        for p in self.params:
            if p.kind == "int":
                out.append(1.0 / (p.range[1] - p.range[0]))
            elif p.kind == "real":
                out.append(0.0)
            else:
                out.extend([1.0] * p.width)
        return np.array(out)

    def sample(self, rng: np.random.Generator) -> Suggestion:
        """One draw, uniform in the warped space (uniform per unit dim)."""
        out = {}
        for p in self.params:
            if p.kind == "cat":
                out[p.name] = p.values[int(rng.integers(len(p.values)))]
            elif p.kind == "bool":
                out[p.name] = bool(rng.random() >= 0.5)
            else:
                out[p.name] = unwarp_value(p, float(rng.random()))
        return out


def _warp_array(spec: ParamSpec, x: np.ndarray) -> np.ndarray:
    lo, hi = spec.range
    if spec.warp == "linear":
        return (x - lo) / (hi - lo)
    if spec.warp == "log":
        return (np.log(x) - math.log(lo)) / (math.log(hi) - math.log(lo))
    if spec.warp == "logit":
        g = np.log(x / (1.0 - x))
        return (g - _logit(lo)) / (_logit(hi) - _logit(lo))
    g = np.sign(x) * np.log1p(np.abs(x))
    return (g - _bilog(lo)) / (_bilog(hi) - _bilog(lo))


def _unwarp_array(spec: ParamSpec, u: np.ndarray) -> np.ndarray:
    lo, hi = spec.range
    if spec.warp == "linear":
        return lo + u * (hi - lo)
    if spec.warp == "log":
        return np.exp(math.log(lo) + u * (math.log(hi) - math.log(lo)))
    if spec.warp == "logit":
        g = _logit(lo) + u * (_logit(hi) - _logit(lo))
        return 1.0 / (1.0 + np.exp(-g))
    g = _bilog(lo) + u * (_bilog(hi) - _bilog(lo))
    return np.sign(g) * np.expm1(np.abs(g))


def snap_unit_points(space: SearchSpace, points: np.ndarray) -> np.ndarray:
    """Vectorized ``encode(decode(u))`` over rows of unit-cube points.

    Maps arbitrary unit points onto the encoded representation of the
    suggestion they decode to: one-hot blocks collapse to their argmax,
    bools to {0, 1}, ints to their rounded grid value.
    """
    out = np.array(np.atleast_2d(points), dtype=float)
    if out.shape[1] != space.encoded_dim:
        raise ShapeError(f"expected width {space.encoded_dim}, got {out.shape[1]}")
    out = np.clip(out, 0.0, 1.0)
    i = 0
    for p in space.params:
        if p.kind == "cat":
            block = out[:, i : i + p.width]
            idx = np.argmax(block, axis=1)
            block[:] = 0.0
            block[np.arange(len(out)), idx] = 1.0
            i += p.width
        elif p.kind == "bool":
            out[:, i] = (out[:, i] >= 0.5).astype(float)
            i += 1
        elif p.kind == "int":
            lo, hi = p.range
            x = np.clip(np.floor(_unwarp_array(p, out[:, i]) + 0.5), lo, hi)
            out[:, i] = np.clip(_warp_array(p, x), 0.0, 1.0)
            i += 1
        else:
            i += 1
    return out


@dataclass(frozen=True)
class AnonymizationMap:
    """Bijection between original parameter names and P1..Pn aliases."""

    forward: dict = field(default_factory=dict)
    inverse: dict = field(default_factory=dict)

    def apply(self, suggestion: Suggestion) -> Suggestion:
        return {self.forward[k]: v for k, v in suggestion.items()}

    def invert(self, suggestion: Suggestion) -> Suggestion:
        return {self.inverse[k]: v for k, v in suggestion.items()}


def anonymize(space: SearchSpace) -> tuple[SearchSpace, AnonymizationMap]:
    """Rename parameters to P1..Pn in declaration order.

    Kinds, warps, ranges, and ordering are untouched, so the anonymized
    space accepts the same raw values under new names.
    """
    forward = {p.name: f"P{i + 1}" for i, p in enumerate(space.params)}
    inverse = {v: k for k, v in forward.items()}
    renamed = SearchSpace(tuple(replace(p, name=forward[p.name]) for p in space.params))
    return renamed, AnonymizationMap(forward, inverse)


_ALLOWED_KEYS = {"type", "space", "range", "values"}


def parse_space_config(config: dict) -> SearchSpace:
    """Build a :class:`SearchSpace` from the JSON config dialect."""
    if not isinstance(config, dict):
        raise ConfigError("space config must be an object mapping names to specs")
    specs = []
    for name, entry in config.items():
        if not isinstance(entry, dict):
            raise ConfigError(f"{name}: spec must be an object")
        unknown = set(entry) - _ALLOWED_KEYS
        if unknown:
            raise ConfigError(f"{name}: unknown keys {sorted(unknown)}")
        if "type" not in entry:
            raise ConfigError(f"{name}: missing 'type'")
        kind = entry["type"]
        kwargs: dict[str, Any] = {}
        if "space" in entry:
            if kind not in ("real", "int"):
                raise ConfigError(f"{name}: 'space' applies to numeric kinds only")
            kwargs["warp"] = entry["space"]
        if "range" in entry:
            rng = entry["range"]
            if not isinstance(rng, (list, tuple)) or len(rng) != 2:
                raise ConfigError(f"{name}: 'range' must be a 2-element array")
            kwargs["range"] = tuple(rng)
        if "values" in entry:
            if not isinstance(entry["values"], (list, tuple)):
                raise ConfigError(f"{name}: 'values' must be an array")
            kwargs["values"] = tuple(entry["values"])
        specs.append(ParamSpec(name=name, kind=kind, **kwargs))
    return SearchSpace(tuple(specs))


def space_to_config(space: SearchSpace) -> dict:
    """Inverse of :func:`parse_space_config` (for persistence)."""
    out = {}
    for p in space.params:
        entry: dict[str, Any] = {"type": p.kind}
        if p.kind in ("real", "int"):
            entry["space"] = p.warp
            entry["range"] = list(p.range)
        elif p.kind == "cat":
            entry["values"] = list(p.values)
        out[p.name] = entry
    return out

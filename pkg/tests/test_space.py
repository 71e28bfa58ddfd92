"""Search-space warping, encoding, and anonymization."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bbo_arena.errors import ConfigError, DomainError, ShapeError, SuggestionError
from bbo_arena.space import (
    AnonymizationMap,
    ParamSpec,
    SearchSpace,
    anonymize,
    parse_space_config,
    snap_unit_points,
    space_to_config,
    unwarp_value,
    warp_value,
)


def log_real(lo=1.0, hi=1e3):
    return ParamSpec("C", "real", "log", (lo, hi))


class TestParamSpecValidation:
    def test_numeric_needs_ordered_range(self):
        with pytest.raises(ConfigError):
            ParamSpec("x", "real", "linear", (2.0, 1.0))

    def test_log_needs_positive_lower(self):
        with pytest.raises(ConfigError):
            ParamSpec("x", "real", "log", (0.0, 1.0))

    def test_logit_needs_open_unit_range(self):
        with pytest.raises(ConfigError):
            ParamSpec("x", "real", "logit", (0.5, 1.0))
        ParamSpec("x", "real", "logit", (0.01, 0.99))  # fine

    def test_int_range_must_be_integral_and_wide_enough(self):
        with pytest.raises(ConfigError):
            ParamSpec("k", "int", "linear", (1.5, 3))
        with pytest.raises(ConfigError):
            ParamSpec("k", "int", "linear", (3, 3))

    def test_cat_needs_unique_values(self):
        with pytest.raises(ConfigError):
            ParamSpec("c", "cat", values=("a", "a"))
        with pytest.raises(ConfigError):
            ParamSpec("c", "cat", values=())

    def test_bool_takes_no_range(self):
        with pytest.raises(ConfigError):
            ParamSpec("b", "bool", range=(0, 1))


class TestWarp:
    def test_log_endpoints(self):
        assert warp_value(log_real(), 1.0) == 0.0
        assert warp_value(log_real(), 1e3) == 1.0

    def test_log_midpoint(self):
        # (ln x - ln 1) / (ln 1e3 - ln 1) at x = 10**1.5 is 1.5/3 = 0.5
        assert warp_value(log_real(), 10**1.5) == pytest.approx(0.5, abs=1e-12)

    def test_out_of_range_rejected(self):
        with pytest.raises(DomainError):
            warp_value(log_real(), 0.5)

    def test_bilog_spans_zero(self):
        spec = ParamSpec("x", "real", "bilog", (-10.0, 10.0))
        assert warp_value(spec, -10.0) == 0.0
        assert warp_value(spec, 0.0) == pytest.approx(0.5, abs=1e-12)
        assert warp_value(spec, 10.0) == 1.0

    def test_logit_midpoint(self):
        spec = ParamSpec("x", "real", "logit", (0.1, 0.9))
        # symmetric odds: logit(0.5) = 0 is the middle of [logit(.1), logit(.9)]
        assert warp_value(spec, 0.5) == pytest.approx(0.5, abs=1e-12)

    @pytest.mark.parametrize("warp,rng", [
        ("linear", (-3.0, 7.0)),
        ("log", (1e-4, 1e2)),
        ("logit", (0.05, 0.95)),
        ("bilog", (-50.0, 20.0)),
    ])
    def test_strictly_monotone_with_exact_endpoints(self, warp, rng):
        spec = ParamSpec("x", "real", warp, rng)
        xs = np.linspace(rng[0], rng[1], 101)
        us = [warp_value(spec, x) for x in xs]
        assert us[0] == 0.0 and us[-1] == 1.0
        assert all(b > a for a, b in zip(us, us[1:]))


class TestUnwarp:
    def test_log_lower_bound(self):
        assert unwarp_value(log_real(), 0.0) == 1.0

    def test_int_midpoint(self):
        spec = ParamSpec("n", "int", "linear", (1, 9))
        assert unwarp_value(spec, 0.5) == 5  # 1 + 0.5 * 8

    def test_bool_threshold(self):
        spec = ParamSpec("b", "bool")
        assert unwarp_value(spec, 0.49) is False
        assert unwarp_value(spec, 0.5) is True

    def test_rejects_outside_unit(self):
        with pytest.raises(DomainError):
            unwarp_value(log_real(), 1.5)

    def test_int_rounds_then_clamps(self):
        spec = ParamSpec("n", "int", "linear", (1, 9))
        assert unwarp_value(spec, 0.999999) == 9
        assert unwarp_value(spec, 1e-9) == 1


def mixed_space() -> SearchSpace:
    return SearchSpace(
        (
            ParamSpec("C", "real", "log", (1.0, 1e3)),
            ParamSpec("k", "cat", values=("x", "y")),
        )
    )


class TestEncodeDecode:
    def test_bool_dim(self):
        space = SearchSpace((ParamSpec("b", "bool"),))
        assert list(space.encode({"b": True})) == [1.0]
        assert space.decode([1.0]) == {"b": True}

    def test_one_hot(self):
        space = SearchSpace((ParamSpec("c", "cat", values=("a", "b", "c")),))
        assert list(space.encode({"c": "b"})) == [0.0, 1.0, 0.0]

    def test_composite(self):
        enc = mixed_space().encode({"C": 10**1.5, "k": "y"})
        assert enc == pytest.approx([0.5, 0.0, 1.0], abs=1e-12)

    def test_cat_tie_breaks_low(self):
        space = SearchSpace((ParamSpec("c", "cat", values=("a", "b")),))
        assert space.decode([0.4, 0.4]) == {"c": "a"}

    def test_int_decode(self):
        space = SearchSpace((ParamSpec("n", "int", "linear", (1, 9)),))
        assert space.decode([0.5]) == {"n": 5}

    def test_wrong_length_is_shape_error(self):
        with pytest.raises(ShapeError):
            mixed_space().decode([0.5, 0.0])

    def test_invalid_suggestion_lists_offenders(self):
        space = mixed_space()
        with pytest.raises(SuggestionError) as info:
            space.validate({"C": -3.0, "k": "nope"})
        assert set(info.value.offenders) == {"C", "k"}

    def test_extra_keys_are_offenders(self):
        with pytest.raises(SuggestionError) as info:
            mixed_space().validate({"C": 2.0, "k": "x", "zz": 1})
        assert "zz" in info.value.offenders


def random_space(rng: np.random.Generator) -> SearchSpace:
    specs = []
    n = rng.integers(1, 6)
    for i in range(n):
        kind = rng.choice(["real", "int", "cat", "bool"])
        name = f"p{i}"
        if kind == "real":
            warp = rng.choice(["linear", "log", "logit", "bilog"])
            if warp == "log":
                lo = 10.0 ** rng.uniform(-6, 1)
                hi = lo * 10.0 ** rng.uniform(0.5, 6)
            elif warp == "logit":
                lo = rng.uniform(0.01, 0.4)
                hi = rng.uniform(lo + 0.1, 0.99)
            else:
                lo = rng.uniform(-100, 50)
                hi = lo + 10.0 ** rng.uniform(-1, 3)
            specs.append(ParamSpec(name, "real", warp, (lo, hi)))
        elif kind == "int":
            lo = int(rng.integers(-20, 20))
            specs.append(ParamSpec(name, "int", "linear", (lo, lo + int(rng.integers(1, 40)))))
        elif kind == "cat":
            k = int(rng.integers(2, 6))
            specs.append(ParamSpec(name, "cat", values=tuple(f"v{j}" for j in range(k))))
        else:
            specs.append(ParamSpec(name, "bool"))
    return SearchSpace(tuple(specs))


class TestRoundTripFuzz:
    def test_hundred_random_spaces(self):
        rng = np.random.default_rng(20240817)
        for _ in range(100):
            space = random_space(rng)
            for _ in range(5):
                s = space.sample(rng)
                back = space.decode(space.encode(s))
                for p in space.params:
                    if p.kind == "real":
                        ref = max(abs(s[p.name]), 1e-30)
                        assert abs(back[p.name] - s[p.name]) / ref < 1e-12
                    else:
                        assert back[p.name] == s[p.name]

    def test_encode_in_unit_cube_and_one_hot_sums(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            space = random_space(rng)
            enc = space.encode(space.sample(rng))
            assert np.all(enc >= 0.0) and np.all(enc <= 1.0)
            i = 0
            for p in space.params:
                if p.kind == "cat":
                    assert enc[i : i + p.width].sum() == 1.0
                i += p.width

    def test_snap_matches_encode_decode(self):
        rng = np.random.default_rng(99)
        for _ in range(20):
            space = random_space(rng)
            U = rng.random((16, space.encoded_dim))
            snapped = snap_unit_points(space, U)
            for row, want in zip(snapped, U):
                expected = space.encode(space.decode(np.asarray(want)))
                assert row == pytest.approx(expected, abs=1e-12)


@given(st.floats(min_value=0.0, max_value=1.0, allow_nan=False))
@settings(max_examples=200, deadline=None)
def test_unwarp_warp_identity_on_unit_interval(u):
    spec = log_real(1e-3, 1e4)
    assert warp_value(spec, unwarp_value(spec, u)) == pytest.approx(u, abs=1e-9)


class TestAnonymize:
    def test_names_become_p_indices(self):
        space = SearchSpace(
            (
                ParamSpec("C", "real", "log", (1.0, 1e3)),
                ParamSpec("gamma", "real", "log", (1e-4, 1e-3)),
                ParamSpec("tol", "real", "log", (1e-5, 1e-1)),
            )
        )
        anon, mapping = anonymize(space)
        assert anon.names == ["P1", "P2", "P3"]
        assert mapping.forward == {"C": "P1", "gamma": "P2", "tol": "P3"}
        assert mapping.inverse["P2"] == "gamma"

    def test_empty_space(self):
        anon, mapping = anonymize(SearchSpace(()))
        assert anon.names == [] and mapping.forward == {}

    def test_single_param(self):
        anon, mapping = anonymize(SearchSpace((ParamSpec("alpha", "real", "log", (0.1, 1.0)),)))
        assert anon.names == ["P1"] and mapping.forward == {"alpha": "P1"}

    def test_preserves_structure_and_roundtrips(self):
        rng = np.random.default_rng(3)
        space = random_space(rng)
        anon, mapping = anonymize(space)
        for orig, new in zip(space.params, anon.params):
            assert (orig.kind, orig.warp, orig.range, orig.values) == (
                new.kind,
                new.warp,
                new.range,
                new.values,
            )
        s = space.sample(rng)
        renamed = mapping.apply(s)
        anon.validate(renamed)
        assert mapping.invert(renamed) == s


class TestJsonConfig:
    def test_parse_example_dialect(self):
        space = parse_space_config(
            {
                "C": {"type": "real", "space": "log", "range": [1.0, 1000.0]},
                "k": {"type": "cat", "values": ["a", "b"]},
                "flag": {"type": "bool"},
            }
        )
        assert space.names == ["C", "k", "flag"]
        assert space["C"].warp == "log"
        assert space.encoded_dim == 4

    def test_unknown_keys_rejected(self):
        with pytest.raises(ConfigError):
            parse_space_config({"C": {"type": "real", "range": [0, 1], "prior": "u"}})

    def test_missing_type_rejected(self):
        with pytest.raises(ConfigError):
            parse_space_config({"C": {"range": [0, 1]}})

    def test_space_key_only_for_numeric(self):
        with pytest.raises(ConfigError):
            parse_space_config({"c": {"type": "cat", "values": ["a"], "space": "log"}})

    def test_round_trip(self):
        config = {
            "C": {"type": "real", "space": "log", "range": [1.0, 1000.0]},
            "n": {"type": "int", "space": "linear", "range": [1, 9]},
            "k": {"type": "cat", "values": ["a", "b"]},
            "flag": {"type": "bool"},
        }
        assert space_to_config(parse_space_config(config)) == config

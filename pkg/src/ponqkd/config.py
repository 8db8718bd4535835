"""TOML configuration: schema, defaulting, validation and conversion to a Scenario.

The key schema lives in ``data/defaults.toml``; that file is loaded to get
the default of every key, and any key not present there is rejected.
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass, fields
from importlib import resources
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .distill.pipeline import DistillParams
from .network import MuPolicy, MuPolicyKind, Placement, Scenario, Topology
from .optics import Detector
from .protocol import B92Alphabet

PRESETS = ("config-a", "config-b", "p2p")
REQUIRED = (("topology", "placement"), ("topology", "fan_out"))
MODES = ("analytic", "montecarlo")

_PLACEMENT_DEFAULTS = {
    Placement.IN_CHANNEL.value: {
        ("source", "mu_policy"): MuPolicyKind.AT_FEEDER.value,
        ("topology", "splitter_excess_db"): 3.0,
    },
}


class ConfigError(ValueError):
    """Invalid configuration; the message always starts with the offending key path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _data_text(*parts: str) -> str:
    node = resources.files("ponqkd").joinpath("data")
    for part in parts:
        node = node.joinpath(part)
    return node.read_text(encoding="utf-8")


def defaults_text() -> str:
    return _data_text("defaults.toml")


def _loads(text: str, origin: str) -> dict:
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(origin, f"not valid TOML ({exc})") from None


DEFAULTS: dict = _loads(defaults_text(), "defaults.toml")


def preset_table(name: str) -> dict:
    if name not in PRESETS:
        raise ConfigError("--preset", f"unknown preset {name!r}; choose one of {', '.join(PRESETS)}")
    table = _loads(_data_text("presets", f"{name}.toml"), name)
    table.pop("preset_version", None)
    return table


def preset_version(name: str) -> int:
    if name not in PRESETS:
        raise ConfigError("--preset", f"unknown preset {name!r}")
    return int(_loads(_data_text("presets", f"{name}.toml"), name).get("preset_version", 0))


# --------------------------------------------------------------------------- sections


@dataclass(frozen=True)
class SourceSection:
    mu_policy: str
    mu: float
    clock_rate_hz: float


@dataclass(frozen=True)
class TopologySection:
    placement: str
    fan_out: int
    feeder_km: float
    drop_km: float | tuple[float, ...]
    dedicated_km: float | tuple[float, ...]
    attenuation_db_per_km: float
    splitter_excess_db: float


@dataclass(frozen=True)
class DetectorSection:
    efficiency: float
    dark_prob_per_slot: float
    dead_time_s: float


@dataclass(frozen=True)
class ProtocolSection:
    state_angle_deg: float
    extinction: float


@dataclass(frozen=True)
class DistillSection:
    sample_fraction: float
    f_ec: float
    passes: int
    epsilon_bits: int


@dataclass(frozen=True)
class RunSection:
    mode: str
    slots: int
    seed: int
    sweep_lengths_km: tuple[float, ...]


@dataclass(frozen=True)
class ConfigDocument:
    source: SourceSection
    topology: TopologySection
    detector: DetectorSection
    protocol: ProtocolSection
    distill: DistillSection
    run: RunSection

    def to_dict(self) -> dict:
        out = {}
        for sec in fields(self):
            section = getattr(self, sec.name)
            out[sec.name] = {
                f.name: list(v) if isinstance(v := getattr(section, f.name), tuple) else v
                for f in fields(section)
            }
        return out

    def scenario(self, length_km: float | None = None) -> Scenario:
        s, t, d, p, k, r = self.source, self.topology, self.detector, self.protocol, self.distill, self.run
        if t.placement == Placement.IN_ALICE.value:
            topo = Topology.in_alice(t.fan_out, t.dedicated_km, t.attenuation_db_per_km, t.splitter_excess_db)
        else:
            topo = Topology.in_channel(
                t.fan_out, t.feeder_km, t.drop_km, t.attenuation_db_per_km, t.splitter_excess_db
            )
        scenario = Scenario(
            topology=topo,
            mu_policy=MuPolicy(MuPolicyKind(s.mu_policy), s.mu),
            clock_rate_hz=s.clock_rate_hz,
            detector=Detector(d.efficiency, d.dark_prob_per_slot, d.dead_time_s),
            alphabet=B92Alphabet(p.state_angle_deg),
            extinction=p.extinction,
            slots=r.slots,
            seed=r.seed,
            distill=DistillParams(k.sample_fraction, k.f_ec, k.passes, k.epsilon_bits),
        )
        return scenario if length_km is None else scenario.with_length(length_km)


# --------------------------------------------------------------------------- field checks


def _number(path, v):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(path, f"expected a number, got {type(v).__name__} {v!r}")
    v = float(v)
    if not math.isfinite(v):
        raise ConfigError(path, f"must be finite, got {v}")
    return v


def _integer(path, v):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(path, f"expected an integer, got {type(v).__name__} {v!r}")
    return v


def _string(path, v):
    if not isinstance(v, str):
        raise ConfigError(path, f"expected a string, got {type(v).__name__} {v!r}")
    return v


def _lengths(path, v):
    if isinstance(v, list):
        return tuple(_nonneg(f"{path}[{i}]", x) for i, x in enumerate(v))
    return _nonneg(path, v)


def _length_list(path, v):
    if not isinstance(v, list):
        raise ConfigError(path, f"expected a list of lengths, got {type(v).__name__}")
    return tuple(_nonneg(f"{path}[{i}]", x) for i, x in enumerate(v))


def _rng(check, lo=None, hi=None, lo_open=False, hi_open=False):
    def validate(path, v):
        v = check(path, v)
        bad_lo = lo is not None and (v <= lo if lo_open else v < lo)
        bad_hi = hi is not None and (v >= hi if hi_open else v > hi)
        if bad_lo or bad_hi:
            left = "(" if lo_open else "["
            right = ")" if hi_open else "]"
            span = f"{left}{'-inf' if lo is None else lo}, {'inf' if hi is None else hi}{right}"
            raise ConfigError(path, f"out of range: {v!r} not in {span}")
        return v

    return validate


def _choice(options):
    def validate(path, v):
        v = _string(path, v)
        if v not in options:
            raise ConfigError(path, f"must be one of {', '.join(options)}, got {v!r}")
        return v

    return validate


_nonneg = _rng(_number, 0.0)

SCHEMA = {
    "source": {
        "mu_policy": _choice([k.value for k in MuPolicyKind]),
        "mu": _rng(_number, 0.0, lo_open=True),
        "clock_rate_hz": _rng(_number, 0.0, lo_open=True),
    },
    "topology": {
        "placement": _choice([p.value for p in Placement]),
        "fan_out": _rng(_integer, 1),
        "feeder_km": _nonneg,
        "drop_km": _lengths,
        "dedicated_km": _lengths,
        "attenuation_db_per_km": _nonneg,
        "splitter_excess_db": _nonneg,
    },
    "detector": {
        "efficiency": _rng(_number, 0.0, 1.0),
        "dark_prob_per_slot": _rng(_number, 0.0, 1.0, hi_open=True),
        "dead_time_s": _nonneg,
    },
    "protocol": {
        "state_angle_deg": _rng(_number, 0.0, 90.0, lo_open=True, hi_open=True),
        "extinction": _rng(_number, 0.0, 1.0),
    },
    "distill": {
        "sample_fraction": _rng(_number, 0.0, 1.0, lo_open=True, hi_open=True),
        "f_ec": _rng(_number, 1.0),
        "passes": _rng(_integer, 1),
        "epsilon_bits": _rng(_integer, 0),
    },
    "run": {
        "mode": _choice(MODES),
        "slots": _rng(_integer, 1),
        "seed": _rng(_integer, 0, 2**64, hi_open=True),
        "sweep_lengths_km": _length_list,
    },
}

_SECTIONS = {
    "source": SourceSection,
    "topology": TopologySection,
    "detector": DetectorSection,
    "protocol": ProtocolSection,
    "distill": DistillSection,
    "run": RunSection,
}


def merge(base: dict, overlay: dict) -> dict:
    out = {k: dict(v) if isinstance(v, dict) else v for k, v in base.items()}
    for key, value in overlay.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = {**out[key], **value}
        else:
            out[key] = value
    return out


def _check_keys(raw: dict) -> None:
    for section, table in raw.items():
        if section not in SCHEMA:
            raise ConfigError(section, "unknown section")
        if not isinstance(table, dict):
            raise ConfigError(section, "expected a table")
        for key in table:
            if key not in SCHEMA[section]:
                raise ConfigError(f"{section}.{key}", "unknown key")


def build_document(raw: dict) -> ConfigDocument:
    """Validate a merged raw table (TOML-shaped dicts) into a fully defaulted document."""
    _check_keys(raw)
    for section, key in REQUIRED:
        if key not in raw.get(section, {}):
            raise ConfigError(f"{section}.{key}", "missing required key")

    placement = SCHEMA["topology"]["placement"]("topology.placement", raw["topology"]["placement"])
    values: dict[str, dict[str, Any]] = {}
    for section, checks in SCHEMA.items():
        given = raw.get(section, {})
        values[section] = {}
        for key, check in checks.items():
            if key in given:
                v = given[key]
            else:
                v = _PLACEMENT_DEFAULTS.get(placement, {}).get((section, key), DEFAULTS[section][key])
            values[section][key] = check(f"{section}.{key}", v)

    _cross_checks(values)
    return ConfigDocument(**{name: cls(**values[name]) for name, cls in _SECTIONS.items()})


def _cross_checks(v: dict) -> None:
    placement = Placement(v["topology"]["placement"])
    policy = MuPolicyKind(v["source"]["mu_policy"])
    allowed = {
        Placement.IN_ALICE: (MuPolicyKind.PER_PORT, MuPolicyKind.AGGREGATE),
        Placement.IN_CHANNEL: (MuPolicyKind.AT_FEEDER,),
    }[placement]
    if policy not in allowed:
        raise ConfigError(
            "source.mu_policy",
            f"{policy.value} is not allowed with topology.placement = {placement.value}"
            f" (allowed: {', '.join(p.value for p in allowed)})",
        )
    n = v["topology"]["fan_out"]
    for key in ("drop_km", "dedicated_km"):
        lengths = v["topology"][key]
        if isinstance(lengths, tuple) and len(lengths) != n:
            raise ConfigError(f"topology.{key}", f"lists {len(lengths)} lengths but topology.fan_out = {n}")


def parse_config(text: str, base: dict | None = None) -> ConfigDocument:
    """Parse TOML ``text`` (optionally layered over ``base``) into a validated document."""
    raw = _loads(text, "config")
    return build_document(merge(base or {}, raw))


def load_document(
    config_text: str | None = None,
    preset: str | None = None,
    overrides: dict | None = None,
) -> ConfigDocument:
    """Layer preset, then config text, then command-line overrides."""
    raw: dict = {}
    if preset is not None:
        raw = merge(raw, preset_table(preset))
    if config_text is not None:
        raw = merge(raw, _loads(config_text, "config"))
    if overrides:
        raw = merge(raw, overrides)
    return build_document(raw)

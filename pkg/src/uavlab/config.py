"""Run configuration: a flat ``section.key = value`` text file, overridable by CLI flags.

Blank lines and lines starting with ``#`` are ignored. Unknown keys are an
error.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from .channel import ChannelParams
from .cnn import TrainConfig
from .dataset import GridConfig
from .errors import ConfigError
from .mobility import ScenarioConfig
from .rl import DqnConfig, TabularParams


@dataclass(frozen=True)
class RunSettings:
    seed: int = 2024
    sessions: int = 100
    split_seed: int = 7
    train_frac: float = 0.8
    val_frac: float = 0.1
    test_frac: float = 0.1
    rl_passes: int = 3
    bench_instances: int = 100
    threads: int = 0  # 0 = use UAVLAB_THREADS or 1

    @property
    def fractions(self):
        return (self.train_frac, self.val_frac, self.test_frac)


# section -> (dataclass, {config key: dataclass field})
_SECTIONS = {
    "scenario": (ScenarioConfig, None),
    "channel": (ChannelParams, {"a": "a", "b": "b", "eta_los_db": "eta_los", "eta_nlos_db": "eta_nlos",
                                "carrier_hz": "carrier_hz", "gamma_db": "gamma_db"}),
    "grid": (GridConfig, {"rows": "rows", "cols": "cols"}),
    "train": (TrainConfig, None),
    "rl": (TabularParams, {k: k for k in ("gamma", "alpha", "eps_start", "eps_end", "eps_decay_frac", "seed")}),
    "dqn": (DqnConfig, {k: k for k in ("discount", "lr", "batch_size", "replay_capacity", "target_sync",
                                       "learning_starts", "eps_start", "eps_end", "eps_decay_frac", "seed")}),
    "run": (RunSettings, None),
}


def _field_map(section):
    cls, mapping = _SECTIONS[section]
    if mapping is None:
        mapping = {f.name: f.name for f in dataclasses.fields(cls)}
    return mapping


def _types(cls):
    defaults = cls()
    return {f.name: type(getattr(defaults, f.name)) for f in dataclasses.fields(cls)}


def all_keys() -> dict:
    """``section.key`` -> (python type, default value) for every accepted key."""
    out = {}
    for section, (cls, _) in _SECTIONS.items():
        defaults, types = cls(), _types(cls)
        for key, fname in _field_map(section).items():
            out[f"{section}.{key}"] = (types[fname], getattr(defaults, fname))
    return out


def _coerce(key, typ, raw: str):
    try:
        if typ is bool:
            low = raw.strip().lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return low in ("true", "1", "yes")
        if typ is int:
            return int(raw, 0)
        return typ(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {typ.__name__}") from None


@dataclass(frozen=True)
class RunConfig:
    scenario: ScenarioConfig = ScenarioConfig()
    channel: ChannelParams = ChannelParams()
    grid: GridConfig = GridConfig()
    train: TrainConfig = TrainConfig()
    rl: TabularParams = TabularParams()
    dqn: DqnConfig = DqnConfig()
    run: RunSettings = RunSettings()

    @classmethod
    def from_values(cls, values: dict) -> "RunConfig":
        """Build from ``{"section.key": value}``; values may be strings or already typed."""
        keys = all_keys()
        per_section: dict = {s: {} for s in _SECTIONS}
        for key, val in values.items():
            if key not in keys:
                raise ConfigError(f"unknown config key {key!r}")
            typ = keys[key][0]
            section, name = key.split(".", 1)
            per_section[section][_field_map(section)[name]] = _coerce(key, typ, val) if isinstance(val, str) else val
        built = {}
        for section, (klass, _) in _SECTIONS.items():
            try:
                built[section] = klass(**per_section[section])
            except (ValueError, TypeError) as e:
                raise ConfigError(f"[{section}] {e}") from None
        return cls(**built)

    def values(self) -> dict:
        out = {}
        for section in _SECTIONS:
            obj = getattr(self, section)
            for key, fname in _field_map(section).items():
                out[f"{section}.{key}"] = getattr(obj, fname)
        return out


def parse_config_text(text: str, source: str = "<config>") -> dict:
    values = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{n}: expected 'section.key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        values[key] = val
    return values


def load_config(path=None, overrides: dict | None = None) -> RunConfig:
    values = {}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            values.update(parse_config_text(fh.read(), str(path)))
    values.update(overrides or {})
    return RunConfig.from_values(values)


def dump_config(cfg: RunConfig) -> str:
    return "".join(f"{k} = {v}\n" for k, v in cfg.values().items())

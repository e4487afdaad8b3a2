"""Experiment configuration: dataclasses plus a strict YAML loader.

Unknown keys anywhere in the file raise :class:`InvalidConfigError`, so typos
never silently fall back to defaults.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import yaml

from .exceptions import InvalidConfigError
from .recovery import METHODS, RecoveryConfig, SmoothingWindow

__all__ = [
    "SystemConfig",
    "PilotConfig",
    "ExperimentConfig",
    "load_config",
    "config_from_dict",
    "config_to_dict",
    "config_hash",
    "PRESETS",
]

PILOT_MODES = ("cds", "random_search", "random")


@dataclass(frozen=True)
class SystemConfig:
    n_total: int = 91
    n_pilots: int = 10
    n_cols: int = 32
    sparsity: int = 4
    pilot_value: complex = 1.0 + 0.0j

    def __post_init__(self):
        pv = self.pilot_value
        object.__setattr__(self, "pilot_value", complex(*pv) if isinstance(pv, (list, tuple)) else complex(pv))
        if not 1 <= self.n_pilots <= self.n_total:
            raise InvalidConfigError("need 1 <= n_pilots <= n_total")
        if not 1 <= self.sparsity <= self.n_cols <= self.n_total:
            raise InvalidConfigError("need 1 <= sparsity <= n_cols <= n_total")
        if self.pilot_value == 0:
            raise InvalidConfigError("pilot_value must be nonzero")


@dataclass(frozen=True)
class PilotConfig:
    """``cds`` uses the shipped base set mapped by ``multiplier * i + shift``;
    ``random_search`` keeps the best of ``search_iterations`` draws (once per
    experiment); ``random`` draws a fresh uniform pattern every trial."""

    mode: str = "cds"
    search_iterations: int = 1000
    shift: int = 0
    multiplier: int = 1

    def __post_init__(self):
        if self.mode not in PILOT_MODES:
            raise InvalidConfigError(f"pilot mode must be one of {PILOT_MODES}, got {self.mode!r}")
        if self.search_iterations < 1:
            raise InvalidConfigError("search_iterations must be >= 1")


@dataclass(frozen=True)
class ExperimentConfig:
    system: SystemConfig = field(default_factory=SystemConfig)
    pilots: PilotConfig = field(default_factory=PilotConfig)
    methods: tuple = ("sds_imat", "imat", "omp", "interpolate", "oracle")
    snr_grid_db: tuple = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
    trials_per_point: int = 1000
    noiseless: bool = False
    recovery: RecoveryConfig = field(default_factory=RecoveryConfig)
    master_seed: int = 2022
    output_path: Optional[str] = None
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "snr_grid_db", tuple(float(s) for s in self.snr_grid_db))
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise InvalidConfigError(f"unknown methods {unknown}; choose from {sorted(METHODS)}")
        if not self.methods:
            raise InvalidConfigError("methods must be nonempty")
        if not self.snr_grid_db:
            raise InvalidConfigError("snr_grid_db must be nonempty")
        if any(math.isnan(s) for s in self.snr_grid_db):
            raise InvalidConfigError("snr_grid_db contains NaN")
        if self.trials_per_point < 1:
            raise InvalidConfigError("trials_per_point must be >= 1")
        if self.workers < 1:
            raise InvalidConfigError("workers must be >= 1")
        if not 0 <= self.master_seed < 2**64:
            raise InvalidConfigError("master_seed must be a 64-bit unsigned integer")


def _strict(cls, data, where):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise InvalidConfigError(f"{where}: expected a mapping, got {type(data).__name__}")
    names = {f.name for f in dataclasses.fields(cls)}
    extra = sorted(set(data) - names)
    if extra:
        raise InvalidConfigError(f"{where}: unknown keys {extra}")
    try:
        return cls(**data)
    except TypeError as exc:
        raise InvalidConfigError(f"{where}: {exc}") from None


def config_from_dict(data: dict) -> ExperimentConfig:
    data = dict(data or {})
    top = {f.name for f in dataclasses.fields(ExperimentConfig)}
    extra = sorted(set(data) - top)
    if extra:
        raise InvalidConfigError(f"unknown keys {extra}")
    if "system" in data:
        data["system"] = _strict(SystemConfig, data["system"], "system")
    if "pilots" in data:
        data["pilots"] = _strict(PilotConfig, data["pilots"], "pilots")
    if "recovery" in data:
        rec = dict(data["recovery"] or {})
        if isinstance(rec.get("smoothing"), dict):
            rec["smoothing"] = _strict(SmoothingWindow, rec["smoothing"], "recovery.smoothing")
        data["recovery"] = _strict(RecoveryConfig, rec, "recovery")
    return ExperimentConfig(**data)


PRESETS = {
    "table1": "table1.yaml",
    "fig2-cds": "fig2_cds.yaml",
    "fig2-random-search": "fig2_random_search.yaml",
    "fig2-random": "fig2_random.yaml",
    "large": "large.yaml",
    "large-random": "large_random.yaml",
}


def load_config(source) -> ExperimentConfig:
    """Load a YAML file, or a shipped preset given as ``preset:<name>``."""
    source = str(source)
    if source.startswith("preset:"):
        name = source.split(":", 1)[1]
        if name not in PRESETS:
            raise InvalidConfigError(f"unknown preset {name!r}; available: {sorted(PRESETS)}")
        text = resources.files("sdsimat.configs").joinpath(PRESETS[name]).read_text()
    else:
        text = Path(source).read_text()
    return config_from_dict(yaml.safe_load(text))


def _plain(obj):
    if dataclasses.is_dataclass(obj):
        return {f.name: _plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def config_to_dict(cfg: ExperimentConfig) -> dict:
    return _plain(cfg)


def config_hash(cfg: ExperimentConfig) -> str:
    blob = json.dumps(config_to_dict(cfg), sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()

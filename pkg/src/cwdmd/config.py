"""Experiment configuration: defaults, JSON loading, validation and hashing.

A config file is a JSON object. Only ``system`` is required; every other key
falls back to that system's default, so ``{"system": "lti"}`` reproduces the
reference LTI run. :data:`CONFIG_SCHEMA` is the published JSON schema.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import jsonschema
import numpy as np

from .dynsys import Box, Circle, builtin_systems
from .errors import ConfigInvalid, DimensionMismatch

_NUMBER = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_POS_INT = {"type": "integer", "minimum": 1}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "cwdmd experiment configuration",
    "type": "object",
    "additionalProperties": False,
    "required": ["system"],
    "properties": {
        "system": {"type": "string"},
        "params": {"type": "object"},
        "ic_region": {
            "oneOf": [
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["type", "radius"],
                    "properties": {"type": {"const": "circle"}, "radius": _POS},
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["type", "bounds"],
                    "properties": {
                        "type": {"const": "box"},
                        "bounds": {
                            "type": "array",
                            "minItems": 1,
                            "items": {"type": "array", "items": _NUMBER,
                                      "minItems": 2, "maxItems": 2},
                        },
                    },
                },
            ]
        },
        "ic_count": _POS_INT,
        "seed": {"type": "integer", "minimum": 0},
        "horizon": _POS,
        "dt": _POS,
        "substeps": _POS_INT,
        "omega0": _POS,
        "c_param": _POS_INT,
        "j_max": _POS_INT,
        "truncation_tol": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "target_frequencies": {"type": "array", "minItems": 1, "items": _POS},
        "output_dir": {"type": "string"},
        "interior_fraction": {"type": "number", "minimum": 0, "exclusiveMaximum": 0.5},
        "interior_stride": _POS_INT,
        "sweep_omega_min": _POS,
        "sweep_omega_max": _POS,
        "sweep_points": {"type": "integer", "minimum": 2},
        "sweep_real_part": _POS,
    },
}


@dataclass(frozen=True)
class ExperimentConfig:
    system: str
    params: dict
    ic_region: dict
    ic_count: int
    seed: int
    horizon: float
    dt: float
    substeps: int
    omega0: float
    c_param: int
    j_max: int
    truncation_tol: float
    target_frequencies: tuple  # Hz
    output_dir: str
    interior_fraction: float = 0.1
    interior_stride: int = 20
    sweep_omega_min: float = 50.0
    sweep_omega_max: float = 5000.0
    sweep_points: int = 4000
    sweep_real_part: float = 1.0
    extra: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def steps(self) -> int:
        return int(round(self.horizon / self.dt))

    @property
    def target_omegas(self) -> np.ndarray:
        """Target angular frequencies in rad per unit time."""
        return hz_to_rad(np.asarray(self.target_frequencies, dtype=float))

    def region(self):
        r = self.ic_region
        if r["type"] == "circle":
            return Circle(float(r["radius"]))
        return Box(tuple(tuple(b) for b in r["bounds"]))

    def build_system(self):
        return builtin_systems()[self.system](**self.params)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("extra")
        d["target_frequencies"] = list(self.target_frequencies)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON form. ``output_dir`` is left out so the
        same experiment written to two places carries the same hash."""
        d = self.to_dict()
        d.pop("output_dir")
        canon = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()

    def replace(self, **changes) -> "ExperimentConfig":
        d = self.to_dict()
        d.update(changes)
        return from_dict(d)


def hz_to_rad(f):
    return 2.0 * math.pi * f if np.ndim(f) == 0 else 2.0 * np.pi * np.asarray(f)


def rad_to_hz(w):
    return w / (2.0 * math.pi) if np.ndim(w) == 0 else np.asarray(w) / (2.0 * np.pi)


_DEFAULTS = {
    "lti": {
        "system": "lti",
        "params": {"A": [[-1.0, 500.0], [-500.0, -1.0]], "c": [1.0, 0.0]},
        "ic_region": {"type": "circle", "radius": 20.0},
        "ic_count": 100,
        "seed": 0,
        "horizon": 2.0,
        "dt": 0.001,
        "substeps": 64,
        "omega0": 6.0,
        "c_param": 32,
        "j_max": 288,
        "truncation_tol": 1e-8,
        "target_frequencies": [79.54],
        "output_dir": "out/lti",
        "interior_fraction": 0.1,
        "interior_stride": 20,
        "sweep_omega_min": 50.0,
        "sweep_omega_max": 5000.0,
        "sweep_points": 4000,
        "sweep_real_part": 1.0,
    },
    "lorenz": {
        "system": "lorenz",
        "params": {"alpha": 10.0, "rho": 28.0, "beta": 8.0 / 3.0},
        "ic_region": {"type": "box", "bounds": [[-20.0, 20.0], [-30.0, 30.0], [0.0, 50.0]]},
        "ic_count": 40,
        "seed": 0,
        "horizon": 100.0,
        "dt": 0.02,
        "substeps": 4,
        "omega0": 6.0,
        "c_param": 20,
        "j_max": 220,
        "truncation_tol": 1e-8,
        "target_frequencies": [8.17 / (2.0 * math.pi)],
        "output_dir": "out/lorenz",
        "interior_fraction": 0.1,
        "interior_stride": 20,
        "sweep_omega_min": 0.5,
        "sweep_omega_max": 100.0,
        "sweep_points": 2000,
        "sweep_real_part": 0.1,
    },
}


def default_dict(system: str) -> dict:
    if system not in _DEFAULTS:
        raise ConfigInvalid(f"no defaults for system {system!r}; known: {sorted(_DEFAULTS)}")
    return copy.deepcopy(_DEFAULTS[system])


def default_config(system: str) -> ExperimentConfig:
    return from_dict(default_dict(system))


def _validate(cfg: ExperimentConfig) -> None:
    n = cfg.horizon / cfg.dt
    if abs(n - round(n)) > 1e-9 * max(1.0, n) or round(n) < 1:
        raise ConfigInvalid(f"horizon/dt = {n} must be a positive integer")
    if cfg.system not in builtin_systems():
        raise ConfigInvalid(f"unknown system {cfg.system!r}")
    try:
        system = cfg.build_system()
    except TypeError as exc:
        raise ConfigInvalid(f"bad parameters for {cfg.system}: {exc}") from exc
    except DimensionMismatch as exc:
        raise ConfigInvalid(str(exc)) from exc
    try:
        region = cfg.region()
    except ValueError as exc:
        raise ConfigInvalid(str(exc)) from exc
    if isinstance(region, Circle) and system.dimension != 2:
        raise ConfigInvalid("circle initial conditions need a two-dimensional system")
    if isinstance(region, Box) and len(region.bounds) != system.dimension:
        raise ConfigInvalid(
            f"box has {len(region.bounds)} axes, system dimension is {system.dimension}"
        )
    if cfg.sweep_omega_max <= cfg.sweep_omega_min:
        raise ConfigInvalid("sweep_omega_max must exceed sweep_omega_min")


def from_dict(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict) or "system" not in data:
        raise ConfigInvalid("config must be an object with a 'system' key")
    merged = default_dict(data["system"]) if data["system"] in _DEFAULTS else {}
    merged.update(data)
    try:
        jsonschema.validate(merged, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigInvalid(f"{path}: {exc.message}") from exc
    names = {f.name for f in fields(ExperimentConfig)} - {"extra"}
    missing = names - set(merged)
    if missing:
        raise ConfigInvalid(f"missing keys: {sorted(missing)}")
    kwargs = {k: merged[k] for k in names}
    kwargs["target_frequencies"] = tuple(float(f) for f in kwargs["target_frequencies"])
    for key in ("horizon", "dt", "omega0", "truncation_tol", "interior_fraction",
                "sweep_omega_min", "sweep_omega_max", "sweep_real_part"):
        kwargs[key] = float(kwargs[key])
    cfg = ExperimentConfig(**kwargs)
    _validate(cfg)
    return cfg


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"config {path} is not valid JSON: {exc}") from exc
    return from_dict(data)

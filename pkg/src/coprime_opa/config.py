"""Experiment configuration: a single YAML document whose defaults describe
the fabricated 8x8 / 8x8 transceiver (P=3, Q=4, dx=2 wavelengths at 1550 nm).

Angles in the file are degrees, lengths are wavelengths unless the key
says otherwise.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from fractions import Fraction

import yaml

from .drive import ThermalParams
from .element import ElementPattern
from .geometry import DEFAULT_MIN_SPACING, CoprimeSpec
from .steering import OptimizerConfig


class ConfigError(ValueError):
    """Invalid configuration value; ``field`` is a dotted path like ``coprime.P``."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message


@dataclass(frozen=True)
class ScanSettings:
    fov_x: float = 23.0
    fov_y: float = 16.3
    beamwidth: float = 0.6
    grid: int = 512
    workers: int = 0          # 0 = one per CPU

    def __post_init__(self):
        if not (self.fov_x > 0 and self.fov_y > 0 and self.beamwidth > 0):
            raise ValueError("fov and beamwidth must be positive")
        if self.grid < 2:
            raise ValueError("grid must be >= 2")
        if self.workers < 0:
            raise ValueError("workers must be >= 0")


@dataclass(frozen=True)
class DriveSettings:
    aperture: str = "tx"
    cycles: int = 0           # 0 = enough for 8 thermal time constants
    samples_per_slot: int = 4
    trace_stride: int = 1

    def __post_init__(self):
        if self.aperture not in ("tx", "rx"):
            raise ValueError("aperture must be tx or rx")
        if self.cycles < 0 or self.samples_per_slot < 1 or self.trace_stride < 1:
            raise ValueError("cycles >= 0, samples_per_slot >= 1 and trace_stride >= 1 required")


def _paper_spec() -> CoprimeSpec:
    return CoprimeSpec(P=3, Q=4, dx=2.0, k1=Fraction(2), k2=Fraction(8, 3), wavelength=1.55)


def _paper_element() -> ElementPattern:
    return ElementPattern.gaussian(23.0, 16.3, 7.4)


@dataclass(frozen=True)
class ExperimentConfig:
    coprime: CoprimeSpec = field(default_factory=_paper_spec)
    element: ElementPattern = field(default_factory=_paper_element)
    grid: int = 2048
    targets: tuple[tuple[float, float], ...] = ((0.0, 7.4),)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    thermal: ThermalParams = field(default_factory=ThermalParams)
    scan: ScanSettings = field(default_factory=ScanSettings)
    drive: DriveSettings = field(default_factory=DriveSettings)
    sweep_k: tuple[Fraction, ...] = tuple(Fraction(k) for k in range(1, 7))
    min_spacing: float = DEFAULT_MIN_SPACING
    output_dir: str = "out"

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


_SECTIONS = {
    "coprime": CoprimeSpec,
    "element": ElementPattern,
    "optimizer": OptimizerConfig,
    "thermal": ThermalParams,
    "scan": ScanSettings,
    "drive": DriveSettings,
}


def _fraction(path, value) -> Fraction:
    try:
        if isinstance(value, bool):
            raise TypeError
        if isinstance(value, float):
            return Fraction(value).limit_denominator(10**6)
        return Fraction(str(value))
    except (TypeError, ValueError, ZeroDivisionError):
        raise ConfigError(path, f"expected a number or ratio like '8/3', got {value!r}") from None


def _coerce(path, value, kind):
    if kind is Fraction:
        return _fraction(path, value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
            raise ConfigError(path, f"expected an integer, got {value!r}")
        return int(value)
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(path, f"expected a number, got {value!r}")
        return float(value)
    if kind is str:
        if not isinstance(value, str):
            raise ConfigError(path, f"expected a string, got {value!r}")
        return value
    return value


_FIELD_TYPES = {
    CoprimeSpec: {"P": int, "Q": int, "dx": float, "k1": Fraction, "k2": Fraction, "wavelength": float},
    ElementPattern: {"kind": str, "theta_x_3db": float, "theta_y_3db": float, "tilt_y": float},
    OptimizerConfig: {"max_sweeps": int, "phase_steps": int, "noise_sigma": float, "seed": int,
                      "memory": float},
    ThermalParams: {"p_two_pi_mw": float, "f_3db_khz": float, "cycle_rate_mhz": float, "crosstalk": float},
    ScanSettings: {"fov_x": float, "fov_y": float, "beamwidth": float, "grid": int, "workers": int},
    DriveSettings: {"aperture": str, "cycles": int, "samples_per_slot": int, "trace_stride": int},
}


def _section(name, cls, data, default):
    if data is None:
        return default
    if not isinstance(data, dict):
        raise ConfigError(name, "expected a mapping")
    types = _FIELD_TYPES[cls]
    unknown = set(data) - set(types)
    if unknown:
        raise ConfigError(f"{name}.{sorted(unknown)[0]}", "unknown key")
    kwargs = {f.name: getattr(default, f.name) for f in dataclasses.fields(cls)}
    for key, value in data.items():
        kwargs[key] = _coerce(f"{name}.{key}", value, types[key])
    try:
        return cls(**kwargs)
    except ValueError as exc:
        raise ConfigError(_blame(name, cls, str(exc)), str(exc)) from None


def _blame(name, cls, message):
    # point at the first field named in the message, else the section
    for key in _FIELD_TYPES[cls]:
        if message.startswith(f"{key}=") or message.startswith(f"{key} "):
            return f"{name}.{key}"
    return name


def config_from_dict(data: dict | None) -> ExperimentConfig:
    data = data or {}
    if not isinstance(data, dict):
        raise ConfigError("<root>", "expected a mapping at the top level")
    default = ExperimentConfig()
    top = {"grid", "targets", "sweep_k", "min_spacing", "output_dir", *_SECTIONS}
    unknown = set(data) - top
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown key")
    kwargs = {}
    for name, cls in _SECTIONS.items():
        kwargs[name] = _section(name, cls, data.get(name), getattr(default, name))
    if "grid" in data:
        kwargs["grid"] = _coerce("grid", data["grid"], int)
        if kwargs["grid"] < 2:
            raise ConfigError("grid", "must be >= 2")
    if "min_spacing" in data:
        kwargs["min_spacing"] = _coerce("min_spacing", data["min_spacing"], float)
        if not kwargs["min_spacing"] >= 0:
            raise ConfigError("min_spacing", "must be >= 0")
    if "output_dir" in data:
        kwargs["output_dir"] = _coerce("output_dir", data["output_dir"], str)
    if "targets" in data:
        raw = data["targets"]
        if not isinstance(raw, list) or not raw:
            raise ConfigError("targets", "expected a non-empty list of [theta_x, theta_y] pairs")
        targets = []
        for i, t in enumerate(raw):
            if not isinstance(t, (list, tuple)) or len(t) != 2:
                raise ConfigError(f"targets.{i}", "expected [theta_x, theta_y] in degrees")
            tx, ty = (_coerce(f"targets.{i}", x, float) for x in t)
            if abs(tx) >= 90 or abs(ty) >= 90:
                raise ConfigError(f"targets.{i}", "angles must lie within (-90, 90) degrees")
            targets.append((tx, ty))
        kwargs["targets"] = tuple(targets)
    if "sweep_k" in data:
        raw = data["sweep_k"]
        if not isinstance(raw, list) or not raw:
            raise ConfigError("sweep_k", "expected a non-empty list")
        kwargs["sweep_k"] = tuple(_fraction(f"sweep_k.{i}", k) for i, k in enumerate(raw))
    return ExperimentConfig(**kwargs)


def config_to_dict(config: ExperimentConfig) -> dict:
    out = {}
    for name in _SECTIONS:
        section = getattr(config, name)
        out[name] = {
            f.name: str(v) if isinstance(v := getattr(section, f.name), Fraction) else v
            for f in dataclasses.fields(section)
        }
    out["grid"] = config.grid
    out["targets"] = [list(t) for t in config.targets]
    out["sweep_k"] = [str(k) for k in config.sweep_k]
    out["min_spacing"] = config.min_spacing
    out["output_dir"] = config.output_dir
    return out


def dump_config(config: ExperimentConfig) -> str:
    return yaml.safe_dump(config_to_dict(config), sort_keys=False)


def parse_config(text: str) -> ExperimentConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("<file>", f"not valid YAML: {exc}") from None
    return config_from_dict(data)


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return parse_config(fh.read())

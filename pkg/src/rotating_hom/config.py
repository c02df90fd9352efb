"""TOML experiment configuration with unit-suffixed keys.

Every physical key carries its unit in the name (``dwell_time_s``,
``loop_diameter_m``...). Unknown sections or keys are rejected, and errors
point at the offending line.
"""

import hashlib
import re
from dataclasses import dataclass, field, replace

import tomli
import tomli_w

from .errors import ConfigError, DomainError
from .estimation import ABS_MEAN, HALF_DIFFERENCE
from .instrument import DetectorModel, RunPlan, SourceModel
from .physics import CONVENTIONS, PAPER_F, PlatformGeometry
from .scenarios import SatelliteScenario


@dataclass(frozen=True)
class ClassicalSettings:
    """Laser calibration: wavelength, per-run phase noise (rad), even systematic (rad per rate^2)."""

    wavelength: float = 642e-9
    phase_noise: float = 0.1
    even_phase_coefficient: float = 0.0

    def __post_init__(self):
        if not self.wavelength > 0:
            raise DomainError("wavelength must be positive")
        if self.phase_noise < 0:
            raise DomainError("phase_noise must be >= 0")


@dataclass(frozen=True)
class ExperimentConfig:
    geometry: PlatformGeometry
    source: SourceModel = field(default_factory=SourceModel)
    detector: DetectorModel = field(default_factory=DetectorModel)
    plan: RunPlan = field(default_factory=RunPlan)
    classical: ClassicalSettings = field(default_factory=ClassicalSettings)
    satellite: SatelliteScenario = field(default_factory=SatelliteScenario)
    convention: str = PAPER_F
    seed: int = 0
    reduction: str = HALF_DIFFERENCE
    output_dir: str = "out"

    def __post_init__(self):
        if self.convention not in CONVENTIONS:
            raise DomainError(f"convention must be one of {CONVENTIONS}")
        if self.reduction not in (HALF_DIFFERENCE, ABS_MEAN):
            raise DomainError(f"reduction must be {HALF_DIFFERENCE!r} or {ABS_MEAN!r}")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be an unsigned 64-bit integer")

    def apparatus(self):
        from .instrument import Apparatus

        return Apparatus(self.geometry, self.source, self.detector, self.convention)

    def with_overrides(self, **kwargs):
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})


# section -> (class, {file key: (field, type)})
_SCHEMA = {
    "geometry": (
        PlatformGeometry,
        {
            "loop_diameter_m": ("loop_diameter", "float"),
            "turns": ("turns", "int"),
            "fiber_length_m": ("fiber_length", "float"),
            "phase_index": ("phase_index", "float"),
            "group_index": ("group_index", "float"),
            "free_space_path_m": ("free_space_path", "float"),
        },
    ),
    "source": (
        SourceModel,
        {
            "pair_rate_per_s": ("pair_rate", "float"),
            "arm_transmission": ("arm_transmission", "pair"),
            "photon_center_wavelength_m": ("photon_center_wavelength", "float"),
            "spectral_width_rad_per_s": ("spectral_width", "float"),
            "mode_overlap_visibility": ("mode_overlap_visibility", "float"),
            "pump_wavelength_m": ("pump_wavelength", "float"),
        },
    ),
    "detector": (
        DetectorModel,
        {
            "efficiency": ("efficiency", "pair"),
            "dark_rate_per_s": ("dark_rate", "pair"),
            "coincidence_window_s": ("coincidence_window", "float"),
        },
    ),
    "plan": (
        RunPlan,
        {
            "rotation_magnitudes_hz": ("rotation_magnitudes", "floats"),
            "runs_per_setting": ("runs_per_setting", "int"),
            "dwell_time_s": ("dwell_time", "float"),
            "scan_dwell_time_s": ("scan_dwell_time", "float"),
            "scan_positions_m": ("scan_positions", "floats"),
            "stage_position_m": ("stage_position", "float"),
            "steepest_side": ("steepest_side", "int"),
            "even_coefficient_m_per_hz2": ("even_coefficient", "float"),
            "drift_std_m_per_sqrt_s": ("drift_std", "float"),
            "sagnac": ("sagnac", "bool"),
            "noiseless": ("noiseless", "bool"),
        },
    ),
    "classical": (
        ClassicalSettings,
        {
            "wavelength_m": ("wavelength", "float"),
            "phase_noise_rad": ("phase_noise", "float"),
            "even_phase_coefficient_rad_per_hz2": ("even_phase_coefficient", "float"),
        },
    ),
    "satellite": (
        SatelliteScenario,
        {
            "angular_momentum_kg_m2_per_s": ("angular_momentum", "float"),
            "orbital_radius_m": ("orbital_radius", "float"),
            "gravitational_constant_m3_per_kg_s2": ("gravitational_constant", "float"),
            "revolutions": ("revolutions", "int"),
        },
    ),
}

_RUN_KEYS = {
    "seed": ("seed", "int"),
    "convention": ("convention", "str"),
    "reduction": ("reduction", "str"),
    "output_dir": ("output_dir", "str"),
}


def _locate(text, section, key=None):
    """1-based line of ``[section]`` or of ``key`` inside it; None if not found."""
    current = None
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        header = re.match(r"^\[([^\]]+)\]", stripped)
        if header:
            current = header.group(1).strip()
            if key is None and current == section:
                return lineno
        elif key is not None and current == section and re.match(rf"^{re.escape(key)}\s*=", stripped):
            return lineno
    return None


def _coerce(value, kind):
    if kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise TypeError("expected a number")
        return float(value)
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise TypeError("expected an integer")
        return value
    if kind == "bool":
        if not isinstance(value, bool):
            raise TypeError("expected true or false")
        return value
    if kind == "str":
        if not isinstance(value, str):
            raise TypeError("expected a string")
        return value
    if kind in ("floats", "pair"):
        if isinstance(value, (int, float)) and not isinstance(value, bool) and kind == "pair":
            return (float(value), float(value))
        if not isinstance(value, list) or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in value):
            raise TypeError("expected a list of numbers")
        if kind == "pair" and len(value) != 2:
            raise TypeError("expected two numbers (one per arm or detector)")
        return tuple(float(v) for v in value)
    raise AssertionError(kind)


def _build(text, section, cls, keymap, table):
    kwargs = {}
    for key, value in table.items():
        if key not in keymap:
            raise ConfigError(f"unknown key {key!r} in [{section}]", _locate(text, section, key))
        name, kind = keymap[key]
        try:
            kwargs[name] = _coerce(value, kind)
        except TypeError as exc:
            raise ConfigError(f"[{section}] {key}: {exc}", _locate(text, section, key)) from None
    try:
        return cls(**kwargs)
    except (DomainError, TypeError) as exc:
        raise ConfigError(f"[{section}] {exc}", _locate(text, section)) from None


def loads(text, base=None):
    """Parse TOML text; sections and keys not given fall back to ``base`` (or the lab preset)."""
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(str(exc), getattr(exc, "lineno", None)) from None
    if base is None:
        from .scenarios import lab_preset

        base = lab_preset()

    parts = {}
    for section, table in data.items():
        if section == "run":
            continue
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]", _locate(text, section))
        if not isinstance(table, dict):
            raise ConfigError(f"{section} must be a table", _locate(text, section))
        cls, keymap = _SCHEMA[section]
        merged = {k: v for k, v in _dump_section(getattr(base, section), keymap).items() if k not in table}
        merged.update(table)
        parts[section] = _build(text, section, cls, keymap, merged)

    run = data.get("run", {})
    if not isinstance(run, dict):
        raise ConfigError("run must be a table", _locate(text, "run"))
    run_kwargs = {}
    for key, value in run.items():
        if key not in _RUN_KEYS:
            raise ConfigError(f"unknown key {key!r} in [run]", _locate(text, "run", key))
        name, kind = _RUN_KEYS[key]
        try:
            run_kwargs[name] = _coerce(value, kind)
        except TypeError as exc:
            raise ConfigError(f"[run] {key}: {exc}", _locate(text, "run", key)) from None
    try:
        return replace(base, **parts, **run_kwargs)
    except DomainError as exc:
        raise ConfigError(f"[run] {exc}", _locate(text, "run")) from None


def load(path):
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def _dump_section(obj, keymap):
    out = {}
    for key, (name, kind) in keymap.items():
        value = getattr(obj, name)
        if value is None:
            continue
        out[key] = list(value) if kind in ("floats", "pair") else value
    return out


def to_dict(config):
    data = {"run": {key: getattr(config, name) for key, (name, _) in _RUN_KEYS.items()}}
    for section, (_, keymap) in _SCHEMA.items():
        data[section] = _dump_section(getattr(config, section), keymap)
    return data


def dumps(config):
    return tomli_w.dumps(to_dict(config))


def config_hash(config):
    """Digest of everything that affects results; the output location is left out."""
    return hashlib.sha256(dumps(replace(config, output_dir="")).encode("utf-8")).hexdigest()


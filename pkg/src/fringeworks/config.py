"""Flat ``key = value`` run configuration.

Example::

    # 650 nm, 2f-2f imaging
    wavelength = 650e-9
    slit_separation = 250e-6 m
    gamma_abs = 0.3
    gamma_phase_rad = 0
    formats = csv,json

Lengths are plain numbers in meters; a trailing ``m`` is allowed, any other
unit is rejected.  ``auto`` selects the derived default for
``dist_lens_to_image``, ``wire_width`` and ``detector_halfwidth``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Tuple

from .experiment import PLANES, ApparatusConfig

__all__ = ["ConfigError", "RunConfig", "parse_config", "load_config", "FORMATS"]

FORMATS = ("csv", "json")
DEFAULT_OUTPUT_DIR = "fringeworks_out"

_LENGTH_KEYS = {
    "wavelength", "slit_separation", "slit_width", "dist_slit_to_wires",
    "dist_wires_to_lens", "focal_length", "grid_extent",
}
_OPTIONAL_LENGTH_KEYS = {"dist_lens_to_image", "wire_width", "detector_halfwidth", "lens_aperture"}
_INT_KEYS = {"wire_count", "grid_n"}
_REAL_KEYS = {"gamma_abs", "gamma_phase_rad"}
_RUN_KEYS = {"output_dir", "formats", "profiles"}
KNOWN_KEYS = _LENGTH_KEYS | _OPTIONAL_LENGTH_KEYS | _INT_KEYS | _REAL_KEYS | _RUN_KEYS

_NUMBER = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_LENGTH_RE = re.compile(rf"^({_NUMBER})\s*([A-Za-zµ]*)$")


class ConfigError(ValueError):
    """Invalid configuration; ``key`` and ``line`` locate the culprit."""

    def __init__(self, message, key=None, line=None):
        where = []
        if key is not None:
            where.append(f"key '{key}'")
        if line is not None:
            where.append(f"line {line}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.message = message
        self.key = key
        self.line = line


@dataclass(frozen=True)
class RunConfig:
    apparatus: ApparatusConfig = field(default_factory=ApparatusConfig)
    output_dir: Path = Path(DEFAULT_OUTPUT_DIR)
    formats: Tuple[str, ...] = FORMATS
    profiles_requested: Tuple[str, ...] = PLANES

    def __post_init__(self):
        if not self.formats:
            raise ConfigError("at least one output format is required", key="formats")
        for f in self.formats:
            if f not in FORMATS:
                raise ConfigError(f"unknown format {f!r} (choose from {', '.join(FORMATS)})", key="formats")
        for p in self.profiles_requested:
            if p not in PLANES:
                raise ConfigError(f"unknown plane {p!r} (choose from {', '.join(PLANES)})", key="profiles")
        object.__setattr__(self, "output_dir", Path(self.output_dir))


def _length(raw, key, line):
    m = _LENGTH_RE.match(raw)
    if not m:
        raise ConfigError(f"expected a length in meters, got {raw!r}", key, line)
    number, unit = m.groups()
    if unit not in ("", "m"):
        raise ConfigError(f"lengths are given in meters; unit {unit!r} is not accepted", key, line)
    value = float(number)
    if not math.isfinite(value):
        raise ConfigError(f"length must be finite, got {raw!r}", key, line)
    return value


def _integer(raw, key, line):
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"expected an integer, got {raw!r}", key, line) from None
    if not value.is_integer():
        raise ConfigError(f"expected an integer, got {raw!r}", key, line)
    return int(value)


def _real(raw, key, line):
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"expected a number, got {raw!r}", key, line) from None
    if not math.isfinite(value):
        raise ConfigError(f"expected a finite number, got {raw!r}", key, line)
    return value


def _names(raw):
    return tuple(part.strip() for part in raw.split(",") if part.strip())


def parse_config(text: str) -> RunConfig:
    """Parse a configuration document; absent keys keep their defaults."""
    apparatus = {}
    run = {}
    gamma_abs, gamma_phase = 0.0, 0.0
    seen = {}

    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw_line.strip()!r}", line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError("unknown key", key, lineno)
        if key in seen:
            raise ConfigError(f"duplicate key (first set on line {seen[key]})", key, lineno)
        seen[key] = lineno
        if not value:
            raise ConfigError("missing value", key, lineno)

        if key in _LENGTH_KEYS:
            apparatus[key] = _length(value, key, lineno)
        elif key in _OPTIONAL_LENGTH_KEYS:
            apparatus[key] = None if value.lower() in ("auto", "none") else _length(value, key, lineno)
        elif key in _INT_KEYS:
            apparatus[key] = _integer(value, key, lineno)
        elif key == "gamma_abs":
            gamma_abs = _real(value, key, lineno)
            if not 0.0 <= gamma_abs <= 1.0:
                raise ConfigError(f"must lie in [0, 1], got {value}", key, lineno)
        elif key == "gamma_phase_rad":
            gamma_phase = _real(value, key, lineno)
        elif key == "output_dir":
            run["output_dir"] = Path(value)
        elif key == "formats":
            run["formats"] = _names(value)
        elif key == "profiles":
            run["profiles_requested"] = () if value.lower() == "none" else _names(value)

    apparatus["gamma"] = complex(gamma_abs * math.cos(gamma_phase), gamma_abs * math.sin(gamma_phase))
    try:
        config = ApparatusConfig(**apparatus)
    except ValueError as exc:
        key = next((k for k in seen if k in str(exc)), None)
        raise ConfigError(str(exc), key, seen.get(key)) from None
    try:
        return RunConfig(apparatus=config, **run)
    except ConfigError as exc:
        raise ConfigError(exc.message, exc.key, seen.get(exc.key)) from None


def load_config(source) -> RunConfig:
    """Read a configuration file; ``"default"`` or ``None`` gives the defaults."""
    if source is None or str(source) == "default":
        return parse_config("")
    path = Path(source)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
    return parse_config(text)

"""Writers for profiles, Afshar reports and gamma sweeps."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Sequence

import numpy as np

from . import __version__
from .experiment import AfsharReport, ApparatusConfig, SweepRow
from .quantum import IntensityProfile

__all__ = [
    "PROFILE_HEADER",
    "SWEEP_HEADER",
    "ReportDocument",
    "OutputError",
    "emit_profile",
    "emit_report",
    "emit_sweep",
    "read_profile_csv",
    "load_report",
    "profile_csv_text",
    "report_csv_text",
    "sweep_csv_text",
]

PROFILE_HEADER = ("x_m", "intensity")
SWEEP_HEADER = ("gamma_abs", "visibility", "distinguishability", "duality_sum")
REPORT_COLUMNS = (
    "scenario", "power_DA", "power_DB", "power_intercepted_by_wires",
    "power_total_at_image", "power_input", "wire_plane_visibility", "relative_loss",
)


class OutputError(OSError):
    pass


def _num(value):
    # repr of a Python float is the shortest string that round-trips exactly
    return repr(float(value))


def _write(path: Path, text: str) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def profile_csv_text(profile: IntensityProfile) -> str:
    buf = io.StringIO()
    buf.write(",".join(PROFILE_HEADER) + "\n")
    for x, v in zip(profile.positions, profile.values):
        buf.write(f"{x:.9e},{_num(v)}\n")
    return buf.getvalue()


def emit_profile(profile: IntensityProfile, plane: str, out_dir, fmt: str = "csv") -> Path:
    """Write ``profile_<plane>.<fmt>`` into ``out_dir`` and return its path.

    CSV positions are written as ``%.9e``; intensities in full precision.
    """
    out_dir = Path(out_dir)
    if fmt == "csv":
        return _write(out_dir / f"profile_{plane}.csv", profile_csv_text(profile))
    if fmt == "json":
        doc = {
            "plane": plane,
            "spacing_m": float(profile.spacing),
            "x_m": [float(x) for x in profile.positions],
            "intensity": [float(v) for v in profile.values],
        }
        return _write(out_dir / f"profile_{plane}.json", json.dumps(doc) + "\n")
    raise ValueError(f"unknown profile format {fmt!r}")


def read_profile_csv(path) -> IntensityProfile:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != PROFILE_HEADER:
        raise ValueError(f"{path}: expected header {','.join(PROFILE_HEADER)}")
    data = np.array([[float(a), float(b)] for a, b in rows[1:]]).reshape(-1, 2)
    return IntensityProfile(data[:, 0], data[:, 1])


def _config_echo(config: ApparatusConfig) -> Dict:
    echo = {}
    for key, value in config.as_dict().items():
        if key == "gamma":
            echo["gamma_abs"] = abs(value)
            echo["gamma_phase_rad"] = math.atan2(value.imag, value.real)
        elif isinstance(value, (int, np.integer)) and not isinstance(value, bool):
            echo[key] = int(value)
        elif value is None:
            echo[key] = None
        else:
            echo[key] = float(value)
    echo["resolved"] = {
        "dist_lens_to_image": config.image_distance,
        "wire_width": config.resolved_wire_width,
        "detector_halfwidth": config.resolved_detector_halfwidth,
        "magnification": config.magnification,
        "fringe_period": config.fringe_period,
    }
    return echo


@dataclass
class ReportDocument:
    """Serializable form of an :class:`AfsharReport`."""

    config: Dict
    scenarios: Dict[str, Dict[str, float]]
    duality: Dict[str, float]
    version: str
    timestamp: str

    @classmethod
    def from_report(cls, report: AfsharReport, timestamp=None):
        scenarios = {}
        for scenario, result in report.results.items():
            entry = {
                "which_slits": scenario.which_slits,
                "wires": "in" if scenario.wires else "out",
                "marker": "off" if scenario.marker is None else "gamma",
            }
            if scenario.marker is not None:
                entry["gamma_re"] = scenario.marker.real
                entry["gamma_im"] = scenario.marker.imag
            for col in REPORT_COLUMNS[1:-1]:
                entry[col] = float(getattr(result, col))
            entry["relative_loss"] = float(report.relative_loss[scenario])
            scenarios[scenario.key] = entry
        duality = {
            "visibility": report.duality.visibility,
            "distinguishability": report.duality.distinguishability,
            "duality_sum": report.duality.duality_sum,
        }
        if timestamp is None:
            timestamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
        return cls(_config_echo(report.config), scenarios, duality, __version__, timestamp)

    def to_dict(self):
        return {
            "tool": "fringeworks",
            "version": self.version,
            "timestamp": self.timestamp,
            "config": self.config,
            "scenarios": self.scenarios,
            "duality": self.duality,
        }

    @classmethod
    def from_dict(cls, doc):
        try:
            return cls(doc["config"], doc["scenarios"], doc["duality"], doc["version"], doc["timestamp"])
        except KeyError as exc:
            raise ValueError(f"report document lacks {exc.args[0]!r}") from None

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2) + "\n"


def report_csv_text(report: AfsharReport) -> str:
    buf = io.StringIO()
    buf.write(",".join(REPORT_COLUMNS) + "\n")
    for scenario, result in report.results.items():
        values = [getattr(result, col) for col in REPORT_COLUMNS[1:-1]]
        values.append(report.relative_loss[scenario])
        buf.write(f'"{scenario.key}",' + ",".join(_num(v) for v in values) + "\n")
    return buf.getvalue()


def emit_report(report: AfsharReport, out_dir, fmt: str = "json", timestamp=None) -> Path:
    out_dir = Path(out_dir)
    if fmt == "json":
        doc = ReportDocument.from_report(report, timestamp)
        return _write(out_dir / "report.json", doc.to_json())
    if fmt == "csv":
        return _write(out_dir / "report.csv", report_csv_text(report))
    raise ValueError(f"unknown report format {fmt!r}")


def load_report(path) -> ReportDocument:
    with open(path) as fh:
        return ReportDocument.from_dict(json.load(fh))


def sweep_csv_text(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    buf.write(",".join(SWEEP_HEADER) + "\n")
    for row in rows:
        buf.write(",".join(_num(getattr(row, col)) for col in SWEEP_HEADER) + "\n")
    return buf.getvalue()


def emit_sweep(rows: List[SweepRow], out_dir, fmt: str = "csv") -> Path:
    out_dir = Path(out_dir)
    if fmt == "csv":
        return _write(out_dir / "sweep.csv", sweep_csv_text(rows))
    if fmt == "json":
        doc = [{col: float(getattr(r, col)) for col in SWEEP_HEADER} for r in rows]
        return _write(out_dir / "sweep.json", json.dumps(doc, indent=2) + "\n")
    raise ValueError(f"unknown sweep format {fmt!r}")

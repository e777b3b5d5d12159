"""Afshar-type two-slit apparatus: slits, wire grid, lens, slit-image detectors.

Geometry (all SI units)::

    slits --z1--> wire plane --z2--> lens (f) --z3--> image plane (D_A, D_B)

Slit ``A`` sits at ``x = +d/2`` and slit ``B`` at ``x = -d/2``.  The lens
inverts, so the image of ``A`` (detector window ``D_A``) is centred at
``-m d/2`` with ``m = z3 / (z1 + z2)``.

With the marker switched on, each slit launches its own branch field and
the two branches are only combined, weighted by ``gamma``, when an
intensity is recorded.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .optics import (
    FieldGrid,
    LensSpec,
    MarkedFieldPair,
    SamplingError,
    apply_mask,
    apply_thin_lens,
    grid_positions,
    intensity,
    make_double_slit,
    make_slit,
    make_wire_grid,
    marked_intensity,
    plane_wave,
    propagate,
    total_power,
)
from .quantum import (
    DualityReport,
    IntensityProfile,
    MarkerOverlap,
    analytic_visibility,
    distinguishability,
    duality_report,
    visibility,
)

__all__ = [
    "ApparatusConfig",
    "Scenario",
    "ScenarioResult",
    "AfsharReport",
    "SweepRow",
    "PLANES",
    "SCENARIOS",
    "dark_fringe_positions",
    "detector_windows",
    "run_scenario",
    "run_afshar",
    "gamma_sweep",
    "wire_plane_branches",
    "fringe_visibility",
]

PLANES = ("slit", "wires", "lens", "image")


@dataclass(frozen=True)
class ApparatusConfig:
    """Full apparatus geometry.

    ``dist_lens_to_image``, ``wire_width`` and ``detector_halfwidth`` may be
    left as ``None``; they then resolve to the thin-lens image distance,
    one tenth of the fringe period and ``0.4 * m * d`` respectively.
    """

    wavelength: float = 650e-9
    slit_separation: float = 250e-6
    slit_width: float = 40e-6
    dist_slit_to_wires: float = 1.0
    dist_wires_to_lens: float = 0.1
    focal_length: float = 0.55
    dist_lens_to_image: Optional[float] = None
    wire_count: int = 6
    wire_width: Optional[float] = None
    detector_halfwidth: Optional[float] = None
    gamma: complex = 0j
    grid_n: int = 2**16
    grid_extent: float = 0.26
    lens_aperture: Optional[float] = None

    def __post_init__(self):
        lengths = [
            "wavelength", "slit_separation", "slit_width", "dist_slit_to_wires",
            "dist_wires_to_lens", "focal_length", "grid_extent",
        ]
        for name in lengths:
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive length, got {value!r}")
        for name in ("dist_lens_to_image", "wire_width", "detector_halfwidth", "lens_aperture"):
            value = getattr(self, name)
            if value is not None and not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive length, got {value!r}")
        if isinstance(self.wire_count, bool) or not isinstance(self.wire_count, (int, np.integer)) or self.wire_count < 0:
            raise ValueError(f"wire_count must be a nonnegative integer, got {self.wire_count!r}")
        n = self.grid_n
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 2 or n & (n - 1):
            raise ValueError(f"grid_n must be a power of two, got {n!r}")
        object.__setattr__(self, "gamma", MarkerOverlap(self.gamma).gamma)
        if self.dist_lens_to_image is None and self.object_distance <= self.focal_length:
            raise ValueError(
                "focal_length must be shorter than dist_slit_to_wires + dist_wires_to_lens "
                "for a real slit image"
            )
        if self.wire_count * self.resolved_wire_width >= self.grid_extent / 4:
            raise ValueError("wire_count * wire_width must stay below grid_extent / 4")

    @property
    def object_distance(self):
        return self.dist_slit_to_wires + self.dist_wires_to_lens

    @property
    def auto_image(self):
        return self.dist_lens_to_image is None

    @property
    def image_distance(self):
        if self.dist_lens_to_image is not None:
            return self.dist_lens_to_image
        return 1.0 / (1.0 / self.focal_length - 1.0 / self.object_distance)

    @property
    def magnification(self):
        return self.image_distance / self.object_distance

    @property
    def fringe_period(self):
        return self.wavelength * self.dist_slit_to_wires / self.slit_separation

    @property
    def resolved_wire_width(self):
        if self.wire_width is not None:
            return self.wire_width
        return self.fringe_period / 10.0

    @property
    def resolved_detector_halfwidth(self):
        if self.detector_halfwidth is not None:
            return self.detector_halfwidth
        return 0.4 * self.magnification * self.slit_separation

    @property
    def overlap(self):
        return MarkerOverlap(self.gamma)

    @property
    def spacing(self):
        return self.grid_extent / self.grid_n

    def positions(self):
        return grid_positions(self.grid_n, self.grid_extent)

    def imaging_error(self):
        """Relative mismatch in ``1/(z1+z2) + 1/z3 = 1/f``."""
        lhs = 1.0 / self.object_distance + 1.0 / self.image_distance
        rhs = 1.0 / self.focal_length
        return abs(lhs - rhs) / rhs

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class Scenario:
    """Which slits are open, whether wires are in, and the marker overlap.

    ``marker`` is ``None`` for an unmarked run, otherwise ``gamma``.
    """

    which_slits: str
    wires: bool
    marker: Optional[complex] = None

    def __post_init__(self):
        if self.which_slits not in ("A", "B", "both"):
            raise ValueError(f"which_slits must be 'A', 'B' or 'both', got {self.which_slits!r}")
        if self.marker is not None:
            if self.which_slits != "both":
                raise ValueError("a marker needs both slits open; a single path has no cross term")
            object.__setattr__(self, "marker", MarkerOverlap(self.marker).gamma)

    @property
    def key(self):
        marker = "off" if self.marker is None else "gamma"
        return f"slits={self.which_slits},wires={'in' if self.wires else 'out'},marker={marker}"

    def counterpart(self):
        """Same scenario with the wires toggled."""
        return replace(self, wires=not self.wires)


@dataclass(frozen=True)
class ScenarioResult:
    power_DA: float
    power_DB: float
    power_intercepted_by_wires: float
    power_total_at_image: float
    wire_plane_visibility: float
    power_input: float
    profiles: Dict[str, IntensityProfile] = field(default_factory=dict, repr=False, compare=False)

    @property
    def power_detected(self):
        return self.power_DA + self.power_DB


@dataclass(frozen=True)
class AfsharReport:
    config: ApparatusConfig
    results: Dict[Scenario, ScenarioResult]
    relative_loss: Dict[Scenario, float]
    duality: DualityReport

    def by_key(self, key):
        for scenario, result in self.results.items():
            if scenario.key == key:
                return result
        raise KeyError(key)

    def loss_by_key(self, key):
        for scenario, loss in self.relative_loss.items():
            if scenario.key == key:
                return loss
        raise KeyError(key)


@dataclass(frozen=True)
class SweepRow:
    gamma_abs: float
    visibility: float
    distinguishability: float
    duality_sum: float


def _scenarios(gamma):
    out = []
    for slits, marker in (("A", None), ("B", None), ("both", None), ("both", gamma)):
        for wires in (True, False):
            out.append(Scenario(slits, wires, marker))
    return out


SCENARIOS = tuple(_scenarios(0j))


# --- field construction --------------------------------------------------


def _slit_field(config: ApparatusConfig, which: str) -> FieldGrid:
    n, L, lam = config.grid_n, config.grid_extent, config.wavelength
    d, w = config.slit_separation, config.slit_width
    if which == "both":
        mask = make_double_slit(n, L, lam, d, w)
    else:
        # same resolution guard as the double slit
        make_double_slit(n, L, lam, d, w)
        mask = make_slit(n, L, d / 2 if which == "A" else -d / 2, w)
    return apply_mask(plane_wave(n, L, lam), mask)


def _propagate(field_, distance, plane):
    try:
        return propagate(field_, distance)
    except SamplingError as exc:
        raise SamplingError(f"{plane}: {exc}") from exc


@lru_cache(maxsize=16)
def wire_plane_branches(config: ApparatusConfig) -> Tuple[FieldGrid, FieldGrid]:
    """Single-slit fields (A, B) at the wire plane."""
    return tuple(
        _propagate(_slit_field(config, s), config.dist_slit_to_wires, "slits -> wires")
        for s in ("A", "B")
    )


@lru_cache(maxsize=16)
def _coherent_wire_plane(config: ApparatusConfig) -> FieldGrid:
    return _propagate(_slit_field(config, "both"), config.dist_slit_to_wires, "slits -> wires")


def _combine(fields_, gamma):
    if len(fields_) == 1:
        return intensity(fields_[0])
    return marked_intensity(MarkedFieldPair(fields_[0], fields_[1], MarkerOverlap(gamma)))


def _visibility_window(config, profile):
    half = 1.5 * config.fringe_period
    keep = np.abs(profile.positions) <= half
    if np.count_nonzero(keep) < 3:
        raise SamplingError("fewer than three samples inside the central three fringes")
    return keep


def fringe_visibility(config: ApparatusConfig, profile: IntensityProfile, reference: IntensityProfile) -> float:
    """Visibility of ``profile / reference`` over the central three periods.

    ``reference`` is the incoherent single-slit sum, so the slowly varying
    diffraction envelope is divided out before taking max and min.
    """
    keep = _visibility_window(config, profile)
    ref = reference.values[keep]
    if np.any(ref <= 0):
        raise ValueError("reference intensity vanishes inside the visibility window")
    return visibility(profile.values[keep] / ref)


# --- public operations ---------------------------------------------------


def dark_fringe_positions(config: ApparatusConfig, count: int) -> List[float]:
    """Positions of the ``count`` dark fringes nearest the axis.

    Minima of the coherent two-slit wire-plane intensity are located on the
    grid, kept only inside the central diffraction lobe, paired
    symmetrically about ``x = 0`` and refined with a parabola through the
    three samples around each one.
    """
    if count < 0:
        raise ValueError("count must be nonnegative")
    if count == 0:
        return []
    return list(_dark_fringes(config, count))


@lru_cache(maxsize=32)
def _dark_fringes(config, count):
    u = _coherent_wire_plane(config)
    values = np.abs(u.samples) ** 2
    x = u.positions
    dx = u.spacing
    lobe = config.wavelength * config.dist_slit_to_wires / config.slit_width
    interior = np.arange(1, values.size - 1)
    is_min = (values[1:-1] < values[:-2]) & (values[1:-1] <= values[2:])
    idx = interior[is_min & (np.abs(x[1:-1]) < lobe)]

    refined = []
    for i in idx:
        y0, y1, y2 = values[i - 1], values[i], values[i + 1]
        curvature = y0 - 2.0 * y1 + y2
        shift = 0.5 * (y0 - y2) / curvature if curvature > 0 else 0.0
        refined.append(x[i] + shift * dx)
    refined = np.array(refined)

    right = np.sort(refined[refined > 0])
    left = np.sort(-refined[refined < 0])
    pairs = min(right.size, left.size)
    need = (count + 1) // 2
    if pairs < need or (count % 2 and refined.size < count):
        raise ValueError(
            f"only {refined.size} dark fringes resolvable inside the central lobe, {count} requested"
        )
    if count % 2 == 0:
        picked = np.concatenate([-left[:need], right[:need]])
    else:
        picked = refined[np.argsort(np.abs(refined))[:count]]
    return tuple(float(v) for v in np.sort(picked))


def detector_windows(config: ApparatusConfig):
    """Return ``((lo_A, hi_A), (lo_B, hi_B))`` in image-plane coordinates."""
    if config.imaging_error() > 1e-6:
        raise ValueError(
            f"apparatus does not image the slits (thin-lens mismatch {config.imaging_error():.3g})"
        )
    m = config.magnification
    hw = config.resolved_detector_halfwidth
    if m * config.slit_separation <= 2 * hw:
        raise ValueError("detector windows overlap; reduce detector_halfwidth")
    center_a = -m * config.slit_separation / 2
    center_b = +m * config.slit_separation / 2
    return (center_a - hw, center_a + hw), (center_b - hw, center_b + hw)


def _wire_mask(config):
    centers = dark_fringe_positions(config, config.wire_count)
    return make_wire_grid(config.grid_n, config.grid_extent, centers, config.resolved_wire_width)


def run_scenario(config: ApparatusConfig, scenario: Scenario) -> ScenarioResult:
    """Propagate one scenario through the apparatus and read the detectors."""
    window_a, window_b = detector_windows(config)
    lens = LensSpec(config.focal_length, config.lens_aperture)
    gamma = 1.0 if scenario.marker is None else scenario.marker

    if scenario.which_slits == "both" and scenario.marker is not None:
        fields_ = list(wire_plane_branches(config))
        slit_fields = [_slit_field(config, "A"), _slit_field(config, "B")]
    elif scenario.which_slits == "both":
        fields_ = [_coherent_wire_plane(config)]
        slit_fields = [_slit_field(config, "both")]
    else:
        k = 0 if scenario.which_slits == "A" else 1
        fields_ = [wire_plane_branches(config)[k]]
        slit_fields = [_slit_field(config, scenario.which_slits)]

    profiles = {"slit": _combine(slit_fields, gamma)}
    at_wires = _combine(fields_, gamma)
    profiles["wires"] = at_wires

    branches = wire_plane_branches(config)
    if scenario.which_slits == "both":
        reference = _combine(branches, 0.0)
    else:
        reference = intensity(branches[0 if scenario.which_slits == "A" else 1])
    vis = fringe_visibility(config, at_wires, reference)

    intercepted = 0.0
    if scenario.wires:
        mask = _wire_mask(config)
        fields_ = [apply_mask(f, mask) for f in fields_]
        intercepted = max(total_power(at_wires) - total_power(_combine(fields_, gamma)), 0.0)

    fields_ = [_propagate(f, config.dist_wires_to_lens, "wires -> lens") for f in fields_]
    profiles["lens"] = _combine(fields_, gamma)
    fields_ = [apply_thin_lens(f, lens) for f in fields_]
    fields_ = [_propagate(f, config.image_distance, "lens -> image") for f in fields_]
    image = _combine(fields_, gamma)
    profiles["image"] = image

    dx = config.spacing
    x = image.positions

    def window_power(win):
        lo, hi = win
        return float(np.sum(image.values[(x >= lo) & (x <= hi)]) * dx)

    return ScenarioResult(
        power_DA=window_power(window_a),
        power_DB=window_power(window_b),
        power_intercepted_by_wires=float(intercepted),
        power_total_at_image=total_power(image),
        wire_plane_visibility=float(vis),
        power_input=total_power(profiles["slit"]),
        profiles=profiles,
    )


def _thread_count():
    raw = os.environ.get("FRINGEWORKS_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ValueError(f"FRINGEWORKS_THREADS must be an integer, got {raw!r}") from None
    return min(8, os.cpu_count() or 1)


def run_afshar(config: ApparatusConfig) -> AfsharReport:
    """All eight scenarios: {A, B, both, both+marker} x {wires in, out}."""
    scenarios = _scenarios(config.gamma)
    # warm the shared caches before fanning out
    wire_plane_branches(config)
    _coherent_wire_plane(config)
    if config.wire_count:
        dark_fringe_positions(config, config.wire_count)

    with ThreadPoolExecutor(max_workers=_thread_count()) as pool:
        outcomes = list(pool.map(lambda s: run_scenario(config, s), scenarios))
    results = dict(zip(scenarios, outcomes))

    losses = {}
    for scenario, result in results.items():
        if not scenario.wires:
            losses[scenario] = 0.0
            continue
        reference = results[scenario.counterpart()].power_detected
        loss = 1.0 - result.power_detected / reference if reference > 0 else 0.0
        losses[scenario] = min(max(loss, 0.0), 1.0)

    v = analytic_visibility(1.0, 1.0, config.gamma)
    duality = duality_report(v, distinguishability(config.gamma))
    return AfsharReport(config, results, losses, duality)


def gamma_sweep(config: ApparatusConfig, gammas: Sequence[float]) -> List[SweepRow]:
    """Wire-plane visibility against marker overlap ``|gamma|``.

    The two branch fields are propagated once; each ``gamma`` only changes
    how they are combined.
    """
    gammas = [float(g) for g in gammas]
    for g in gammas:
        if not (0.0 <= g <= 1.0):
            raise ValueError(f"|gamma| values must lie in [0, 1], got {g!r}")
    u, l = wire_plane_branches(config)
    reference = _combine((u, l), 0.0)
    rows = []
    for g in gammas:
        profile = _combine((u, l), g)
        v = fringe_visibility(config, profile, reference)
        d = distinguishability(g)
        rows.append(SweepRow(g, v, d, v * v + d * d))
    return rows


"""1-D scalar diffraction on periodic sample grids.

Fields live on ``N`` samples spanning a transverse width ``L`` centred on the
optical axis, ``x_i = (i - N/2) * L/N``.  Free-space propagation uses the
band-limited angular spectrum method: the field is decomposed into plane
waves with the FFT, each plane wave picks up ``exp(i z sqrt(k^2 - k_x^2))``,
and the result is transformed back.

Sampling the transfer function in frequency is only adequate while its
local chirp stays below the frequency-domain Nyquist limit.  That gives the
band limit

    f_limit(z) = 1 / (lambda * sqrt((2 z / L)^2 + 1))

beyond which the transfer function aliases.  ``propagate`` refuses distances
where ``f_limit`` falls inside the grid's propagating band unless asked to
truncate, so within the safe range the step is exactly unitary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .quantum import IntensityProfile, MarkerOverlap, as_overlap

__all__ = [
    "SamplingError",
    "FieldGrid",
    "TransmissionMask",
    "LensSpec",
    "MarkedFieldPair",
    "grid_positions",
    "max_safe_distance",
    "band_limit",
    "make_double_slit",
    "make_slit",
    "make_wire_grid",
    "make_aperture",
    "apply_mask",
    "propagate",
    "apply_thin_lens",
    "intensity",
    "marked_intensity",
    "total_power",
    "plane_wave",
    "gaussian_beam",
]


class SamplingError(ValueError):
    """Grid too coarse or too small for the requested geometry."""


def _is_power_of_two(n):
    return n >= 2 and (n & (n - 1)) == 0


def grid_positions(n, extent):
    """Sample coordinates ``(i - n/2) * extent/n`` for ``i = 0..n-1``."""
    return (np.arange(n) - n // 2) * (extent / n)


def _check_geometry(n, extent):
    if not isinstance(n, (int, np.integer)) or not _is_power_of_two(int(n)):
        raise ValueError(f"grid size must be a power of two >= 2, got {n!r}")
    if not (math.isfinite(extent) and extent > 0):
        raise ValueError(f"extent must be positive, got {extent!r}")


@dataclass(frozen=True)
class FieldGrid:
    """Complex scalar field sampled across a transverse window.

    Parameters
    ----------
    samples : array_like of complex
        ``N`` field samples, ``N`` a power of two.
    extent : float
        Window width ``L`` in meters.
    wavelength : float
        Vacuum wavelength in meters.
    """

    samples: np.ndarray
    extent: float
    wavelength: float

    def __post_init__(self):
        s = np.array(self.samples, dtype=complex)
        if s.ndim != 1:
            raise ValueError("field samples must be one-dimensional")
        _check_geometry(s.size, self.extent)
        if not (math.isfinite(self.wavelength) and self.wavelength > 0):
            raise ValueError(f"wavelength must be positive, got {self.wavelength!r}")
        if not np.all(np.isfinite(s)):
            raise ValueError("field samples must be finite")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "extent", float(self.extent))
        object.__setattr__(self, "wavelength", float(self.wavelength))

    @property
    def n(self):
        return self.samples.size

    @property
    def spacing(self):
        return self.extent / self.n

    @property
    def positions(self):
        return grid_positions(self.n, self.extent)

    @property
    def wavenumber(self):
        return 2.0 * math.pi / self.wavelength

    def replace(self, samples):
        return FieldGrid(samples, self.extent, self.wavelength)

    def same_geometry(self, other):
        return (
            self.n == other.n
            and math.isclose(self.extent, other.extent, rel_tol=1e-12)
            and math.isclose(self.wavelength, other.wavelength, rel_tol=1e-12)
        )

    def __add__(self, other):
        if not isinstance(other, FieldGrid):
            return NotImplemented
        if not self.same_geometry(other):
            raise ValueError("cannot add fields on different grids")
        return self.replace(self.samples + other.samples)

    def __mul__(self, scalar):
        return self.replace(self.samples * complex(scalar))

    __rmul__ = __mul__


@dataclass(frozen=True)
class TransmissionMask:
    """Real amplitude transmission in ``[0, 1]`` on an ``N``-sample window."""

    samples: np.ndarray
    extent: float

    def __post_init__(self):
        t = np.array(self.samples, dtype=float)
        if t.ndim != 1:
            raise ValueError("mask samples must be one-dimensional")
        _check_geometry(t.size, self.extent)
        if np.any(~np.isfinite(t)) or np.any(t < 0) or np.any(t > 1):
            raise ValueError("mask transmissions must lie in [0, 1]")
        t.setflags(write=False)
        object.__setattr__(self, "samples", t)
        object.__setattr__(self, "extent", float(self.extent))

    @property
    def n(self):
        return self.samples.size

    @property
    def spacing(self):
        return self.extent / self.n

    @property
    def positions(self):
        return grid_positions(self.n, self.extent)

    def open_fraction(self):
        return float(np.mean(self.samples))

    def __mul__(self, other):
        if not isinstance(other, TransmissionMask):
            return NotImplemented
        _require_match(self, other)
        return TransmissionMask(self.samples * other.samples, self.extent)


@dataclass(frozen=True)
class LensSpec:
    """Ideal thin lens; ``aperture`` (meters) optionally clips its clear width."""

    focal_length: float
    aperture: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.focal_length) and self.focal_length > 0):
            raise ValueError(f"focal length must be positive and finite, got {self.focal_length!r}")
        if self.aperture is not None and not self.aperture > 0:
            raise ValueError(f"lens aperture must be positive, got {self.aperture!r}")


@dataclass(frozen=True)
class MarkedFieldPair:
    """Two marker-tagged branches of one particle's field."""

    psi_u: FieldGrid
    psi_l: FieldGrid
    overlap: MarkerOverlap

    def __post_init__(self):
        if not self.psi_u.same_geometry(self.psi_l):
            raise ValueError("marked branches must share N, extent and wavelength")
        object.__setattr__(self, "overlap", as_overlap(self.overlap))


def _require_match(a, b):
    if a.n != b.n or not math.isclose(a.extent, b.extent, rel_tol=1e-12):
        raise ValueError(
            f"grid mismatch: N={a.n}, L={a.extent!r} vs N={b.n}, L={b.extent!r}"
        )


def _interval(x, center, width):
    half = 0.5 * width
    return (x >= center - half) & (x <= center + half)


def make_slit(n, extent, center, width):
    """Single open interval of ``width`` centred at ``center``."""
    _check_geometry(n, extent)
    x = grid_positions(n, extent)
    return TransmissionMask(_interval(x, center, width).astype(float), extent)


def make_double_slit(n, extent, wavelength, separation, slit_width):
    """Two slits of ``slit_width`` centred at ``+-separation/2``.

    ``wavelength`` is accepted for signature symmetry with the field
    constructors; a binary mask does not depend on it.
    """
    _check_geometry(n, extent)
    if not (wavelength > 0):
        raise ValueError("wavelength must be positive")
    if separation < 0 or slit_width <= 0:
        raise ValueError("separation must be >= 0 and slit width > 0")
    if separation + slit_width >= extent:
        raise ValueError("slits do not fit inside the grid extent")
    spacing = extent / n
    if slit_width < 4 * spacing:
        need = 1 << math.ceil(math.log2(4 * extent / slit_width))
        raise SamplingError(
            f"slit width {slit_width:g} m spans fewer than 4 samples; "
            f"use N >= {need} for extent {extent:g} m"
        )
    x = grid_positions(n, extent)
    open_ = _interval(x, separation / 2, slit_width) | _interval(x, -separation / 2, slit_width)
    return TransmissionMask(open_.astype(float), extent)


def make_wire_grid(n, extent, wire_centers: Sequence[float], wire_width):
    """Opaque wires of ``wire_width`` at ``wire_centers``; clear elsewhere."""
    _check_geometry(n, extent)
    spacing = extent / n
    centers = sorted(float(c) for c in wire_centers)
    if centers and wire_width < 2 * spacing:
        raise SamplingError(
            f"wire width {wire_width:g} m is below two samples ({2 * spacing:g} m)"
        )
    half = extent / 2
    for c in centers:
        if c - wire_width / 2 < -half or c + wire_width / 2 > half:
            raise ValueError(f"wire at {c:g} m extends outside the grid")
    for left, right in zip(centers, centers[1:]):
        if right - left < wire_width:
            raise ValueError(f"wires at {left:g} m and {right:g} m overlap")
    x = grid_positions(n, extent)
    t = np.ones(n)
    for c in centers:
        t[_interval(x, c, wire_width)] = 0.0
    return TransmissionMask(t, extent)


def make_aperture(n, extent, width, center=0.0):
    """Clear aperture for the lens plane; same as a single slit."""
    return make_slit(n, extent, center, width)


def apply_mask(field: FieldGrid, mask: TransmissionMask) -> FieldGrid:
    _require_match(field, mask)
    return field.replace(field.samples * mask.samples)


def band_limit(n, extent, wavelength, distance):
    """Highest spatial frequency (1/m) whose transfer phase is sampled
    without aliasing over ``distance``."""
    df = 1.0 / extent
    return 1.0 / (wavelength * math.sqrt((2.0 * df * distance) ** 2 + 1.0))


def max_safe_distance(n, extent, wavelength):
    """Largest propagation distance whose band limit still covers every
    frequency on the grid.  Zero for sub-half-wavelength sampling."""
    dx = extent / n
    ratio = 2.0 * dx / wavelength
    if ratio <= 1.0:
        return 0.0
    return 0.5 * extent * math.sqrt(ratio * ratio - 1.0)


def _transfer_function(n, extent, wavelength, distance, truncate):
    fx = np.fft.fftfreq(n, d=extent / n)
    k = 2.0 * math.pi / wavelength
    arg = 1.0 - (wavelength * fx) ** 2
    propagating = arg > 0
    kz = k * np.sqrt(np.where(propagating, arg, 0.0))
    h = np.where(propagating, np.exp(1j * kz * distance), 0.0)
    if truncate:
        h = np.where(np.abs(fx) <= band_limit(n, extent, wavelength, distance), h, 0.0)
    return h


def propagate(field: FieldGrid, distance: float, truncate: bool = False) -> FieldGrid:
    """Advance ``field`` by ``distance`` meters of free space.

    Parameters
    ----------
    field : FieldGrid
    distance : float
        Nonnegative propagation distance in meters.
    truncate : bool
        By default distances beyond :func:`max_safe_distance` raise
        :class:`SamplingError`.  With ``truncate=True`` the transfer function
        is zeroed above the band limit instead, which drops power but never
        aliases.

    Notes
    -----
    Evanescent components are always removed.
    """
    if not (math.isfinite(distance) and distance >= 0):
        raise ValueError(f"distance must be finite and nonnegative, got {distance!r}")
    if distance == 0:
        return field
    if not truncate:
        z_max = max_safe_distance(field.n, field.extent, field.wavelength)
        if distance > z_max:
            raise SamplingError(
                f"propagation over {distance:g} m aliases on this grid "
                f"(N={field.n}, L={field.extent:g} m); maximum safe distance is {z_max:.6g} m"
            )
    h = _transfer_function(field.n, field.extent, field.wavelength, distance, truncate)
    # ifftshift puts x=0 at index 0 so the spectrum carries no linear phase.
    spectrum = np.fft.fft(np.fft.ifftshift(field.samples))
    out = np.fft.fftshift(np.fft.ifft(spectrum * h))
    return field.replace(out)


def apply_thin_lens(field: FieldGrid, lens: LensSpec) -> FieldGrid:
    x = field.positions
    phase = np.exp(-1j * field.wavenumber * x * x / (2.0 * lens.focal_length))
    if lens.aperture is not None:
        phase = phase * (np.abs(x) <= lens.aperture / 2)
    return field.replace(field.samples * phase)


def intensity(field: FieldGrid) -> IntensityProfile:
    return IntensityProfile(field.positions, np.abs(field.samples) ** 2)


def marked_intensity(pair: MarkedFieldPair) -> IntensityProfile:
    """Pointwise ``|u|^2 + |l|^2 + 2 Re(gamma conj(u) l)``."""
    u = pair.psi_u.samples
    l = pair.psi_l.samples
    gamma = pair.overlap.gamma
    values = np.abs(u) ** 2 + np.abs(l) ** 2 + 2.0 * np.real(gamma * np.conj(u) * l)
    return IntensityProfile(pair.psi_u.positions, np.maximum(values, 0.0))


def total_power(obj) -> float:
    """Discrete integral of intensity, ``sum(|u|^2) * dx``."""
    if isinstance(obj, FieldGrid):
        return float(np.sum(np.abs(obj.samples) ** 2) * obj.spacing)
    if isinstance(obj, IntensityProfile):
        return float(np.sum(obj.values) * obj.spacing)
    raise TypeError(f"cannot take the power of {type(obj).__name__}")


def plane_wave(n, extent, wavelength, amplitude=1.0):
    return FieldGrid(np.full(n, complex(amplitude)), extent, wavelength)


def gaussian_beam(n, extent, wavelength, waist, center=0.0):
    """Gaussian with 1/e^2 intensity radius ``waist`` and a flat phase."""
    x = grid_positions(n, extent)
    return FieldGrid(np.exp(-((x - center) / waist) ** 2), extent, wavelength)


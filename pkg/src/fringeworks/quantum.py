"""Two-path amplitude algebra with which-way marker states.

A particle reaching screen position ``x`` carries amplitude ``a`` from the
upper slit and ``b`` from the lower slit.  Each path may leave a marker
(an internal "vibrational" state of the detector) in ``|v_U>`` or ``|v_L>``.
The only quantity of the markers that survives into detection probabilities
is their overlap ``gamma = <v_U|v_L>``:

    P(x) = |a|^2 + |b|^2 + 2 Re(gamma * conj(a) * b)

The spatial detector state ``<phi_x|phi_x>`` is taken as 1 throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "NORM_TOLERANCE",
    "MarkerState",
    "MarkerOverlap",
    "SlitAmplitudePair",
    "IntensityProfile",
    "DualityReport",
    "marker_overlap",
    "intensity_no_marker",
    "intensity_with_marker",
    "visibility",
    "analytic_visibility",
    "distinguishability",
    "duality_report",
]

NORM_TOLERANCE = 1e-9
_OVERLAP_SLACK = 1e-12


def _check_amplitude(value, name):
    value = complex(value)
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class MarkerState:
    """Normalized marker state in a finite orthonormal basis.

    Inputs whose norm is within ``NORM_TOLERANCE`` of 1 are renormalized;
    anything further off is rejected.
    """

    components: np.ndarray

    def __post_init__(self):
        comps = np.atleast_1d(np.asarray(self.components, dtype=complex)).copy()
        if comps.ndim != 1 or comps.size < 1:
            raise ValueError("marker state needs at least one component")
        if not np.all(np.isfinite(comps)):
            raise ValueError("marker state components must be finite")
        norm = np.linalg.norm(comps)
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise ValueError(f"marker state is not normalized (norm = {norm:.12g})")
        comps = comps / norm
        comps.setflags(write=False)
        object.__setattr__(self, "components", comps)

    def __len__(self):
        return self.components.size


@dataclass(frozen=True)
class MarkerOverlap:
    """Overlap ``gamma = <v_U|v_L>`` of the two marker states."""

    gamma: complex

    def __post_init__(self):
        g = _check_amplitude(self.gamma, "gamma")
        if abs(g) > 1.0 + _OVERLAP_SLACK:
            raise ValueError(f"|gamma| must not exceed 1, got {abs(g):.15g}")
        object.__setattr__(self, "gamma", g)

    @classmethod
    def from_polar(cls, modulus, phase=0.0):
        return cls(complex(modulus * np.exp(1j * phase)))

    @property
    def modulus(self):
        return abs(self.gamma)

    @property
    def phase(self):
        return math.atan2(self.gamma.imag, self.gamma.real)


GammaLike = Union[MarkerOverlap, complex, float]


def as_overlap(overlap: GammaLike) -> MarkerOverlap:
    """Coerce a bare number to :class:`MarkerOverlap`."""
    if isinstance(overlap, MarkerOverlap):
        return overlap
    return MarkerOverlap(overlap)


@dataclass(frozen=True)
class SlitAmplitudePair:
    """Amplitudes from the two slits at one screen position ``x`` (meters)."""

    a: complex
    b: complex
    x: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "a", _check_amplitude(self.a, "a"))
        object.__setattr__(self, "b", _check_amplitude(self.b, "b"))
        if not math.isfinite(self.x):
            raise ValueError("x must be finite")


@dataclass(frozen=True)
class IntensityProfile:
    """Sampled intensity on a uniform grid of positions.

    Parameters
    ----------
    positions : array_like
        Strictly increasing, uniformly spaced coordinates in meters.
    values : array_like
        Nonnegative intensities, same length as ``positions``.
    """

    positions: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float)
        val = np.array(self.values, dtype=float)
        if pos.ndim != 1 or pos.shape != val.shape or pos.size < 1:
            raise ValueError("positions and values must be 1-D arrays of equal nonzero length")
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(val))):
            raise ValueError("profile contains non-finite entries")
        if np.any(val < 0):
            raise ValueError("intensity values must be nonnegative")
        if pos.size > 1:
            steps = np.diff(pos)
            if np.any(steps <= 0):
                raise ValueError("positions must be strictly increasing")
            span = pos[-1] - pos[0]
            # 9-significant-digit text positions carry ~5e-10 relative error
            scale = max(span, float(np.max(np.abs(pos))))
            if np.max(np.abs(steps - span / (pos.size - 1))) > 2e-9 * scale:
                raise ValueError("positions must be uniformly spaced")
        pos.setflags(write=False)
        val.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "values", val)

    @property
    def spacing(self):
        if self.positions.size < 2:
            return 0.0
        return (self.positions[-1] - self.positions[0]) / (self.positions.size - 1)

    def __len__(self):
        return self.values.size

    def window(self, lo, hi):
        """Sub-profile with ``lo <= x <= hi``."""
        keep = (self.positions >= lo) & (self.positions <= hi)
        return IntensityProfile(self.positions[keep], self.values[keep])


@dataclass(frozen=True)
class DualityReport:
    visibility: float
    distinguishability: float
    duality_sum: float

    def __post_init__(self):
        if self.duality_sum > 1.0 + 1e-9:
            raise ValueError(f"V^2 + D^2 = {self.duality_sum!r} exceeds 1")


def marker_overlap(v_u, v_l) -> MarkerOverlap:
    """Return ``<v_u|v_l>`` for two marker states.

    Plain arrays are accepted and validated as :class:`MarkerState`.
    """
    v_u = v_u if isinstance(v_u, MarkerState) else MarkerState(v_u)
    v_l = v_l if isinstance(v_l, MarkerState) else MarkerState(v_l)
    if len(v_u) != len(v_l):
        raise ValueError(
            f"marker states have different dimensions ({len(v_u)} vs {len(v_l)})"
        )
    gamma = complex(np.vdot(v_u.components, v_l.components))
    # Cauchy-Schwarz holds exactly for normalized inputs; trim rounding.
    if abs(gamma) > 1.0:
        gamma /= abs(gamma)
    return MarkerOverlap(gamma)


def intensity_no_marker(pair: SlitAmplitudePair) -> float:
    a, b = pair.a, pair.b
    value = abs(a) ** 2 + abs(b) ** 2 + 2.0 * (a.conjugate() * b).real
    return max(value, 0.0)


def intensity_with_marker(pair: SlitAmplitudePair, overlap: GammaLike) -> float:
    """Detection probability density when the paths leave marker states.

    The cross term is weighted by ``gamma``; ``gamma = 0`` leaves the
    incoherent sum ``|a|^2 + |b|^2`` and ``gamma = 1`` recovers
    :func:`intensity_no_marker`.
    """
    gamma = as_overlap(overlap).gamma
    a, b = pair.a, pair.b
    value = abs(a) ** 2 + abs(b) ** 2 + 2.0 * (gamma * a.conjugate() * b).real
    # |cross| <= 2|a||b| <= |a|^2+|b|^2, so only rounding can go negative.
    return max(value, 0.0)


def visibility(profile) -> float:
    """Fringe visibility ``(Imax - Imin) / (Imax + Imin)``.

    Accepts an :class:`IntensityProfile` or any array of intensities.
    """
    values = profile.values if isinstance(profile, IntensityProfile) else np.asarray(profile, float)
    if values.size == 0:
        raise ValueError("visibility of an empty profile is undefined")
    hi = float(np.max(values))
    lo = float(np.min(values))
    if hi + lo <= 0:
        raise ValueError("visibility of an all-zero profile is undefined")
    return (hi - lo) / (hi + lo)


def analytic_visibility(mag_a: float, mag_b: float, overlap: GammaLike) -> float:
    if mag_a < 0 or mag_b < 0:
        raise ValueError("amplitude magnitudes must be nonnegative")
    denom = mag_a**2 + mag_b**2
    if denom == 0:
        raise ValueError("visibility is undefined when both arms vanish")
    return 2.0 * mag_a * mag_b * as_overlap(overlap).modulus / denom


def distinguishability(overlap: GammaLike) -> float:
    """Which-way distinguishability ``sqrt(1 - |gamma|^2)`` of pure markers."""
    g = min(as_overlap(overlap).modulus, 1.0)
    return math.sqrt(1.0 - g * g)


def duality_report(v: float, d: float) -> DualityReport:
    for name, value in (("visibility", v), ("distinguishability", d)):
        if not (0.0 <= value <= 1.0):
            raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
    return DualityReport(float(v), float(d), float(v * v + d * d))

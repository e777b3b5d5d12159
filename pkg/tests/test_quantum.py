import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fringeworks.quantum import (
    IntensityProfile,
    MarkerOverlap,
    MarkerState,
    SlitAmplitudePair,
    analytic_visibility,
    distinguishability,
    duality_report,
    intensity_no_marker,
    intensity_with_marker,
    marker_overlap,
    visibility,
)

R2 = 1 / math.sqrt(2)

finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False, allow_infinity=False)
amplitudes = st.builds(complex, finite, finite)
unit_disc = st.builds(
    lambda r, phi: r * complex(math.cos(phi), math.sin(phi)),
    st.floats(0, 1), st.floats(0, 2 * math.pi),
)


@st.composite
def marker_states(draw, dim=2):
    parts = draw(st.lists(st.floats(-1, 1), min_size=2 * dim, max_size=2 * dim))
    v = np.array(parts[:dim]) + 1j * np.array(parts[dim:])
    n = np.linalg.norm(v)
    if n < 1e-3:
        v, n = np.eye(dim)[0].astype(complex), 1.0
    return v / n


# --- oracles --------------------------------------------------------------


def joint_state_probability(a, b, v_u, v_l, n_positions=3, at=1):
    """Born rule on the explicit particle (x) marker state of a detection.

    The particle register is one-hot over ``n_positions`` screen cells, the
    spatial detector state is one normalized dimension, and the marker is an
    explicit vector.  Probability = <psi| (|x><x| (x) 1) |psi>.
    """
    x = np.eye(n_positions)[at]
    phi = np.array([1.0])
    psi = a * np.kron(np.kron(x, phi), v_u) + b * np.kron(np.kron(x, phi), v_l)
    projector = np.kron(np.outer(x, x), np.eye(len(phi) * len(v_u)))
    return float(np.vdot(psi, projector @ psi).real)


def helstrom_success(v_u, v_l):
    """Optimal equal-prior discrimination probability of two pure states."""
    rho = np.outer(v_u, v_u.conj()) - np.outer(v_l, v_l.conj())
    trace_norm = np.sum(np.abs(np.linalg.eigvalsh(rho)))
    return 0.5 * (1 + 0.5 * trace_norm)


def phase_scan_visibility(mag_a, mag_b, gamma, steps=20001):
    phases = np.linspace(0, 2 * np.pi, steps)
    values = [
        intensity_with_marker(SlitAmplitudePair(mag_a, mag_b * np.exp(1j * p)), gamma)
        for p in phases
    ]
    return visibility(values)


# --- marker_overlap -------------------------------------------------------


class TestMarkerOverlap:
    def test_identical_states(self):
        assert marker_overlap([1, 0], [1, 0]).gamma == 1

    def test_orthogonal_states(self):
        assert marker_overlap([1, 0], [0, 1]).gamma == 0

    def test_partial_overlap(self):
        g = marker_overlap([1, 0], [R2, R2]).gamma
        assert g == pytest.approx(0.7071067812, abs=1e-10)

    def test_conjugates_first_argument(self):
        g = marker_overlap([1j, 0], [1, 0]).gamma
        assert g == pytest.approx(-1j)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension"):
            marker_overlap([1, 0], [1, 0, 0])

    def test_unnormalized_rejected(self):
        with pytest.raises(ValueError, match="normalized"):
            marker_overlap([1, 1], [1, 0])

    def test_rounding_is_renormalized(self):
        state = MarkerState([1 + 5e-10, 0])
        assert np.linalg.norm(state.components) == pytest.approx(1, abs=1e-15)

    def test_empty_state_rejected(self):
        with pytest.raises(ValueError):
            MarkerState([])

    def test_overlap_modulus_bound(self):
        with pytest.raises(ValueError):
            MarkerOverlap(1.01)

    @given(marker_states(), marker_states())
    def test_modulus_never_exceeds_one(self, u, v):
        assert abs(marker_overlap(u, v).gamma) <= 1 + 1e-12


# --- intensities ----------------------------------------------------------


class TestIntensityNoMarker:
    @pytest.mark.parametrize(
        "a, b, expected",
        [(R2, R2, 2.0), (R2, -R2, 0.0), (R2, 1j * R2, 1.0)],
    )
    def test_examples(self, a, b, expected):
        assert intensity_no_marker(SlitAmplitudePair(a, b)) == pytest.approx(expected, abs=1e-15)

    def test_non_finite_amplitude_rejected(self):
        with pytest.raises(ValueError):
            SlitAmplitudePair(float("nan"), 0)


class TestIntensityWithMarker:
    def test_orthogonal_markers_drop_interference(self):
        assert intensity_with_marker(SlitAmplitudePair(R2, R2), 0) == pytest.approx(1.0, abs=1e-15)

    def test_identical_markers(self):
        assert intensity_with_marker(SlitAmplitudePair(R2, R2), 1) == pytest.approx(2.0, abs=1e-15)

    def test_half_overlap_matches_joint_state(self):
        v_u = np.array([1.0, 0.0])
        v_l = np.array([0.5, math.sqrt(3) / 2])
        expected = joint_state_probability(R2, R2, v_u, v_l)
        assert expected == pytest.approx(1.5, abs=1e-12)
        got = intensity_with_marker(SlitAmplitudePair(R2, R2), marker_overlap(v_u, v_l))
        assert got == pytest.approx(expected, abs=1e-12)

    def test_complex_gamma_shifts_fringe(self):
        pair = SlitAmplitudePair(R2, R2)
        assert intensity_with_marker(pair, 1j) == pytest.approx(1.0, abs=1e-15)
        shifted = SlitAmplitudePair(R2, R2 * np.exp(-0.5j * np.pi))
        assert intensity_with_marker(shifted, 1j) == pytest.approx(2.0, abs=1e-15)

    @given(amplitudes, amplitudes, unit_disc)
    def test_nonnegative(self, a, b, g):
        assert intensity_with_marker(SlitAmplitudePair(a, b), g) >= 0

    @given(amplitudes, amplitudes)
    def test_reduces_to_coherent_case(self, a, b):
        pair = SlitAmplitudePair(a, b)
        scale = max(1.0, abs(a) ** 2 + abs(b) ** 2)
        assert abs(intensity_with_marker(pair, 1) - intensity_no_marker(pair)) <= 1e-12 * scale

    @given(amplitudes, amplitudes)
    def test_orthogonal_is_incoherent_sum(self, a, b):
        got = intensity_with_marker(SlitAmplitudePair(a, b), 0)
        assert abs(got - (abs(a) ** 2 + abs(b) ** 2)) <= 1e-12 * max(1.0, got)

    @settings(max_examples=200)
    @given(amplitudes, amplitudes, marker_states(), marker_states())
    def test_born_rule(self, a, b, v_u, v_l):
        born = joint_state_probability(a, b, v_u, v_l)
        model = intensity_with_marker(SlitAmplitudePair(a, b), marker_overlap(v_u, v_l))
        assert abs(born - model) <= 1e-10 * max(1.0, born)


# --- visibility and duality ----------------------------------------------


class TestVisibility:
    def test_constant(self):
        assert visibility([1, 1, 1]) == 0.0

    @pytest.mark.parametrize("depth", [1.0, 0.5])
    def test_cosine_modulation(self, depth):
        x = np.linspace(0, 4, 4001)
        profile = IntensityProfile(x, 1 + depth * np.cos(2 * np.pi * x))
        assert visibility(profile) == pytest.approx(depth, abs=1e-12)

    def test_all_zero_is_undefined(self):
        with pytest.raises(ValueError):
            visibility([0.0, 0.0])

    def test_profile_rejects_negative_values(self):
        with pytest.raises(ValueError):
            IntensityProfile([0, 1], [1, -1])

    def test_profile_rejects_uneven_positions(self):
        with pytest.raises(ValueError):
            IntensityProfile([0, 1, 3], [1, 1, 1])


class TestAnalyticVisibility:
    def test_equal_coherent_arms(self):
        assert analytic_visibility(1, 1, 1) == 1.0

    def test_equal_orthogonal_arms(self):
        assert analytic_visibility(1, 1, 0) == 0.0

    def test_unequal_arms_match_phase_scan(self):
        oracle = phase_scan_visibility(1.0, 0.5, 1.0)
        assert oracle == pytest.approx(0.8, abs=1e-6)
        assert analytic_visibility(1.0, 0.5, 1.0) == pytest.approx(oracle, abs=1e-6)

    def test_both_zero(self):
        with pytest.raises(ValueError):
            analytic_visibility(0, 0, 1)

    @settings(max_examples=40)
    @given(st.floats(0.01, 3), st.floats(0.01, 3), unit_disc)
    def test_sampled_profile_agrees(self, ma, mb, g):
        assert abs(phase_scan_visibility(ma, mb, g, 4001) - analytic_visibility(ma, mb, g)) <= 1e-6


class TestDistinguishability:
    def test_endpoints(self):
        assert distinguishability(0) == 1.0
        assert distinguishability(1) == 0.0

    def test_matches_helstrom_bound(self):
        v_u = np.array([1.0, 0.0])
        v_l = np.array([0.6, 0.8])
        assert abs(marker_overlap(v_u, v_l).gamma) == pytest.approx(0.6)
        oracle = 2 * helstrom_success(v_u, v_l) - 1
        assert oracle == pytest.approx(0.8, abs=1e-12)
        assert distinguishability(marker_overlap(v_u, v_l)) == pytest.approx(oracle, abs=1e-12)

    @given(marker_states(3), marker_states(3))
    def test_helstrom_general(self, u, v):
        oracle = 2 * helstrom_success(u, v) - 1
        # sqrt(1 - |g|^2) loses half the digits as |g| -> 1, on both sides
        assert distinguishability(marker_overlap(u, v)) == pytest.approx(oracle, abs=1e-7)

    @given(unit_disc)
    def test_saturation_for_equal_arms(self, g):
        assert abs(analytic_visibility(1, 1, g) ** 2 + distinguishability(g) ** 2 - 1) <= 1e-10

    @given(st.floats(0, 10), st.floats(0, 10), unit_disc)
    def test_bound(self, ma, mb, g):
        if ma * ma + mb * mb == 0:  # subnormal inputs underflow
            return
        assert analytic_visibility(ma, mb, g) ** 2 + distinguishability(g) ** 2 <= 1 + 1e-10


class TestDualityReport:
    @pytest.mark.parametrize("v, d", [(0, 1), (1, 0)])
    def test_extremes(self, v, d):
        assert duality_report(v, d).duality_sum == 1.0

    def test_from_analytic_values(self):
        g = 0.6
        rep = duality_report(analytic_visibility(1, 1, g), distinguishability(g))
        assert rep.visibility == pytest.approx(0.6)
        assert rep.distinguishability == pytest.approx(0.8)
        assert rep.duality_sum == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("v, d", [(-0.1, 0.5), (0.5, 1.2)])
    def test_out_of_range(self, v, d):
        with pytest.raises(ValueError):
            duality_report(v, d)

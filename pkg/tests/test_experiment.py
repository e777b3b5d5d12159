import math
from dataclasses import replace

import numpy as np
import pytest

from fringeworks import experiment as ex
from fringeworks.experiment import (
    SCENARIOS,
    ApparatusConfig,
    Scenario,
    dark_fringe_positions,
    detector_windows,
    gamma_sweep,
    run_afshar,
    run_scenario,
)
from fringeworks.optics import SamplingError

DEFAULT = ApparatusConfig()


@pytest.fixture(scope="module")
def report():
    return run_afshar(DEFAULT)


def two_source_minima(config, count):
    """Exact path-difference minima of two point sources at +-d/2."""
    lam, d, z = config.wavelength, config.slit_separation, config.dist_slit_to_wires
    out = []
    for m in range(count // 2):
        target = (m + 0.5) * lam
        lo, hi = 0.0, config.grid_extent / 2
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            diff = math.hypot(z, mid + d / 2) - math.hypot(z, mid - d / 2)
            lo, hi = (mid, hi) if diff < target else (lo, mid)
        out.append(0.5 * (lo + hi))
    return sorted([-x for x in out] + out)


def clear_caches():
    ex.wire_plane_branches.cache_clear()
    ex._coherent_wire_plane.cache_clear()
    ex._dark_fringes.cache_clear()


# --- configuration --------------------------------------------------------


class TestApparatusConfig:
    def test_defaults_image_at_unit_magnification(self):
        assert DEFAULT.image_distance == pytest.approx(1.1)
        assert DEFAULT.magnification == pytest.approx(1.0)
        assert DEFAULT.imaging_error() <= 1e-12

    def test_derived_defaults(self):
        assert DEFAULT.fringe_period == pytest.approx(2.6e-3)
        assert DEFAULT.resolved_wire_width == pytest.approx(2.6e-4)
        assert DEFAULT.resolved_detector_halfwidth == pytest.approx(1e-4)

    def test_2f_2f(self):
        cfg = replace(DEFAULT, dist_slit_to_wires=0.9, dist_wires_to_lens=0.2, focal_length=0.55)
        assert cfg.image_distance == pytest.approx(1.1)
        assert cfg.magnification == pytest.approx(1.0)

    @pytest.mark.parametrize(
        "changes",
        [
            {"wavelength": -1.0},
            {"slit_width": 0.0},
            {"wire_count": -1},
            {"wire_count": 2.5},
            {"grid_n": 1000},
            {"gamma": 1.5},
            {"focal_length": 2.0},
            {"wire_count": 300},
        ],
    )
    def test_rejects(self, changes):
        with pytest.raises(ValueError):
            ApparatusConfig(**changes)

    def test_hashable_for_caching(self):
        assert hash(DEFAULT) == hash(ApparatusConfig())


class TestScenario:
    def test_marker_on_single_slit_rejected(self):
        with pytest.raises(ValueError, match="both slits"):
            Scenario("A", True, 0.0)

    def test_bad_slits(self):
        with pytest.raises(ValueError):
            Scenario("C", True)

    def test_keys(self):
        assert Scenario("both", True, 0.3).key == "slits=both,wires=in,marker=gamma"
        assert Scenario("A", False).key == "slits=A,wires=out,marker=off"

    def test_counterpart(self):
        assert Scenario("B", True).counterpart() == Scenario("B", False)

    def test_eight_distinct(self):
        assert len({s.key for s in SCENARIOS}) == 8


# --- geometry helpers -----------------------------------------------------


class TestDarkFringes:
    def test_zero_count(self):
        assert dark_fringe_positions(DEFAULT, 0) == []

    def test_two_source_minima(self):
        cfg = replace(DEFAULT, slit_width=20e-6)
        got = dark_fringe_positions(cfg, 6)
        want = two_source_minima(cfg, 6)
        assert np.max(np.abs(np.subtract(got, want))) <= 1e-3 * cfg.fringe_period

    def test_symmetric_pairs(self):
        got = np.array(dark_fringe_positions(DEFAULT, 6))
        assert np.allclose(got, -got[::-1], atol=1e-9)

    def test_minima_are_dark(self):
        profile = run_scenario(DEFAULT, Scenario("both", False)).profiles["wires"]
        x, y = profile.positions, profile.values
        p = DEFAULT.fringe_period
        for x0 in dark_fringe_positions(DEFAULT, 6):
            near = np.abs(x - x0) <= p
            assert np.interp(x0, x, y) < 1e-3 * np.max(y[near])

    def test_too_many(self):
        with pytest.raises(ValueError, match="dark fringes"):
            dark_fringe_positions(DEFAULT, 60)

    def test_negative(self):
        with pytest.raises(ValueError):
            dark_fringe_positions(DEFAULT, -2)


class TestDetectorWindows:
    def test_unit_magnification(self):
        (a_lo, a_hi), (b_lo, b_hi) = detector_windows(DEFAULT)
        d = DEFAULT.slit_separation
        assert 0.5 * (a_lo + a_hi) == pytest.approx(-d / 2)
        assert 0.5 * (b_lo + b_hi) == pytest.approx(+d / 2)
        assert a_hi - a_lo == pytest.approx(2 * DEFAULT.resolved_detector_halfwidth)

    def test_overlap_rejected(self):
        with pytest.raises(ValueError, match="overlap"):
            detector_windows(replace(DEFAULT, detector_halfwidth=130e-6))

    def test_requires_imaging(self):
        with pytest.raises(ValueError, match="image"):
            detector_windows(replace(DEFAULT, dist_lens_to_image=1.0))


# --- scenarios ------------------------------------------------------------


class TestRunScenario:
    @pytest.mark.parametrize("slit", ["A", "B"])
    def test_single_slit_hits_own_detector(self, report, slit):
        r = report.by_key(f"slits={slit},wires=out,marker=off")
        own = r.power_DA if slit == "A" else r.power_DB
        assert own / r.power_detected >= 0.99

    def test_profiles_recorded(self, report):
        r = report.by_key("slits=both,wires=in,marker=off")
        assert set(r.profiles) == set(ex.PLANES)

    def test_detected_within_total(self, report):
        for r in report.results.values():
            assert r.power_detected <= r.power_total_at_image + 1e-9
            assert min(r.power_DA, r.power_DB, r.power_intercepted_by_wires) >= 0

    def test_sampling_error_names_plane(self):
        with pytest.raises(SamplingError, match="slits -> wires"):
            run_scenario(replace(DEFAULT, grid_extent=0.05), Scenario("A", False))


class TestRunAfshar:
    def test_eight_scenarios(self, report):
        assert sorted(s.key for s in report.results) == sorted(s.key for s in SCENARIOS)

    def test_coherent_loss_small(self, report):
        assert report.loss_by_key("slits=both,wires=in,marker=off") < 0.01

    def test_coherent_loss_well_below_single_slit(self, report):
        coherent = report.loss_by_key("slits=both,wires=in,marker=off")
        single = report.loss_by_key("slits=A,wires=in,marker=off")
        assert coherent < single / 10

    def test_visibility_endpoints(self, report):
        assert report.by_key("slits=both,wires=out,marker=gamma").wire_plane_visibility < 0.02
        assert report.by_key("slits=both,wires=out,marker=off").wire_plane_visibility > 0.98

    def test_losses_in_unit_interval(self, report):
        assert all(0.0 <= v <= 1.0 for v in report.relative_loss.values())

    def test_duality_block(self, report):
        assert report.duality.visibility == 0.0
        assert report.duality.distinguishability == 1.0

    def test_duality_follows_gamma(self):
        r = run_afshar(replace(DEFAULT, gamma=0.6))
        assert r.duality.visibility == pytest.approx(0.6)
        assert r.duality.distinguishability == pytest.approx(0.8)
        assert r.duality.duality_sum == pytest.approx(1.0)


@pytest.fixture(scope="module")
def rows():
    return gamma_sweep(DEFAULT, np.linspace(0, 1, 11))


class TestGammaSweep:
    def test_endpoints(self, rows):
        assert rows[0].visibility <= 0.02 and rows[0].distinguishability == 1.0
        assert rows[-1].visibility >= 0.98 and rows[-1].distinguishability == 0.0

    def test_bound(self, rows):
        assert all(r.duality_sum <= 1.02 for r in rows)

    def test_monotone(self, rows):
        v = [r.visibility for r in rows]
        assert all(b - a >= -1e-3 for a, b in zip(v, v[1:]))

    def test_order_preserved(self):
        rows = gamma_sweep(DEFAULT, [0.9, 0.1, 0.5])
        assert [r.gamma_abs for r in rows] == [0.9, 0.1, 0.5]

    @pytest.mark.parametrize("g", [-0.1, 1.1])
    def test_invalid_gamma(self, g):
        with pytest.raises(ValueError):
            gamma_sweep(DEFAULT, [g])


# --- invariants -----------------------------------------------------------


class TestInvariants:
    def test_power_accounting(self, report):
        for r in report.results.values():
            excess = r.power_intercepted_by_wires + r.power_total_at_image - r.power_input
            assert excess <= 1e-6 * r.power_input

    def test_swap_symmetry(self, report):
        a = report.by_key("slits=A,wires=out,marker=off")
        b = report.by_key("slits=B,wires=out,marker=off")
        assert abs(a.power_DA - b.power_DB) <= 1e-6 * a.power_DA

    def test_swap_symmetry_profiles(self, report):
        a = report.by_key("slits=A,wires=in,marker=off").profiles["image"].values
        b = report.by_key("slits=B,wires=in,marker=off").profiles["image"].values
        # mirror about index N/2: element i pairs with N - i
        assert np.max(np.abs(a[1:] - b[1:][::-1])) <= 1e-6 * np.max(a)

    def test_wires_out_no_loss(self, report):
        for s, loss in report.relative_loss.items():
            if not s.wires:
                assert loss <= 1e-9

    def test_code_paths_agree(self):
        coherent = run_scenario(DEFAULT, Scenario("both", False)).profiles["wires"].values
        marked = run_scenario(DEFAULT, Scenario("both", False, 1.0)).profiles["wires"].values
        assert np.max(np.abs(coherent - marked)) <= 1e-12 * np.max(coherent)

    def test_deterministic(self, report, monkeypatch):
        monkeypatch.setenv("FRINGEWORKS_THREADS", "1")
        clear_caches()
        again = run_afshar(DEFAULT)
        for s, r in report.results.items():
            other = again.results[s]
            assert (r.power_DA, r.power_DB, r.power_intercepted_by_wires) == (
                other.power_DA, other.power_DB, other.power_intercepted_by_wires,
            )
            assert np.array_equal(r.profiles["image"].values, other.profiles["image"].values)

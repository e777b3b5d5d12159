"""Invariant checks run by ``fringeworks selftest``.

Each check returns ``(passed, detail)``.  They use a fixed seed and the
default apparatus, so a run takes a few seconds.
"""

from __future__ import annotations

import math
import tempfile
from pathlib import Path

import numpy as np

from . import experiment as ex
from . import optics as op
from . import quantum as qc
from .config import parse_config
from .output import emit_profile, profile_csv_text, read_profile_csv

_SEED = 20091


def _rng():
    return np.random.default_rng(_SEED)


def _random_state(rng, dim=2):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def _random_pairs(rng, count):
    a = rng.normal(size=count) + 1j * rng.normal(size=count)
    b = rng.normal(size=count) + 1j * rng.normal(size=count)
    return a, b


# --- quantum core ---------------------------------------------------------


def check_nonnegative():
    rng = _rng()
    a, b = _random_pairs(rng, 2000)
    gammas = rng.uniform(0, 1, 2000) * np.exp(2j * np.pi * rng.uniform(size=2000))
    worst = min(
        qc.intensity_with_marker(qc.SlitAmplitudePair(x, y), g) for x, y, g in zip(a, b, gammas)
    )
    return worst >= 0, f"min intensity {worst:.3e}"


def check_coherent_reduction():
    a, b = _random_pairs(_rng(), 10_000)
    err = max(
        abs(qc.intensity_with_marker(qc.SlitAmplitudePair(x, y), 1.0)
            - qc.intensity_no_marker(qc.SlitAmplitudePair(x, y)))
        for x, y in zip(a, b)
    )
    return err <= 1e-12, f"max |I(gamma=1) - I_coherent| = {err:.2e}"


def check_incoherent_sum():
    a, b = _random_pairs(_rng(), 10_000)
    err = max(
        abs(qc.intensity_with_marker(qc.SlitAmplitudePair(x, y), 0.0) - (abs(x) ** 2 + abs(y) ** 2))
        for x, y in zip(a, b)
    )
    return err <= 1e-12, f"max |I(gamma=0) - (|a|^2+|b|^2)| = {err:.2e}"


def check_born_rule():
    rng = _rng()
    err = 0.0
    for _ in range(1000):
        a, b = rng.normal(size=2) @ [1, 1j], rng.normal(size=2) @ [1, 1j]
        vu, vl = _random_state(rng), _random_state(rng)
        joint = np.kron([1.0, 0.0], a * vu) + np.kron([1.0, 0.0], b * vl)
        born = float(np.vdot(joint, joint).real)
        model = qc.intensity_with_marker(qc.SlitAmplitudePair(a, b), qc.marker_overlap(vu, vl))
        err = max(err, abs(born - model))
    return err <= 1e-10, f"max Born-rule deviation {err:.2e}"


def check_duality_saturation():
    err = max(
        abs(qc.analytic_visibility(1.0, 1.0, g) ** 2 + qc.distinguishability(g) ** 2 - 1.0)
        for g in np.linspace(0, 1, 101)
    )
    return err <= 1e-10, f"max |V^2+D^2-1| = {err:.2e}"


def check_duality_bound():
    rng = _rng()
    worst = -1.0
    for ma, mb, g in zip(rng.uniform(0, 3, 2000), rng.uniform(0, 3, 2000), rng.uniform(0, 1, 2000)):
        worst = max(worst, qc.analytic_visibility(ma, mb, g) ** 2 + qc.distinguishability(g) ** 2)
    return worst <= 1 + 1e-10, f"max V^2+D^2 = {worst:.12f}"


def check_sampled_visibility():
    phases = np.linspace(0, 2 * np.pi, 4001)
    err = 0.0
    for ma, mb, g in [(1.0, 0.5, 1.0), (1.0, 1.0, 0.3), (0.2, 0.9, 0.7 * np.exp(1j))]:
        values = [
            qc.intensity_with_marker(qc.SlitAmplitudePair(ma, mb * np.exp(1j * p)), g) for p in phases
        ]
        err = max(err, abs(qc.visibility(values) - qc.analytic_visibility(ma, mb, g)))
    return err <= 1e-6, f"max |V_sampled - V_analytic| = {err:.2e}"


# --- wave optics ---------------------------------------------------------

_N, _L, _LAM = 4096, 16e-3, 650e-9


def _beam(center=0.0, waist=150e-6):
    return op.gaussian_beam(_N, _L, _LAM, waist, center)


def check_linearity():
    f, g = _beam(-4e-4), _beam(6e-4, 80e-6)
    alpha, beta = 0.7 - 0.2j, -1.3 + 0.4j
    lhs = op.propagate(alpha * f + beta * g, 0.02).samples
    rhs = (alpha * op.propagate(f, 0.02) + beta * op.propagate(g, 0.02)).samples
    err = np.max(np.abs(lhs - rhs)) / np.max(np.abs(rhs))
    return err <= 1e-10, f"linearity residual {err:.2e}"


def check_unitarity():
    f = _beam()
    p0 = op.total_power(f)
    drift = abs(op.total_power(op.propagate(f, 0.03)) - p0) / p0
    return drift <= 1e-9, f"relative power drift {drift:.2e}"


def check_composition():
    f = _beam(2e-4, 60e-6)
    a = op.propagate(op.propagate(f, 0.011), 0.017).samples
    b = op.propagate(f, 0.028).samples
    err = np.linalg.norm(a - b) / np.linalg.norm(b)
    return err <= 1e-9, f"composition residual {err:.2e}"


def check_quadrature_oracle():
    from scipy.special import hankel1

    config = ex.ApparatusConfig()
    n, L, lam, z = config.grid_n, config.grid_extent, config.wavelength, config.dist_slit_to_wires
    u0 = op.apply_mask(op.plane_wave(n, L, lam), op.make_double_slit(n, L, lam, config.slit_separation, config.slit_width))
    u1 = op.propagate(u0, z)
    x = u0.positions
    src = np.flatnonzero(u0.samples)
    tgt = np.abs(x) <= L / 4
    k = 2 * math.pi / lam
    r = np.hypot(z, x[tgt][:, None] - x[src][None, :])
    direct = (0.5j * k * z / r * hankel1(1, k * r) * u0.spacing) @ u0.samples[src]
    i_fft, i_dir = np.abs(u1.samples[tgt]) ** 2, np.abs(direct) ** 2
    err = np.linalg.norm(i_fft - i_dir) / np.linalg.norm(i_dir)
    return err <= 1e-4, f"relative L2 vs quadrature {err:.2e}"


def check_marked_incoherent():
    f, g = _beam(-3e-4), _beam(5e-4) * (0.3 + 0.8j)
    marked = op.marked_intensity(op.MarkedFieldPair(f, g, 0.0)).values
    ref = op.intensity(f).values + op.intensity(g).values
    err = np.max(np.abs(marked - ref))
    return err <= 1e-12, f"max pointwise deviation {err:.2e}"


# --- experiment ----------------------------------------------------------


def _report():
    return ex.run_afshar(ex.ApparatusConfig())


def check_power_accounting(report):
    worst = max(
        (r.power_intercepted_by_wires + r.power_total_at_image - r.power_input) / r.power_input
        for r in report.results.values()
    )
    return worst <= 1e-6, f"max relative excess {worst:.2e}"


def check_swap_symmetry(report):
    a = report.by_key("slits=A,wires=out,marker=off")
    b = report.by_key("slits=B,wires=out,marker=off")
    err = abs(a.power_DA - b.power_DB) / a.power_DA
    return err <= 1e-6, f"|P_DA(A) - P_DB(B)| / P_DA(A) = {err:.2e}"


def check_sweep_monotone():
    rows = ex.gamma_sweep(ex.ApparatusConfig(), np.linspace(0, 1, 21))
    v = [r.visibility for r in rows]
    worst = min(b - a for a, b in zip(v, v[1:]))
    return worst >= -1e-3, f"smallest step {worst:.2e}"


def check_wires_out_loss(report):
    worst = max(loss for s, loss in report.relative_loss.items() if not s.wires)
    return worst <= 1e-9, f"max wires-out loss {worst:.2e}"


def check_code_paths():
    config = ex.ApparatusConfig()
    coherent = ex.run_scenario(config, ex.Scenario("both", False)).profiles["wires"].values
    marked = ex.run_scenario(config, ex.Scenario("both", False, 1.0)).profiles["wires"].values
    err = np.max(np.abs(coherent - marked)) / np.max(coherent)
    return err <= 1e-12, f"coherent vs gamma=1 residual {err:.2e}"


# --- cli / io ------------------------------------------------------------


def check_csv_determinism():
    config = parse_config("").apparatus
    a = profile_csv_text(ex.run_scenario(config, ex.Scenario("both", True)).profiles["wires"])
    b = profile_csv_text(ex.run_scenario(config, ex.Scenario("both", True)).profiles["wires"])
    return a == b, "identical CSV bodies" if a == b else "CSV bodies differ"


def check_csv_roundtrip():
    profile = ex.run_scenario(ex.ApparatusConfig(), ex.Scenario("A", False)).profiles["image"]
    with tempfile.TemporaryDirectory() as tmp:
        back = read_profile_csv(emit_profile(profile, "image", Path(tmp)))
    scale = np.max(profile.values)
    err = np.max(np.abs(back.values - profile.values)) / scale
    return err <= 1e-12, f"max relative intensity error {err:.2e}"


def checks():
    """Yield ``(name, callable)`` for every invariant."""
    report_cache = {}

    def with_report(fn):
        def run():
            if "r" not in report_cache:
                report_cache["r"] = _report()
            return fn(report_cache["r"])
        return run

    return [
        ("quantum: intensity nonnegative", check_nonnegative),
        ("quantum: gamma=1 reduces to coherent", check_coherent_reduction),
        ("quantum: gamma=0 is incoherent sum", check_incoherent_sum),
        ("quantum: Born-rule joint state", check_born_rule),
        ("quantum: duality saturation", check_duality_saturation),
        ("quantum: duality bound", check_duality_bound),
        ("quantum: sampled vs analytic visibility", check_sampled_visibility),
        ("optics: propagation linearity", check_linearity),
        ("optics: unitarity", check_unitarity),
        ("optics: composition", check_composition),
        ("optics: quadrature oracle", check_quadrature_oracle),
        ("optics: marked gamma=0 sum", check_marked_incoherent),
        ("experiment: power accounting", with_report(check_power_accounting)),
        ("experiment: swap symmetry", with_report(check_swap_symmetry)),
        ("experiment: sweep monotone", check_sweep_monotone),
        ("experiment: wires-out loss", with_report(check_wires_out_loss)),
        ("experiment: coherent = gamma 1", check_code_paths),
        ("io: CSV determinism", check_csv_determinism),
        ("io: CSV round trip", check_csv_roundtrip),
    ]


def run(stream=None):
    """Run every check, print one line each; return the number of failures."""
    import sys

    stream = stream or sys.stdout
    failures = 0
    for name, fn in checks():
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashing check counts as a failure
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        failures += not ok
        print(f"{'PASS' if ok else 'FAIL'}  {name}  ({detail})", file=stream)
    print(f"{len(checks()) - failures} passed, {failures} failed", file=stream)
    return failures

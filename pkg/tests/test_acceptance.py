"""Shipped guarantees, one test per numbered criterion.

Each test prints a ``[criterion N] PASS/FAIL`` line; run the module with
``pytest tests/test_acceptance.py -s`` to see them.  The suite exercises
the public API plus the installed command line and finishes in about a
minute (most of it in the determinism criterion, which renders every
bundled preset three times).
"""
import contextlib
import subprocess
import sys

import numpy as np
import pytest

from support import draw_balanced, draw_params

from cmpkit import (
    DEFAULT_PERTURBATION,
    CavityGeometry,
    CouplingMap,
    NoiseModel,
    Regime,
    SweepSpec,
    SystemParams,
    cavity_mode_frequency,
    classify_regime,
    cpa_eigenfrequencies,
    cpa_feed_conditions,
    find_cpa_dips,
    find_exceptional_point,
    fit_coupled,
    hamiltonian_eigen,
    linear_grid,
    minimum_branch_separation,
    reduced_output,
    s_matrix,
    sweep_phase,
    synth_spectrum,
    two_feed_output,
)
from cmpkit.presets import PRESETS, run_preset

REFERENCE = SystemParams(
    omega_c=10023.6, omega_m=10023.6, g_m=3.9,
    kappa_1=1.72, kappa_2=1.39, kappa_int=1.55, gamma_m=1.5,
)


@contextlib.contextmanager
def criterion(number, description):
    try:
        yield
    except BaseException:
        print(f"[criterion {number}] FAIL: {description}")
        raise
    print(f"[criterion {number}] PASS: {description}")


def cli(*argv):
    return subprocess.run(
        [sys.executable, "-m", "cmpkit.cli", *argv], capture_output=True, text=True
    )


def test_01_exceptional_point_location():
    with criterion(1, "exceptional point at x = 1.1538 mm, near the 1.2 mm threshold"):
        point = find_exceptional_point(REFERENCE, CouplingMap(), (0.0, 4.0))
        assert abs(point.x_mm - 1.1538) <= 1e-4
        assert abs(point.x_mm - 1.2) < 0.05
        assert point.g_m == pytest.approx(REFERENCE.gamma_m, abs=1e-5)


def test_02_perfect_absorption_zeros(balanced_params):
    with criterion(2, "balanced feeds absorb completely at the hybrid pair"):
        p = balanced_params
        feed = cpa_feed_conditions(p)
        for offset in (-3.6, 3.6):
            out = two_feed_output(p.omega_c + offset, p, feed)
            assert out.total_power < 1e-18 * feed.input_power
        dips = find_cpa_dips(p, feed, (p.omega_c - 15.0, p.omega_c + 15.0))
        assert len(dips) == 2
        assert dips[1].freq - dips[0].freq == pytest.approx(7.2, abs=1e-5)


def test_03_anticrossing_gap():
    with criterion(3, "strong-coupling map gap of 18.4 MHz within grid rounding"):
        out = run_preset("1e")
        gap = minimum_branch_separation(out.sweeps[0])
        # each branch minimum is quantized to the 0.02 MHz probe grid
        assert abs(gap - 18.4) <= 0.04


def test_04_feed_report():
    with criterion(4, "cpa-check reports the feed ratio and rate mismatch"):
        proc = cli("cpa-check")
        assert proc.returncode == 0, proc.stderr
        assert "q = kappa_1/kappa_2 = 1.2374" in proc.stdout
        assert "= 0.06 MHz" in proc.stdout


def _displaced(x_mm: float) -> SystemParams:
    omega_c, kappa_int = DEFAULT_PERTURBATION.lookup(x_mm)
    return SystemParams(
        omega_c=omega_c, omega_m=omega_c, g_m=CouplingMap().slope * abs(x_mm),
        kappa_1=1.72, kappa_2=1.39, kappa_int=kappa_int, gamma_m=1.5,
    )


def test_05_phase_sensitivity_contrast():
    with criterion(5, "phase sweep spans >20 dB at x=-3 mm, <10 dB at x=0"):
        values = np.radians(linear_grid(-180.0, 180.0, 1.0))
        side = _displaced(-3.0)
        gap = float(np.sqrt(side.g_m**2 - side.gamma_m**2))
        spec = SweepSpec(
            parameter="delta_phi", values=values,
            freqs=np.array([side.omega_c - gap]), params=side,
            quantity="total", feed=cpa_feed_conditions(side),
        )
        db = sweep_phase(spec).power_db[:, 0]
        assert db.max() - db.min() > 20.0
        assert values[np.argmin(db)] == 0.0

        center = _displaced(0.0)
        spec = SweepSpec(
            parameter="delta_phi", values=values,
            freqs=np.array([center.omega_c]), params=center,
            quantity="total", feed=cpa_feed_conditions(center),
        )
        db = sweep_phase(spec).power_db[:, 0]
        assert db.max() - db.min() < 10.0


def test_06_regime_taxonomy():
    with criterion(6, "coupling regimes split at the cavity and magnon linewidths"):
        kappa_c, gamma_m = 4.66, 1.5
        assert classify_regime(9.2, kappa_c, gamma_m) is Regime.STRONG
        assert classify_regime(3.9, kappa_c, gamma_m) is Regime.MIT
        assert classify_regime(1.0, kappa_c, gamma_m) is Regime.WEAK


def test_07_cavity_mode_frequencies():
    with criterion(7, "44x20x6 mm box modes at 8.24 and 10.13 GHz, near measurement"):
        box = CavityGeometry(length_mm=44.0, width_mm=20.0, height_mm=6.0)
        f1 = cavity_mode_frequency(box, 1)
        f2 = cavity_mode_frequency(box, 2)
        assert abs(f1 - 8.24) <= 0.01
        assert abs(f2 - 10.13) <= 0.01
        assert abs(f1 - 8.16) / 8.16 < 0.015
        assert abs(f2 - 10.03) / 10.03 < 0.015


def _check_reciprocity():
    rng = np.random.default_rng(8001)
    for _ in range(10_000):
        p = draw_params(rng)
        nu = p.omega_c + rng.uniform(-20.0, 20.0)
        sp = s_matrix(nu, p)
        assert sp.s21 == sp.s12


def _check_scale_invariance():
    rng = np.random.default_rng(8002)
    for _ in range(200):
        p = draw_params(rng)
        lam = rng.uniform(0.1, 10.0)
        nu = p.omega_c + rng.uniform(-20.0, 20.0)
        scaled = SystemParams(
            omega_c=lam * p.omega_c, omega_m=lam * p.omega_m, g_m=lam * p.g_m,
            kappa_1=lam * p.kappa_1, kappa_2=lam * p.kappa_2,
            kappa_int=lam * p.kappa_int, gamma_m=lam * p.gamma_m,
        )
        a, b = s_matrix(nu, p), s_matrix(lam * nu, scaled)
        for x, y in ((a.s11, b.s11), (a.s21, b.s21), (a.s22, b.s22)):
            assert abs(x - y) <= 1e-12


def _check_mirror_symmetry():
    rng = np.random.default_rng(8003)
    for _ in range(200):
        p, feed = draw_balanced(rng)
        delta = rng.uniform(0.01, 10.0)
        above = two_feed_output(p.omega_c + delta, p, feed).total_power
        below = two_feed_output(p.omega_c - delta, p, feed).total_power
        assert abs(above - below) <= 1e-12 * max(above, below, 1e-30)


def _check_conjugate_pairs():
    rng = np.random.default_rng(8004)
    for _ in range(200):
        p, _ = draw_balanced(rng)
        gamma = p.gamma_m
        g = gamma * rng.uniform(0.05, 0.95)
        lo, hi = cpa_eigenfrequencies(p.omega_c, g, gamma)
        pair = sorted((lo.as_complex(), hi.as_complex()), key=lambda z: z.imag)
        assert abs(pair[0] - pair[1].conjugate()) <= 1e-12 * max(1.0, p.omega_c)


def _check_reduced_equals_two_feed():
    rng = np.random.default_rng(8005)
    for _ in range(200):
        p, feed = draw_balanced(rng)
        nu = p.omega_c + rng.uniform(-15.0, 15.0)
        full = two_feed_output(nu, p, feed)
        slim = reduced_output(nu, p.omega_c, p.gamma_m, p.g_m, p.kappa_int, feed.q)
        scale = max(1.0, full.total_power)
        assert abs(full.total_power - slim.total_power) <= 1e-12 * scale + 1e-14


def _check_trace_identity():
    rng = np.random.default_rng(8006)
    for _ in range(300):
        a = rng.uniform(-5.0, 5.0, (2, 2)) + 1j * rng.uniform(-5.0, 5.0, (2, 2))
        eig = hamiltonian_eigen(a)
        lam_sum = eig.values[0].as_complex() + eig.values[1].as_complex()
        norm = max(1.0, float(np.linalg.norm(a)))
        assert abs(lam_sum - np.trace(a)) <= 1e-12 * norm


def test_08_property_suites():
    with criterion(8, "reciprocity, scalings, symmetries and eigen identities"):
        _check_reciprocity()
        _check_scale_invariance()
        _check_mirror_symmetry()
        _check_conjugate_pairs()
        _check_reduced_equals_two_feed()
        _check_trace_identity()


def _perturbed_guess(p: SystemParams) -> SystemParams:
    return SystemParams(
        omega_c=p.omega_c + 1.5, omega_m=p.omega_m - 1.5,
        g_m=p.g_m * 1.2, kappa_1=p.kappa_1 * 1.2,
        kappa_2=p.kappa_2 * 1.2, kappa_int=0.0, gamma_m=p.gamma_m * 1.2,
    )


def _max_rel_err(fit, truth: dict) -> float:
    return max(
        abs(fit.estimates[name] - value) / max(abs(value), 1.0)
        for name, value in truth.items()
    )


def test_09_fit_round_trips():
    with criterion(9, "fits recover generating parameters, clean and noisy"):
        # noiseless round trips on random identifiable reflection systems
        rng = np.random.default_rng(20260816)
        for _ in range(200):
            omega_c = rng.uniform(9000.0, 11000.0)
            p = SystemParams(
                omega_c=omega_c,
                omega_m=omega_c + rng.uniform(-5.0, 5.0),
                g_m=rng.uniform(2.0, 12.0),
                kappa_1=rng.uniform(0.5, 3.0),
                kappa_2=rng.uniform(0.5, 4.0),
                kappa_int=0.0,
                gamma_m=rng.uniform(0.5, 3.0),
            )
            data = synth_spectrum(
                p, (p.omega_c - 25.0, p.omega_c + 25.0), 0.2, kind="s11"
            )
            fit = fit_coupled(data, guess=_perturbed_guess(p))
            truth = {
                "omega_c": p.omega_c, "omega_m": p.omega_m, "g_m": p.g_m,
                "gamma_m": p.gamma_m, "kappa_1": p.kappa_1, "kappa_loss": p.kappa_2,
            }
            assert fit.converged
            assert _max_rel_err(fit, truth) <= 1e-4

        # 40 dB signal-to-noise, one truth, a hundred noise draws
        truth_p = SystemParams(
            omega_c=10023.6, omega_m=10023.6, g_m=9.2,
            kappa_1=1.72, kappa_2=2.94, kappa_int=0.0, gamma_m=1.5,
        )
        band = (truth_p.omega_c - 25.0, truth_p.omega_c + 25.0)
        clean = synth_spectrum(truth_p, band, 0.1, kind="s11")
        rms = float(np.sqrt(np.mean(np.abs(clean.values) ** 2)))
        level = rms / (100.0 * np.sqrt(2.0))  # 40 dB total SNR, split re/im
        truth = {
            "omega_c": 10023.6, "omega_m": 10023.6, "g_m": 9.2,
            "gamma_m": 1.5, "kappa_1": 1.72, "kappa_loss": 2.94,
        }
        errs = []
        for seed in range(100):
            noisy = synth_spectrum(
                truth_p, band, 0.1,
                noise=NoiseModel("additive", level), seed=seed, kind="s11",
            )
            fit = fit_coupled(noisy, guess=_perturbed_guess(truth_p))
            errs.append(_max_rel_err(fit, truth))
        assert float(np.median(errs)) < 0.01

        # two finite-difference step sizes give the same local slopes
        from cmpkit import coupled_model

        freqs = np.linspace(10003.6, 10043.6, 201)
        values = {
            "omega_c": 10023.6, "omega_m": 10024.8, "g_m": 4.1,
            "gamma_m": 1.4, "kappa_1": 1.6, "kappa_loss": 2.8,
        }

        def model(table):
            return coupled_model(freqs, "s11", table)

        for name in values:
            cols = []
            for h in (1e-4, 1e-5):  # absolute MHz steps, far below linewidth
                up, dn = dict(values), dict(values)
                up[name] += h
                dn[name] -= h
                cols.append((model(up) - model(dn)) / (2.0 * h))
            norm = float(np.linalg.norm(cols[1]))
            assert float(np.linalg.norm(cols[0] - cols[1])) <= 1e-3 * norm


def test_10_preset_determinism(tmp_path):
    with criterion(10, "every preset writes byte-identical artifacts on reruns"):
        for pid in sorted(PRESETS):
            outputs = {}
            for label, threads in (("a", 1), ("b", 1), ("c", 3)):
                base = tmp_path / pid / label / "run"
                proc = cli(
                    "sweep", "--figure", pid, "--out", str(base),
                    "--threads", str(threads),
                )
                assert proc.returncode == 0, f"{pid}: {proc.stderr}"
                outputs[label] = {
                    ext: (tmp_path / pid / label / f"run{ext}").read_bytes()
                    for ext in (".csv", ".json", ".svg")
                }
            for ext in (".csv", ".json", ".svg"):
                assert outputs["a"][ext] == outputs["b"][ext], f"{pid}{ext} rerun"
                assert outputs["a"][ext] == outputs["c"][ext], f"{pid}{ext} threads"

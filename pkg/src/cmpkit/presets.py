"""Bundled report presets.

Each preset binds the reference parameter set (port couplings 1.72 and
1.39 MHz, internal loss 1.55 MHz, magnon damping 1.5 MHz, displacement
slope 1.3 MHz/mm, cavity overrides along the rod axis) to one canned
computation, so a figure-style report needs no hand-written config.  The
ids are short and stable; ``PRESETS`` maps each to a description of what
it computes.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .fitting import FitResult, SpectrumDataset, fit_lorentzian, lorentzian, synth_spectrum
from .params import DEFAULT_PERTURBATION, CouplingMap, FeedConfig, SystemParams
from .scattering import cpa_feed_conditions
from .sweeps import (
    MinimaTrace,
    SweepResult,
    SweepSpec,
    frequency_grid,
    linear_grid,
    minima_trace,
    sweep_displacement,
    sweep_field,
    sweep_phase,
    sweep_ratio,
)

__all__ = ["PRESETS", "PresetOutput", "run_preset"]

_KAPPA_1 = 1.72
_KAPPA_2 = 1.39
_KAPPA_INT = 1.55
_GAMMA_M = 1.5

PRESETS = {
    "1e": "one-feed reflection map |S11|^2 versus magnon frequency at"
    " g = 9.2 MHz: anti-crossing with a 2g gap",
    "2b": "two-feed total output versus magnon frequency at g = 3.9 MHz"
    " under balanced feeds, with eigenfrequency overlays",
    "3a": "two-feed total output versus sphere displacement (coupling from"
    " the displacement map, cavity overrides applied), absorption branches"
    " overlaid where they exist",
    "3c": "total output versus feed phase difference, probed at the"
    " absorption frequencies of the x = -3 mm system and at the"
    " zero-coupling point x = 0",
    "3d": "total output versus feed power ratio at the absorption"
    " frequencies of the x = -3 mm system",
    "3e": "per-displacement minima of the total output: deep plateau where"
    " the absorption pair exists, shallow plateau inside the transition",
    "s2": "bare-cavity transmission trace with its Lorentzian fit",
}


@dataclass(frozen=True)
class PresetOutput:
    """Artifacts computed by one preset.

    ``kind`` says what to write: "sweep" (one grid), "sweep_set"
    (several 1-D sweeps), "minima" (a trace), or "fit" (a spectrum
    dataset, its fit and the fitted model curve).
    """

    pid: str
    kind: str
    sweeps: tuple = ()
    minima: MinimaTrace | None = None
    fit: FitResult | None = None
    dataset: SpectrumDataset | None = None
    model_values: np.ndarray | None = None


def _reference_system(omega_c: float, g_m: float, kappa_int: float = _KAPPA_INT) -> SystemParams:
    return SystemParams(
        omega_c=omega_c,
        omega_m=omega_c,
        g_m=g_m,
        kappa_1=_KAPPA_1,
        kappa_2=_KAPPA_2,
        kappa_int=kappa_int,
        gamma_m=_GAMMA_M,
    )


def _displaced_system(x_mm: float, coupling: CouplingMap) -> SystemParams:
    omega_c, kappa_int = DEFAULT_PERTURBATION.lookup(x_mm)
    g_m = coupling.slope * abs(x_mm)
    return _reference_system(omega_c, g_m, kappa_int)


def _label(result: SweepResult, text: str, pid: str) -> SweepResult:
    meta = dict(result.metadata)
    meta["label"] = text
    meta["preset"] = pid
    return replace(result, metadata=meta)


def _preset_1e(threads: int) -> PresetOutput:
    # Strong coupling, one feed: the reflection dip pair traces the
    # anti-crossing; its waist is the acceptance gap measurement.
    center = 10024.2
    p = _reference_system(center, g_m=9.2)
    spec = SweepSpec(
        parameter="omega_m",
        values=linear_grid(center - 25.0, center + 25.0, 0.5),
        freqs=frequency_grid(center, 30.0, 0.02),
        params=p,
        quantity="s11",
    )
    res = sweep_field(spec, threads)
    return PresetOutput(pid="1e", kind="sweep", sweeps=(_label(res, "g = 9.2 MHz", "1e"),))


def _preset_2b(threads: int) -> PresetOutput:
    p = _displaced_system(-3.0, CouplingMap())
    spec = SweepSpec(
        parameter="omega_m",
        values=linear_grid(p.omega_c - 25.0, p.omega_c + 25.0, 0.5),
        freqs=frequency_grid(p.omega_c, 30.0, 0.02),
        params=p,
        quantity="total",
        feed=cpa_feed_conditions(p),
    )
    res = sweep_field(spec, threads)
    return PresetOutput(pid="2b", kind="sweep", sweeps=(_label(res, "x = -3 mm", "2b"),))


def _displacement_spec(quantity: str = "total") -> SweepSpec:
    coupling = CouplingMap()
    base = _reference_system(10023.6, g_m=0.0)
    feed = cpa_feed_conditions(base) if quantity == "total" else None
    return SweepSpec(
        parameter="x",
        values=linear_grid(-4.0, 4.0, 0.05),
        freqs=frequency_grid(10023.6, 30.0, 0.02),
        params=base,
        quantity=quantity,
        feed=feed,
        coupling=coupling,
        overrides=DEFAULT_PERTURBATION,
        track_resonance=True,
    )


def _preset_3a(threads: int) -> PresetOutput:
    res = sweep_displacement(_displacement_spec(), threads)
    return PresetOutput(pid="3a", kind="sweep", sweeps=(_label(res, "balanced feeds", "3a"),))


def _phase_members(threads: int, parameter: str, values: np.ndarray) -> tuple:
    coupling = CouplingMap()
    side = _displaced_system(-3.0, coupling)
    gap = float(np.sqrt(side.g_m**2 - side.gamma_m**2))
    feed = cpa_feed_conditions(side)
    run = sweep_phase if parameter == "delta_phi" else sweep_ratio
    members = [
        _label(
            run(
                SweepSpec(
                    parameter=parameter,
                    values=values,
                    freqs=np.array([side.omega_c - gap, side.omega_c + gap]),
                    params=side,
                    quantity="total",
                    feed=feed,
                ),
                threads,
            ),
            "x = -3 mm",
            "3c" if parameter == "delta_phi" else "3d",
        )
    ]
    if parameter == "delta_phi":
        center = _displaced_system(0.0, coupling)
        members.append(
            _label(
                sweep_phase(
                    SweepSpec(
                        parameter="delta_phi",
                        values=values,
                        freqs=np.array([center.omega_c]),
                        params=center,
                        quantity="total",
                        feed=cpa_feed_conditions(center),
                    ),
                    threads,
                ),
                "x = 0 mm",
                "3c",
            )
        )
    return tuple(members)


def _preset_3c(threads: int) -> PresetOutput:
    values = np.radians(linear_grid(-180.0, 180.0, 1.0))
    return PresetOutput(
        pid="3c", kind="sweep_set", sweeps=_phase_members(threads, "delta_phi", values)
    )


def _preset_3d(threads: int) -> PresetOutput:
    values = linear_grid(0.2, 3.0, 0.01)
    return PresetOutput(
        pid="3d", kind="sweep_set", sweeps=_phase_members(threads, "q", values)
    )


def _preset_3e(threads: int) -> PresetOutput:
    res = sweep_displacement(_displacement_spec(), threads)
    trace = minima_trace(res)
    return PresetOutput(
        pid="3e", kind="minima", sweeps=(_label(res, "balanced feeds", "3e"),), minima=trace
    )


def _preset_s2(threads: int) -> PresetOutput:
    bare = _reference_system(10031.7, g_m=0.0)
    dataset = synth_spectrum(
        bare, (bare.omega_c - 20.0, bare.omega_c + 20.0), 0.05, kind="s21_power"
    )
    fit = fit_lorentzian(dataset)
    model_values = lorentzian(dataset.freqs, **fit.estimates)
    spec = SweepSpec(
        parameter="omega_m",
        values=np.array([bare.omega_m]),
        freqs=dataset.freqs,
        params=bare,
        quantity="s21",
    )
    trace = sweep_field(spec, threads)
    return PresetOutput(
        pid="s2",
        kind="fit",
        sweeps=(_label(trace, "bare cavity", "s2"),),
        fit=fit,
        dataset=dataset,
        model_values=model_values,
    )


_BUILDERS = {
    "1e": _preset_1e,
    "2b": _preset_2b,
    "3a": _preset_3a,
    "3c": _preset_3c,
    "3d": _preset_3d,
    "3e": _preset_3e,
    "s2": _preset_s2,
}


def run_preset(pid: str, threads: int = 1) -> PresetOutput:
    """Compute one preset's artifacts. Unknown ids raise ValueError."""
    if pid not in _BUILDERS:
        raise ValueError(f"unknown preset {pid!r} (known: {', '.join(sorted(_BUILDERS))})")
    return _BUILDERS[pid](threads)

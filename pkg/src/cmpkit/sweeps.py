"""Parameter sweeps of the scattering response.

A sweep evaluates one spectral quantity (|S11|**2, |S21|**2 or the
two-feed total output power) over a probe-frequency grid for every value
of a swept parameter: the magnon frequency, the sphere displacement, the
feed phase difference or the feed power ratio.  Columns are independent
of each other, so they can be evaluated concurrently; the result is
bit-identical for any thread count.

Output powers are reported both raw and in dB relative to the injected
power (1 + q for two-feed sweeps, 1 for one-feed quantities), floored at
``DB_FLOOR``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from ._version import __version__
from .errors import BracketError
from .geometry import coupling_from_displacement
from .model import cpa_eigenfrequencies, effective_hamiltonian, hamiltonian_eigen
from .params import (
    CouplingMap,
    FeedConfig,
    PerturbationTable,
    SystemParams,
    _checked_float,
)
from .scattering import s_matrix, two_feed_output

__all__ = [
    "DB_FLOOR",
    "SWEEP_PARAMETERS",
    "SWEEP_QUANTITIES",
    "SweepSpec",
    "SweepResult",
    "Overlay",
    "MinimaTrace",
    "ExceptionalPoint",
    "linear_grid",
    "frequency_grid",
    "sweep_field",
    "sweep_displacement",
    "sweep_phase",
    "sweep_ratio",
    "minima_trace",
    "minimum_branch_separation",
    "find_exceptional_point",
]

DB_FLOOR = -300.0

SWEEP_PARAMETERS = ("omega_m", "x", "delta_phi", "q")
SWEEP_QUANTITIES = ("total", "s11", "s21")

_PARAM_COLUMN = {
    "omega_m": "omega_m_MHz",
    "x": "x_mm",
    "delta_phi": "delta_phi_rad",
    "q": "q",
}


def linear_grid(start: float, stop: float, step: float) -> np.ndarray:
    """Uniform grid from ``start`` to ``stop`` with spacing ``step``.

    The point count is round((stop - start)/step) + 1 and the endpoints
    are exact, so the stated stop is hit whenever the span is an integer
    number of steps (within rounding).
    """
    start = _checked_float("start", start)
    stop = _checked_float("stop", stop)
    step = _checked_float("step", step)
    if step <= 0.0:
        raise ValueError(f"step must be positive, got {step!r}")
    if not stop > start:
        raise ValueError(f"stop must exceed start, got ({start!r}, {stop!r})")
    n = int(round((stop - start) / step)) + 1
    if n > 50_000_000:
        raise ValueError("grid would exceed 5e7 points")
    return np.linspace(start, stop, max(n, 2))


def frequency_grid(center: float, span: float, step: float) -> np.ndarray:
    """Probe grid of ``span`` MHz centred on ``center`` with ``step`` MHz."""
    center = _checked_float("center", center)
    span = _checked_float("span", span)
    if span <= 0.0:
        raise ValueError(f"span must be positive, got {span!r}")
    return linear_grid(center - 0.5 * span, center + 0.5 * span, step)


@dataclass(frozen=True)
class SweepSpec:
    """Full description of one sweep.

    Attributes
    ----------
    parameter : str
        One of ``SWEEP_PARAMETERS``: "omega_m" (MHz), "x" (mm),
        "delta_phi" (radians) or "q" (power ratio).
    values : ndarray
        Swept values, 1-D and finite.
    freqs : ndarray
        Probe frequency grid in MHz.
    params : SystemParams
        Base system; the swept parameter overrides the matching entry
        column by column.
    quantity : str
        "total" (two-feed output power, needs ``feed``), "s11" or "s21".
    feed : FeedConfig, optional
        Two-feed drive; required for quantity "total".
    coupling : CouplingMap, optional
        Displacement-to-coupling map; required for parameter "x".
    overrides : PerturbationTable, optional
        Displacement-dependent cavity overrides, applied for parameter
        "x" only.
    track_resonance : bool
        For displacement sweeps, keep omega_m equal to the (possibly
        overridden) omega_c at every column.
    """

    parameter: str
    values: np.ndarray
    freqs: np.ndarray
    params: SystemParams
    quantity: str = "total"
    feed: FeedConfig | None = None
    coupling: CouplingMap | None = None
    overrides: PerturbationTable | None = None
    track_resonance: bool = True

    def __post_init__(self) -> None:
        if self.parameter not in SWEEP_PARAMETERS:
            raise ValueError(
                f"parameter must be one of {SWEEP_PARAMETERS}, got {self.parameter!r}"
            )
        if self.quantity not in SWEEP_QUANTITIES:
            raise ValueError(
                f"quantity must be one of {SWEEP_QUANTITIES}, got {self.quantity!r}"
            )
        values = np.asarray(self.values, dtype=float)
        freqs = np.asarray(self.freqs, dtype=float)
        for name, arr in (("values", values), ("freqs", freqs)):
            if arr.ndim != 1 or arr.size == 0:
                raise ValueError(f"{name} must be a nonempty 1-D array")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} must be finite")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "freqs", freqs)
        if self.quantity == "total" and self.feed is None:
            raise ValueError("quantity 'total' needs a FeedConfig")
        if self.parameter == "x" and self.coupling is None:
            raise ValueError("displacement sweeps need a CouplingMap")
        if self.parameter == "q" and np.any(values <= 0.0):
            raise ValueError("ratio sweep values must be positive")


@dataclass(frozen=True)
class Overlay:
    """An analytic curve drawn on top of a sweep grid."""

    name: str
    sweep_values: np.ndarray
    freqs: np.ndarray

    def __post_init__(self) -> None:
        sv = np.asarray(self.sweep_values, dtype=float)
        fq = np.asarray(self.freqs, dtype=float)
        if sv.shape != fq.shape or sv.ndim != 1:
            raise ValueError("overlay arrays must be 1-D with equal length")
        object.__setattr__(self, "sweep_values", sv)
        object.__setattr__(self, "freqs", fq)


@dataclass(frozen=True)
class SweepResult:
    """Evaluated sweep grid.

    ``power[i, j]`` is the chosen quantity at sweep value i and probe
    frequency j.  ``input_power`` is the injected power used for the dB
    normalization: a scalar for fixed-feed sweeps and a per-row array
    for ratio sweeps, where the injected power follows q.
    """

    quantity: str
    sweep_param: str
    sweep_values: np.ndarray
    freqs: np.ndarray
    power: np.ndarray
    input_power: float | np.ndarray
    overlays: tuple[Overlay, ...] = ()
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        sv = np.asarray(self.sweep_values, dtype=float)
        fq = np.asarray(self.freqs, dtype=float)
        pw = np.asarray(self.power, dtype=float)
        if pw.shape != (sv.size, fq.size):
            raise ValueError(
                f"power shape {pw.shape} does not match "
                f"(n_sweep, n_freq) = ({sv.size}, {fq.size})"
            )
        if not (np.all(np.isfinite(pw)) and np.all(pw >= 0.0)):
            raise ValueError("power grid must be finite and nonnegative")
        object.__setattr__(self, "sweep_values", sv)
        object.__setattr__(self, "freqs", fq)
        object.__setattr__(self, "power", pw)
        ip = self.input_power
        if np.ndim(ip) == 0:
            ip = float(ip)
            if not (math.isfinite(ip) and ip > 0.0):
                raise ValueError("input_power must be positive and finite")
        else:
            ip = np.asarray(ip, dtype=float)
            if ip.shape != (sv.size,):
                raise ValueError("per-row input_power must have one entry per sweep value")
            if not (np.all(np.isfinite(ip)) and np.all(ip > 0.0)):
                raise ValueError("input_power must be positive and finite")
        object.__setattr__(self, "input_power", ip)
        object.__setattr__(self, "overlays", tuple(self.overlays))

    @property
    def power_db(self) -> np.ndarray:
        """Power in dB relative to the injected power, floored at DB_FLOOR."""
        ip = self.input_power
        rel = self.power / (ip if np.ndim(ip) == 0 else np.asarray(ip)[:, None])
        return 10.0 * np.log10(np.maximum(rel, 10.0 ** (DB_FLOOR / 10.0)))


@dataclass(frozen=True)
class MinimaTrace:
    """Per-sweep-point minimum of the output spectrum.

    Where at least two local minima fall below the absorption threshold
    the recorded value is the mean of the two deepest minima in dB (and
    ``freq_MHz`` the mean of their positions); ``branch_averaged`` marks
    those rows.  Elsewhere the global minimum of the column is recorded.
    """

    sweep_param: str
    sweep_values: np.ndarray
    freq_MHz: np.ndarray
    power: np.ndarray
    power_db: np.ndarray
    branch_averaged: np.ndarray
    input_power: float


@dataclass(frozen=True)
class ExceptionalPoint:
    """Displacement at which the coupling rate meets the magnon damping."""

    x_mm: float
    g_m: float


def _column_system(spec: SweepSpec, value: float) -> tuple[SystemParams, FeedConfig | None]:
    p = spec.params
    if spec.parameter == "omega_m":
        return replace(p, omega_m=float(value)), spec.feed
    if spec.parameter == "x":
        g = coupling_from_displacement(spec.coupling, float(value))
        omega_c, kappa_int = (
            spec.overrides.lookup(float(value))
            if spec.overrides is not None
            else (p.omega_c, p.kappa_int)
        )
        omega_m = omega_c if spec.track_resonance else p.omega_m
        return (
            replace(p, g_m=g, omega_c=omega_c, omega_m=omega_m, kappa_int=kappa_int),
            spec.feed,
        )
    if spec.parameter == "delta_phi":
        return p, FeedConfig(delta_phi=float(value), q=spec.feed.q)
    return p, FeedConfig(delta_phi=spec.feed.delta_phi, q=float(value))


def _evaluate_column(spec: SweepSpec, value: float) -> np.ndarray:
    p, feed = _column_system(spec, value)
    if spec.quantity == "total":
        return two_feed_output(spec.freqs, p, feed).total_power
    sp = s_matrix(spec.freqs, p)
    wave = sp.s11 if spec.quantity == "s11" else sp.s21
    return np.abs(wave) ** 2


def _run_sweep(spec: SweepSpec, threads: int) -> np.ndarray:
    n = spec.values.size
    power = np.empty((n, spec.freqs.size), dtype=float)

    def fill(i: int) -> None:
        power[i] = _evaluate_column(spec, spec.values[i])

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(fill, range(n)))
    else:
        for i in range(n):
            fill(i)
    return power


def _base_metadata(spec: SweepSpec) -> dict:
    meta: dict = {
        "version": __version__,
        "parameter": spec.parameter,
        "quantity": spec.quantity,
        "params": asdict(spec.params),
        "track_resonance": spec.track_resonance,
    }
    meta["feed"] = None if spec.feed is None else asdict(spec.feed)
    meta["coupling"] = None if spec.coupling is None else asdict(spec.coupling)
    meta["overrides"] = (
        None
        if spec.overrides is None
        else {
            "x_mm": list(spec.overrides.x_mm),
            "omega_c": list(spec.overrides.omega_c),
            "kappa_int": list(spec.overrides.kappa_int),
        }
    )
    return meta


def _input_power(spec: SweepSpec) -> float | np.ndarray:
    if spec.quantity != "total":
        return 1.0
    if spec.parameter == "q":
        return 1.0 + spec.values
    return spec.feed.input_power


def _field_overlays(spec: SweepSpec) -> tuple[Overlay, ...]:
    # Complex eigenbranches of the driven system; only meaningful for the
    # two-feed quantity, one-feed maps are left bare.
    if spec.quantity != "total":
        return ()
    upper = np.empty(spec.values.size)
    lower = np.empty(spec.values.size)
    for i, value in enumerate(spec.values):
        p, _ = _column_system(spec, value)
        eig = hamiltonian_eigen(effective_hamiltonian(p))
        upper[i] = eig.values[0].re
        lower[i] = eig.values[1].re
    return (
        Overlay("eigen_upper", spec.values.copy(), upper),
        Overlay("eigen_lower", spec.values.copy(), lower),
    )


def _displacement_overlays(spec: SweepSpec) -> tuple[Overlay, ...]:
    xs_u: list[float] = []
    fr_u: list[float] = []
    xs_l: list[float] = []
    fr_l: list[float] = []
    for value in spec.values:
        p, _ = _column_system(spec, value)
        if p.g_m < p.gamma_m:
            continue  # complex pair; only the real branches are drawn
        omega_0 = 0.5 * (p.omega_c + p.omega_m)
        hi, lo = cpa_eigenfrequencies(omega_0, p.g_m, p.gamma_m)
        xs_u.append(float(value))
        fr_u.append(hi.re)
        xs_l.append(float(value))
        fr_l.append(lo.re)
    if not xs_u:
        return ()
    return (
        Overlay("branch_upper", np.array(xs_u), np.array(fr_u)),
        Overlay("branch_lower", np.array(xs_l), np.array(fr_l)),
    )


def _finish(spec: SweepSpec, overlays: tuple[Overlay, ...], threads: int) -> SweepResult:
    power = _run_sweep(spec, threads)
    return SweepResult(
        quantity=spec.quantity,
        sweep_param=_PARAM_COLUMN[spec.parameter],
        sweep_values=spec.values,
        freqs=spec.freqs,
        power=power,
        input_power=_input_power(spec),
        overlays=overlays,
        metadata=_base_metadata(spec),
    )


def sweep_field(spec: SweepSpec, threads: int = 1) -> SweepResult:
    """Sweep the magnon frequency (the static-field handle).

    In a one-feed reflection map the two spectral dips trace an
    anti-crossing whose minimum separation at omega_m = omega_c is
    2*g_m up to corrections quadratic in the linewidths.  Two-feed
    sweeps carry the complex eigenbranch real parts as overlays.
    """
    if spec.parameter != "omega_m":
        raise ValueError(f"sweep_field needs parameter 'omega_m', got {spec.parameter!r}")
    return _finish(spec, _field_overlays(spec), threads)


def sweep_displacement(spec: SweepSpec, threads: int = 1) -> SweepResult:
    """Sweep the sphere displacement along the cavity axis.

    Each column maps x to g_m through the coupling map, applies the
    override table when present and, with ``track_resonance``, keeps the
    magnon tuned to the cavity.  Overlays carry the real eigenfrequency
    branches omega_0 +/- sqrt(g_m**2 - gamma_m**2) where they exist.
    """
    if spec.parameter != "x":
        raise ValueError(f"sweep_displacement needs parameter 'x', got {spec.parameter!r}")
    return _finish(spec, _displacement_overlays(spec), threads)


def sweep_phase(spec: SweepSpec, threads: int = 1) -> SweepResult:
    """Sweep the feed phase difference at fixed probe frequencies."""
    if spec.parameter != "delta_phi":
        raise ValueError(f"sweep_phase needs parameter 'delta_phi', got {spec.parameter!r}")
    if spec.quantity != "total":
        raise ValueError("phase sweeps are defined for the two-feed quantity only")
    return _finish(spec, (), threads)


def sweep_ratio(spec: SweepSpec, threads: int = 1) -> SweepResult:
    """Sweep the feed power ratio q at fixed probe frequencies.

    The dB normalization uses the per-row injected power 1 + q.
    """
    if spec.parameter != "q":
        raise ValueError(f"sweep_ratio needs parameter 'q', got {spec.parameter!r}")
    if spec.quantity != "total":
        raise ValueError("ratio sweeps are defined for the two-feed quantity only")
    return _finish(spec, (), threads)


def _local_minima(row: np.ndarray) -> list[int]:
    return [
        i
        for i in range(1, row.size - 1)
        if row[i] < row[i - 1] and row[i] <= row[i + 1]
    ]


def minima_trace(result: SweepResult, dip_threshold_db: float = -30.0) -> MinimaTrace:
    """Collapse a sweep to its per-column spectral minima.

    Columns with two or more local minima below ``dip_threshold_db``
    record the mean dB of the two deepest (the absorption branches);
    other columns record the global minimum.  Requires a scalar
    ``input_power`` (any sweep except the ratio sweep).
    """
    if np.ndim(result.input_power) != 0:
        raise ValueError("minima_trace needs a sweep with a fixed injected power")
    db = result.power_db
    n = result.sweep_values.size
    freq_out = np.empty(n)
    db_out = np.empty(n)
    averaged = np.zeros(n, dtype=bool)
    for i in range(n):
        row_db = db[i]
        dips = [j for j in _local_minima(result.power[i]) if row_db[j] < dip_threshold_db]
        if len(dips) >= 2:
            j1, j2 = sorted(sorted(dips, key=lambda j: row_db[j])[:2])
            db_out[i] = 0.5 * (row_db[j1] + row_db[j2])
            freq_out[i] = 0.5 * (result.freqs[j1] + result.freqs[j2])
            averaged[i] = True
        else:
            j = int(np.argmin(row_db))
            db_out[i] = row_db[j]
            freq_out[i] = result.freqs[j]
    power = float(result.input_power) * 10.0 ** (db_out / 10.0)
    return MinimaTrace(
        sweep_param=result.sweep_param,
        sweep_values=result.sweep_values.copy(),
        freq_MHz=freq_out,
        power=power,
        power_db=db_out,
        branch_averaged=averaged,
        input_power=float(result.input_power),
    )


def minimum_branch_separation(result: SweepResult) -> float:
    """Smallest spacing between the two deepest spectral minima per column.

    Scans every sweep column that resolves at least two local minima and
    returns the minimum over columns of the frequency spacing between
    the two deepest, which for an anti-crossing map is the gap at the
    crossing point.
    """
    best = math.inf
    for i in range(result.sweep_values.size):
        row = result.power[i]
        idx = _local_minima(row)
        if len(idx) < 2:
            continue
        j1, j2 = sorted(idx, key=lambda j: row[j])[:2]
        sep = abs(float(result.freqs[j1] - result.freqs[j2]))
        best = min(best, sep)
    if not math.isfinite(best):
        raise ValueError("no sweep column resolves two spectral minima")
    return best


def find_exceptional_point(
    p: SystemParams,
    coupling: CouplingMap,
    bracket: tuple[float, float],
    xatol: float = 1e-6,
) -> ExceptionalPoint:
    """Displacement where the coupling rate crosses the magnon damping.

    Bisects g_m(x) - gamma_m over ``bracket`` (mm) down to ``xatol``.
    The returned coupling satisfies |g_m - gamma_m| < slope * xatol.

    Raises
    ------
    BracketError
        If the difference does not change sign over the bracket.
    ValueError
        If the bracket is empty or leaves the coupling map's window.
    """
    lo = _checked_float("bracket[0]", bracket[0])
    hi = _checked_float("bracket[1]", bracket[1])
    if not hi > lo:
        raise ValueError(f"bracket must satisfy lo < hi, got ({lo!r}, {hi!r})")
    xatol = _checked_float("xatol", xatol)
    if xatol <= 0.0:
        raise ValueError(f"xatol must be positive, got {xatol!r}")

    def objective(x: float) -> float:
        return coupling_from_displacement(coupling, x) - p.gamma_m

    f_lo = objective(lo)
    f_hi = objective(hi)
    if f_lo == 0.0:
        return ExceptionalPoint(lo, coupling_from_displacement(coupling, lo))
    if f_hi == 0.0:
        return ExceptionalPoint(hi, coupling_from_displacement(coupling, hi))
    if (f_lo > 0.0) == (f_hi > 0.0):
        raise BracketError(
            "coupling minus damping does not change sign over "
            f"[{lo!r}, {hi!r}] mm (values {f_lo!r} and {f_hi!r} MHz)"
        )
    while hi - lo > xatol:
        mid = 0.5 * (lo + hi)
        f_mid = objective(mid)
        if f_mid == 0.0:
            return ExceptionalPoint(mid, coupling_from_displacement(coupling, mid))
        if (f_mid > 0.0) == (f_lo > 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    return ExceptionalPoint(x, coupling_from_displacement(coupling, x))

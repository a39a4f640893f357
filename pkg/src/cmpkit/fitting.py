"""Parameter extraction from measured or synthetic spectra.

Two models are fit by weighted least squares: a Lorentzian for the bare
cavity (center, linewidth, amplitude, baseline) and the coupled
cavity-magnon response for reflection or transmission data.  Rates are
log-reparameterized so the optimizer runs unconstrained while the
estimates stay positive.  The trust-region solver is retried with a
derivative-free simplex when its Jacobian is ill-conditioned; results
that still look degenerate are returned with ``converged=False`` rather
than raised.

A single-port reflection spectrum determines the external coupling of
the measured port and the lumped remaining loss, but not the split of
that lump between the second port and the internal loss: the reflection
model therefore exposes ``kappa_loss = kappa_2 + kappa_int`` and refuses
requests that name ``kappa_2`` or ``kappa_int`` separately.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import least_squares, minimize

from .errors import IdentifiabilityError
from .params import SystemParams, _checked_float
from .scattering import s_matrix
from .sweeps import linear_grid

__all__ = [
    "COMPLEX_KINDS",
    "POWER_KINDS",
    "SpectrumDataset",
    "FitResult",
    "NoiseModel",
    "REFLECTION_PARAMS",
    "TRANSMISSION_PARAMS",
    "LORENTZIAN_PARAMS",
    "coupled_param_names",
    "lorentzian",
    "coupled_model",
    "fit_lorentzian",
    "fit_coupled",
    "synth_spectrum",
    "estimate_coupled_guess",
]

COMPLEX_KINDS = ("s11", "s21")
POWER_KINDS = ("s11_power", "s21_power")

LORENTZIAN_PARAMS = ("omega_c", "kappa_c", "amplitude", "baseline")
REFLECTION_PARAMS = ("omega_c", "omega_m", "g_m", "gamma_m", "kappa_1", "kappa_loss")
TRANSMISSION_PARAMS = (
    "omega_c",
    "omega_m",
    "g_m",
    "gamma_m",
    "kappa_1",
    "kappa_2",
    "kappa_int",
)

# Positive-by-construction parameters, optimized as log(p).
_RATE_PARAMS = frozenset(
    {"kappa_c", "g_m", "gamma_m", "kappa_1", "kappa_2", "kappa_int", "kappa_loss"}
)

_ITERATION_CAP = 500
_JAC_COND_LIMIT = 1e10


@dataclass(frozen=True)
class SpectrumDataset:
    """Sampled spectrum with its measured quantity.

    ``kind`` names what ``values`` holds: "s11"/"s21" are complex wave
    amplitudes, "s11_power"/"s21_power" are real powers.  Frequencies
    are MHz, strictly increasing, at least 10 points.
    """

    freqs: np.ndarray
    values: np.ndarray
    kind: str = "s11"
    weights: np.ndarray | None = None

    def __post_init__(self) -> None:
        freqs = np.asarray(self.freqs, dtype=float)
        if freqs.ndim != 1 or freqs.size < 10:
            raise ValueError("need at least 10 frequency samples")
        if not np.all(np.isfinite(freqs)):
            raise ValueError("frequencies must be finite")
        if not np.all(np.diff(freqs) > 0.0):
            raise ValueError("frequencies must be strictly increasing")
        if self.kind in COMPLEX_KINDS:
            values = np.asarray(self.values, dtype=complex)
        elif self.kind in POWER_KINDS:
            values = np.asarray(self.values, dtype=float)
        else:
            raise ValueError(
                f"kind must be one of {COMPLEX_KINDS + POWER_KINDS}, got {self.kind!r}"
            )
        if values.shape != freqs.shape:
            raise ValueError("values must match frequencies in length")
        if not np.all(np.isfinite(values)):
            raise ValueError("values must be finite")
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "values", values)
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if w.shape != freqs.shape or not np.all(np.isfinite(w) & (w > 0.0)):
                raise ValueError("weights must be positive, finite, one per sample")
            object.__setattr__(self, "weights", w)

    @property
    def is_complex(self) -> bool:
        return self.kind in COMPLEX_KINDS


@dataclass(frozen=True)
class FitResult:
    """Estimates with standard errors from the numeric Jacobian.

    ``converged=False`` marks the estimates as non-authoritative: the
    optimizer hit its cap, diverged, or the Jacobian at the optimum was
    too ill-conditioned to trust.  Fixed parameters report stderr 0.
    """

    model: str
    estimates: dict
    stderr: dict
    rss: float
    iterations: int
    converged: bool
    fixed: tuple = ()


@dataclass(frozen=True)
class NoiseModel:
    """Seeded measurement noise.

    "additive": complex Gaussian, ``level`` is the per-quadrature
    standard deviation; valid for complex-valued kinds.
    "multiplicative": value *= 1 + level*N(0,1); valid for power kinds.
    """

    kind: str
    level: float

    def __post_init__(self) -> None:
        if self.kind not in ("additive", "multiplicative"):
            raise ValueError(f"noise kind must be additive|multiplicative, got {self.kind!r}")
        level = _checked_float("level", self.level)
        if level < 0.0:
            raise ValueError(f"noise level must be nonnegative, got {level!r}")
        object.__setattr__(self, "level", level)


def lorentzian(freqs, omega_c, kappa_c, amplitude, baseline):
    """amplitude * kappa_c**2 / ((f - omega_c)**2 + kappa_c**2) + baseline."""
    f = np.asarray(freqs, dtype=float)
    return amplitude * kappa_c**2 / ((f - omega_c) ** 2 + kappa_c**2) + baseline


def coupled_param_names(kind: str) -> tuple:
    """Fit-parameter names for a dataset kind (reflection or transmission)."""
    if kind in ("s11", "s11_power"):
        return REFLECTION_PARAMS
    if kind in ("s21", "s21_power"):
        return TRANSMISSION_PARAMS
    raise ValueError(f"no coupled model for dataset kind {kind!r}")


def _coupled_system(kind: str, values: dict) -> SystemParams:
    if kind in ("s11", "s11_power"):
        # Reflection sees only the lumped non-measured loss; fold it into
        # the second-port slot so kappa_c comes out right.
        return SystemParams(
            omega_c=values["omega_c"],
            omega_m=values["omega_m"],
            g_m=values["g_m"],
            kappa_1=values["kappa_1"],
            kappa_2=values["kappa_loss"],
            kappa_int=0.0,
            gamma_m=values["gamma_m"],
        )
    return SystemParams(
        omega_c=values["omega_c"],
        omega_m=values["omega_m"],
        g_m=values["g_m"],
        kappa_1=values["kappa_1"],
        kappa_2=values["kappa_2"],
        kappa_int=values["kappa_int"],
        gamma_m=values["gamma_m"],
    )


def coupled_model(freqs, kind: str, values: dict):
    """Model spectrum for the named dataset kind at the given parameters."""
    sp = s_matrix(np.asarray(freqs, dtype=float), _coupled_system(kind, values))
    wave = sp.s11 if kind.startswith("s11") else sp.s21
    if kind in POWER_KINDS:
        return np.abs(wave) ** 2
    return wave


def _pack(names, values: dict) -> np.ndarray:
    theta = np.empty(len(names))
    for k, name in enumerate(names):
        v = float(values[name])
        if name in _RATE_PARAMS:
            if not v > 0.0:
                raise ValueError(f"guess for rate {name} must be positive, got {v!r}")
            theta[k] = math.log(v)
        else:
            theta[k] = v
    return theta


def _unpack(names, theta) -> dict:
    return {
        name: (math.exp(theta[k]) if name in _RATE_PARAMS else float(theta[k]))
        for k, name in enumerate(names)
    }


def _numeric_jacobian(fun, theta: np.ndarray, rel: float = 1e-6) -> np.ndarray:
    r0 = fun(theta)
    jac = np.empty((r0.size, theta.size))
    for k in range(theta.size):
        h = rel * max(1.0, abs(theta[k]))
        up = theta.copy()
        dn = theta.copy()
        up[k] += h
        dn[k] -= h
        jac[:, k] = (fun(up) - fun(dn)) / (2.0 * h)
    return jac


def _condition(jac: np.ndarray) -> float:
    s = np.linalg.svd(jac, compute_uv=False)
    if s.size == 0 or not np.all(np.isfinite(s)) or s[-1] == 0.0:
        return math.inf
    return float(s[0] / s[-1])


def _stderr_from_jacobian(jac: np.ndarray, rss: float) -> np.ndarray:
    m, n = jac.shape
    dof = m - n
    if dof <= 0:
        return np.full(n, math.inf)
    try:
        cov = np.linalg.inv(jac.T @ jac) * (rss / dof)
    except np.linalg.LinAlgError:
        return np.full(n, math.inf)
    diag = np.diag(cov)
    return np.sqrt(np.where(diag >= 0.0, diag, np.inf))


def _run_fit(model: str, names, free, start: dict, residual_fn) -> FitResult:
    """Shared optimizer driver.

    ``start`` holds every parameter (fixed ones keep their value);
    ``free`` lists the optimized subset in canonical order.
    """
    free = tuple(free)
    theta0 = _pack(free, start)

    def fun(theta: np.ndarray) -> np.ndarray:
        values = dict(start)
        values.update(_unpack(free, theta))
        return residual_fn(values)

    r0 = fun(theta0)
    rss0 = float(np.dot(r0, r0))
    iterations = 0
    fallback = False
    theta_best = theta0
    ok = False
    jac = None
    try:
        res = least_squares(
            fun,
            theta0,
            method="trf",
            jac="2-point",
            x_scale="jac",
            xtol=1e-10,
            ftol=1e-10,
            max_nfev=_ITERATION_CAP * (len(free) + 1),
        )
        iterations = int(res.nfev)
        theta_best = res.x
        jac = res.jac
        ok = bool(res.status > 0) and np.all(np.isfinite(res.x))
    except (ValueError, np.linalg.LinAlgError):
        ok = False
    if ok and jac is not None and _condition(jac) >= _JAC_COND_LIMIT:
        fallback = True
    if not ok or fallback:
        nm = minimize(
            lambda th: float(np.dot(fun(th), fun(th))),
            theta_best if ok else theta0,
            method="Nelder-Mead",
            options={
                "maxiter": _ITERATION_CAP * (len(free) + 1),
                "xatol": 1e-10,
                "fatol": 1e-12,
            },
        )
        iterations += int(nm.nit)
        if np.all(np.isfinite(nm.x)):
            theta_best = nm.x
            ok = bool(nm.success)
        else:
            ok = False
        jac = None

    r_best = fun(theta_best)
    rss = float(np.dot(r_best, r_best))
    if rss > rss0:
        # Never report worse than the starting point.
        theta_best, rss, ok = theta0, rss0, False
        jac = None
    if jac is None:
        jac = _numeric_jacobian(fun, theta_best)
    cond = _condition(jac)
    stderr_theta = _stderr_from_jacobian(jac, rss)
    converged = bool(ok and math.isfinite(rss) and cond < _JAC_COND_LIMIT)

    solution = _unpack(free, theta_best)
    estimates = {}
    stderr = {}
    fixed = tuple(n for n in names if n not in free)
    for name in names:
        if name in solution:
            k = free.index(name)
            estimates[name] = solution[name]
            scale = solution[name] if name in _RATE_PARAMS else 1.0
            stderr[name] = float(stderr_theta[k] * abs(scale))
        else:
            estimates[name] = float(start[name])
            stderr[name] = 0.0
    return FitResult(
        model=model,
        estimates=estimates,
        stderr=stderr,
        rss=rss,
        iterations=iterations,
        converged=converged,
        fixed=fixed,
    )


def _residual_weights(data: SpectrumDataset) -> np.ndarray:
    if data.weights is None:
        return np.ones(data.freqs.size)
    return np.sqrt(data.weights)


def _lorentzian_guess(data: SpectrumDataset) -> dict:
    values = data.values
    baseline = float(np.median(values))
    idx = int(np.argmax(np.abs(values - baseline)))
    omega_c = float(data.freqs[idx])
    amplitude = float(values[idx] - baseline)
    span = float(data.freqs[-1] - data.freqs[0])
    # Half width at half depth, walked outward from the extremum.
    half = baseline + 0.5 * amplitude
    width = 0.0
    for step in (1, -1):
        j = idx
        while 0 < j < values.size - 1:
            j += step
            crossed = values[j] <= half if amplitude > 0 else values[j] >= half
            if crossed:
                width = max(width, abs(float(data.freqs[j] - data.freqs[idx])))
                break
    if width <= 0.0:
        width = 0.1 * span
    return {
        "omega_c": omega_c,
        "kappa_c": width,
        "amplitude": amplitude,
        "baseline": baseline,
    }


def fit_lorentzian(data: SpectrumDataset, guess: dict | None = None) -> FitResult:
    """Fit A*kappa_c**2/((f-omega_c)**2+kappa_c**2) + B to power data.

    The default guess puts the center at the global extremum and the
    linewidth at the half-width at half-depth.  The caller should supply
    data spanning at least a few linewidths.  A center estimate that
    escapes the data span is reported with ``converged=False``.
    """
    if data.is_complex:
        raise ValueError("lorentzian fit expects a power dataset, not complex waves")
    start = _lorentzian_guess(data)
    if guess is not None:
        unknown = set(guess) - set(LORENTZIAN_PARAMS)
        if unknown:
            raise ValueError(f"unknown lorentzian parameters: {sorted(unknown)}")
        start.update({k: float(v) for k, v in guess.items()})
    # The amplitude sign is decided by the guess; fitting |A| through a
    # sign would need log-reparam, and a dip (A < 0) is legitimate.
    sqrt_w = _residual_weights(data)

    def residual(values: dict) -> np.ndarray:
        model = lorentzian(data.freqs, **values)
        return sqrt_w * (model - data.values)

    result = _run_fit("lorentzian", LORENTZIAN_PARAMS, LORENTZIAN_PARAMS, start, residual)
    omega = result.estimates["omega_c"]
    if not (data.freqs[0] <= omega <= data.freqs[-1]):
        result = replace(result, converged=False)
    return result


def fit_coupled(
    data: SpectrumDataset,
    fixed=(),
    guess: SystemParams | None = None,
    *,
    free=None,
) -> FitResult:
    """Fit the coupled cavity-magnon model to a spectrum.

    The model follows the dataset kind: s11/s11_power use the reflection
    model, whose loss parameters are ``kappa_1`` and the lump
    ``kappa_loss``; s21/s21_power use the transmission model with all
    three decay channels, of which at most two may be free at once.
    ``fixed`` pins parameters at their guess value; alternatively pass
    ``free`` (exclusive with ``fixed``) to name the optimized subset.

    Raises IdentifiabilityError for parameter requests the data cannot
    constrain, ValueError for unknown names or a missing guess.
    """
    if guess is None:
        raise ValueError("fit_coupled needs an initial SystemParams guess")
    names = coupled_param_names(data.kind)
    reflection = names is REFLECTION_PARAMS

    requested = set(free) if free is not None else set(fixed)
    if free is not None and fixed:
        raise ValueError("pass either fixed or free, not both")
    if reflection and requested & {"kappa_2", "kappa_int"}:
        raise IdentifiabilityError(
            "a reflection spectrum constrains only kappa_loss = kappa_2 +"
            " kappa_int, not the split; request kappa_loss instead"
        )
    unknown = requested - set(names)
    if unknown:
        raise ValueError(f"unknown parameters for this model: {sorted(unknown)}")
    if free is not None:
        free_names = tuple(n for n in names if n in requested)
    else:
        free_names = tuple(n for n in names if n not in requested)
    if not free_names:
        raise ValueError("no free parameters left to fit")
    if not reflection:
        open_kappas = {"kappa_1", "kappa_2", "kappa_int"} & set(free_names)
        if len(open_kappas) == 3:
            raise IdentifiabilityError(
                "a transmission spectrum constrains sqrt(kappa_1*kappa_2) and"
                " the total linewidth only; fix at least one decay channel"
            )

    start = {
        "omega_c": guess.omega_c,
        "omega_m": guess.omega_m,
        "g_m": guess.g_m,
        "gamma_m": guess.gamma_m,
        "kappa_1": guess.kappa_1,
    }
    if reflection:
        start["kappa_loss"] = guess.kappa_2 + guess.kappa_int
    else:
        start["kappa_2"] = guess.kappa_2
        start["kappa_int"] = guess.kappa_int

    sqrt_w = _residual_weights(data)
    complex_data = data.is_complex

    def residual(values: dict) -> np.ndarray:
        model = coupled_model(data.freqs, data.kind, values)
        diff = model - data.values
        if complex_data:
            return np.concatenate((sqrt_w * diff.real, sqrt_w * diff.imag))
        return sqrt_w * diff

    model_label = "reflection" if reflection else "transmission"
    return _run_fit(model_label, names, free_names, start, residual)


def synth_spectrum(
    p: SystemParams,
    band,
    step: float,
    noise: NoiseModel | None = None,
    seed=None,
    kind: str = "s11",
) -> SpectrumDataset:
    """Evaluate a model spectrum on a grid, with optional seeded noise.

    ``band`` is (lo, hi) in MHz.  Zero-noise output equals the s_matrix
    evaluation bit for bit; with a NoiseModel the draw is deterministic
    per seed.  Additive noise requires a complex kind, multiplicative a
    power kind.
    """
    lo, hi = (float(band[0]), float(band[1]))
    freqs = linear_grid(lo, hi, step)
    if kind not in COMPLEX_KINDS + POWER_KINDS:
        raise ValueError(f"unknown spectrum kind {kind!r}")
    sp = s_matrix(freqs, p)
    wave = sp.s11 if kind.startswith("s11") else sp.s21
    values = np.abs(wave) ** 2 if kind in POWER_KINDS else wave
    if noise is not None and noise.level > 0.0:
        rng = np.random.default_rng(seed)
        if noise.kind == "additive":
            if kind not in COMPLEX_KINDS:
                raise ValueError("additive noise applies to complex-valued kinds")
            values = values + noise.level * (
                rng.standard_normal(freqs.size) + 1j * rng.standard_normal(freqs.size)
            )
        else:
            if kind not in POWER_KINDS:
                raise ValueError("multiplicative noise applies to power kinds")
            values = values * (1.0 + noise.level * rng.standard_normal(freqs.size))
    return SpectrumDataset(freqs=freqs, values=values, kind=kind)


def estimate_coupled_guess(data: SpectrumDataset, gamma_m: float = 1.0) -> SystemParams:
    """Rough starting point for fit_coupled from a reflection spectrum.

    Puts the cavity (and magnon) frequency between the two deepest dips
    when an anti-crossing is resolved, the coupling at half their
    separation, and splits the dip width between the port and the lump.
    Values are deliberately coarse; the optimizer does the rest.
    """
    power = np.abs(data.values) ** 2 if data.is_complex else np.asarray(data.values)
    dips = [
        j
        for j in range(1, power.size - 1)
        if power[j] < power[j - 1] and power[j] <= power[j + 1]
    ]
    dips.sort(key=lambda j: power[j])
    span = float(data.freqs[-1] - data.freqs[0])
    step = float(np.min(np.diff(data.freqs)))
    if len(dips) >= 2:
        f1, f2 = sorted((float(data.freqs[dips[0]]), float(data.freqs[dips[1]])))
        omega_c = 0.5 * (f1 + f2)
        g_m = max(0.5 * (f2 - f1), step)
    else:
        j = dips[0] if dips else int(np.argmin(power))
        omega_c = float(data.freqs[j])
        g_m = max(0.125 * span, step)
    kappa = max(0.05 * span, step)
    return SystemParams(
        omega_c=omega_c,
        omega_m=omega_c,
        g_m=g_m,
        kappa_1=0.5 * kappa,
        kappa_2=kappa,
        kappa_int=0.0,
        gamma_m=gamma_m,
    )

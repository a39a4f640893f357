"""Scattering response of the two-port cavity with a magnon mode.

Input-output theory gives every S-parameter a common denominator

    D(nu) = i*(nu - omega_c) - kappa_c + g_m**2 / (i*(nu - omega_m) - gamma_m)

with kappa_c = kappa_1 + kappa_2 + kappa_int, and

    S21 = S12 = -2*sqrt(kappa_1*kappa_2) / D
    S11 = -1 - 2*kappa_1 / D
    S22 = -1 - 2*kappa_2 / D.

Feeding both ports coherently, with the feed-1 amplitude sqrt(q) times
the feed-2 amplitude and advanced by delta_phi, superposes the outgoing
fields at each port:

    S1_out = sqrt(q)*exp(-i*delta_phi)*S11 + S12
    S2_out = S22 + sqrt(q)*exp(-i*delta_phi)*S21

and the total outgoing power is |S1_out|**2 + |S2_out|**2 for unit
feed-2 power.  Perfect absorption (both outputs zero simultaneously)
requires delta_phi = 0 and q = kappa_1/kappa_2, and then happens exactly
at the real eigenfrequencies of the gain-loss balanced system.

Frequency arguments accept a scalar or a 1-D array; scalar input returns
builtin complex/float values and array input returns matching arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularModelError
from .params import FeedConfig, SystemParams, _checked_float, _checked_rate

__all__ = [
    "SParams",
    "TwoFeedOutput",
    "Dip",
    "CPA_DIP_THRESHOLD",
    "s_matrix",
    "two_feed_output",
    "cpa_feed_conditions",
    "reduced_output",
    "find_cpa_dips",
]

# A refined minimum counts as a perfect-absorption dip when the total
# outgoing power falls below this fraction of the injected power (-30 dB).
CPA_DIP_THRESHOLD = 1e-3


@dataclass(frozen=True)
class SParams:
    """Two-port S-parameters at one probe frequency (or per-element arrays).

    The model is reciprocal, so ``s12`` always carries the identical
    value (the same object for array input) as ``s21``.
    """

    s11: complex | np.ndarray
    s21: complex | np.ndarray
    s12: complex | np.ndarray
    s22: complex | np.ndarray


@dataclass(frozen=True)
class TwoFeedOutput:
    """Outgoing fields and total power under coherent two-feed drive.

    Powers are normalized to unit feed-2 input power, so the injected
    power is 1 + q and ``total_power`` equals |s1_out|**2 + |s2_out|**2.
    """

    s1_out: complex | np.ndarray
    s2_out: complex | np.ndarray
    total_power: float | np.ndarray


@dataclass(frozen=True)
class Dip:
    """A refined output-power minimum below the absorption threshold."""

    freq: float
    power: float
    power_rel: float


def _freq_array(freq: object) -> tuple[np.ndarray, bool]:
    arr = np.asarray(freq, dtype=float)
    if arr.ndim > 1:
        raise ValueError(f"freq must be a scalar or 1-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("freq values must be finite")
    return arr, arr.ndim == 0


def _denominator(freqs: np.ndarray, p: SystemParams) -> np.ndarray:
    den = 1j * (freqs - p.omega_c) - p.kappa_c
    if p.g_m != 0.0:
        if p.gamma_m == 0.0 and np.any(freqs == p.omega_m):
            raise SingularModelError(
                "S-parameters are singular at freq = omega_m when gamma_m = 0 "
                "and the magnon is coupled; probe off the undamped line"
            )
        den = den + (p.g_m * p.g_m) / (1j * (freqs - p.omega_m) - p.gamma_m)
    return den


def s_matrix(freq: float | np.ndarray, p: SystemParams) -> SParams:
    """Evaluate the two-port S-parameters at ``freq`` (MHz).

    Parameters
    ----------
    freq : float or 1-D array
        Probe frequency in MHz.
    p : SystemParams
        System parameters.

    Returns
    -------
    SParams
        Complex S-parameters; reciprocity makes s12 identical to s21.

    Raises
    ------
    SingularModelError
        If gamma_m = 0, g_m > 0 and a probe point sits exactly on
        omega_m, where the magnon response diverges.
    """
    freqs, scalar = _freq_array(freq)
    den = _denominator(freqs, p)
    s21 = -2.0 * math.sqrt(p.kappa_1 * p.kappa_2) / den
    s11 = -1.0 - 2.0 * p.kappa_1 / den
    s22 = -1.0 - 2.0 * p.kappa_2 / den
    if scalar:
        s21c = complex(s21)
        return SParams(s11=complex(s11), s21=s21c, s12=s21c, s22=complex(s22))
    return SParams(s11=s11, s21=s21, s12=s21, s22=s22)


def two_feed_output(
    freq: float | np.ndarray, p: SystemParams, feed: FeedConfig
) -> TwoFeedOutput:
    """Outgoing fields at both ports under coherent two-feed drive.

    The feed-2 drive has unit amplitude and the feed-1 drive is
    sqrt(feed.q) * exp(-i*feed.delta_phi); the injected power is
    1 + feed.q.
    """
    sp = s_matrix(freq, p)
    drive = math.sqrt(feed.q) * np.exp(-1j * feed.delta_phi)
    s1 = drive * sp.s11 + sp.s12
    s2 = sp.s22 + drive * sp.s21
    total = np.abs(s1) ** 2 + np.abs(s2) ** 2
    if np.ndim(total) == 0:
        return TwoFeedOutput(complex(s1), complex(s2), float(total))
    return TwoFeedOutput(s1, s2, total)


def cpa_feed_conditions(p: SystemParams) -> FeedConfig:
    """Feed settings that allow both outputs to vanish simultaneously.

    Returns delta_phi = 0 and q = kappa_1/kappa_2.  Both external
    couplings must be positive, otherwise one port cannot be driven
    against the other and a ValueError is raised.
    """
    if p.kappa_2 <= 0.0:
        raise ValueError("kappa_2 must be positive to define the feed ratio")
    if p.kappa_1 <= 0.0:
        raise ValueError("kappa_1 must be positive for a two-feed drive")
    return FeedConfig(delta_phi=0.0, q=p.kappa_1 / p.kappa_2)


def reduced_output(
    freq: float | np.ndarray,
    omega_0: float,
    gamma_m: float,
    g_m: float,
    kappa_int: float,
    q: float,
) -> TwoFeedOutput:
    """Fast-path outgoing fields for the exactly gain-loss balanced drive.

    Assumes omega_c = omega_m = omega_0, kappa_1 + kappa_2 - kappa_int =
    gamma_m, delta_phi = 0 and q = kappa_1/kappa_2.  With
    Q = i*(nu - omega_0) - gamma_m the outgoing fields collapse to

        S1_out = sqrt(q) * (|Q|**2 - g_m**2) / (Q**2 - 2*kappa_int*Q + g_m**2)
        S2_out =           (|Q|**2 - g_m**2) / (Q**2 - 2*kappa_int*Q + g_m**2)

    so both vanish exactly at nu = omega_0 +/- sqrt(g_m**2 - gamma_m**2)
    whenever g_m >= gamma_m.  Agrees with :func:`two_feed_output` whenever
    the balance conditions hold exactly.
    """
    omega_0 = _checked_float("omega_0", omega_0)
    gamma_m = _checked_rate("gamma_m", gamma_m)
    g_m = _checked_rate("g_m", g_m)
    kappa_int = _checked_rate("kappa_int", kappa_int)
    q = _checked_float("q", q)
    if q <= 0.0:
        raise ValueError(f"q must be positive, got {q!r}")

    freqs, scalar = _freq_array(freq)
    delta = freqs - omega_0
    qmode = 1j * delta - gamma_m
    # |Q|**2 - g**2 evaluated in real arithmetic to keep the zeros sharp
    num = delta * delta + gamma_m * gamma_m - g_m * g_m
    den = qmode * qmode - 2.0 * kappa_int * qmode + g_m * g_m
    s2 = num / den
    s1 = math.sqrt(q) * s2
    total = np.abs(s1) ** 2 + np.abs(s2) ** 2
    if scalar:
        return TwoFeedOutput(complex(s1), complex(s2), float(total))
    return TwoFeedOutput(s1, s2, total)


def _golden_minimize(fun, lo: float, hi: float, xatol: float) -> tuple[float, float]:
    """Golden-section minimum of a unimodal scalar function on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    invphi2 = 1.0 - invphi
    a, b = lo, hi
    h = b - a
    x1 = a + invphi2 * h
    x2 = a + invphi * h
    f1 = fun(x1)
    f2 = fun(x2)
    while h > xatol:
        if f1 <= f2:
            b = x2
            x2, f2 = x1, f1
            h = b - a
            x1 = a + invphi2 * h
            f1 = fun(x1)
        else:
            a = x1
            x1, f1 = x2, f2
            h = b - a
            x2 = a + invphi * h
            f2 = fun(x2)
    return (x1, f1) if f1 <= f2 else (x2, f2)


def find_cpa_dips(
    p: SystemParams,
    feed: FeedConfig,
    band: tuple[float, float],
    resolution: float = 0.02,
) -> list[Dip]:
    """Locate perfect-absorption dips of the total output power.

    Scans ``band`` (MHz) on a grid of ``resolution`` MHz, then refines
    every interior local minimum by golden-section search down to the
    floating-point floor (far tighter than 1e-6 MHz).  Minima whose
    refined power is below ``CPA_DIP_THRESHOLD`` of the injected power
    (-30 dB) are returned sorted by frequency.

    Under exact gain-loss balance with g_m > gamma_m this returns the
    two real eigenfrequencies of the balanced system; at g_m = gamma_m
    the two dips coalesce into one; below it no point reaches the
    threshold and the list is empty.

    Raises
    ------
    ValueError
        If the band is empty or the resolution is not positive.
    """
    lo, hi = (_checked_float("band[0]", band[0]), _checked_float("band[1]", band[1]))
    if not hi > lo:
        raise ValueError(f"band must satisfy lo < hi, got ({lo!r}, {hi!r})")
    resolution = _checked_float("resolution", resolution)
    if resolution <= 0.0:
        raise ValueError(f"resolution must be positive, got {resolution!r}")
    if (hi - lo) / resolution > 50e6:
        raise ValueError("band/resolution would need more than 5e7 scan points")

    n = int(math.floor((hi - lo) / resolution)) + 1
    freqs = np.linspace(lo, lo + resolution * (n - 1), n)
    powers = two_feed_output(freqs, p, feed).total_power
    input_power = feed.input_power
    threshold = CPA_DIP_THRESHOLD * input_power

    def power_at(nu: float) -> float:
        return two_feed_output(float(nu), p, feed).total_power

    eps = np.finfo(float).eps
    dips: list[Dip] = []
    for i in range(1, n - 1):
        if not (powers[i] <= powers[i - 1] and powers[i] <= powers[i + 1]):
            continue
        if powers[i] == powers[i - 1]:
            continue  # plateau: keep only the first sample of the run
        xatol = max(1e-12, 32.0 * eps * max(1.0, abs(freqs[i])))
        x, fx = _golden_minimize(power_at, float(freqs[i - 1]), float(freqs[i + 1]), xatol)
        if fx < threshold:
            dips.append(Dip(freq=x, power=fx, power_rel=fx / input_power))

    dips.sort(key=lambda d: d.freq)
    merged: list[Dip] = []
    for d in dips:
        if merged and abs(d.freq - merged[-1].freq) <= 0.5 * resolution:
            if d.power < merged[-1].power:
                merged[-1] = d
            continue
        merged.append(d)
    return merged

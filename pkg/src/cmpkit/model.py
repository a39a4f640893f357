"""Non-Hermitian two-mode model of the driven cavity-magnon system.

The two-feed drive compensates the external coupling loss, so the
effective dynamical matrix carries gain + i(kappa_1 + kappa_2 - kappa_int)
on the cavity entry and loss - i*gamma_m on the magnon entry.  When the
gain and loss balance (kappa_1 + kappa_2 - kappa_int = gamma_m) and the
two modes are degenerate, the matrix is gain-loss symmetric and its
eigenfrequencies

    nu_{1,2} = nu_0 +/- sqrt(g_m**2 - gamma_m**2)

are real for g_m >= gamma_m and a complex-conjugate pair for
g_m < gamma_m, coalescing at the exceptional point g_m = gamma_m.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .params import ComplexFrequency, SystemParams, _checked_float, _checked_rate

__all__ = [
    "Regime",
    "EigenDecomposition",
    "effective_hamiltonian",
    "hamiltonian_eigen",
    "cpa_eigenfrequencies",
    "pt_residuals",
    "classify_regime",
]

# Relative eigenvalue gap below which a 2x2 matrix is reported degenerate.
_DEGENERACY_RTOL = 1e-12


class Regime(enum.Enum):
    """Coupling regimes ordered by how the coupling compares to the losses."""

    STRONG = "strong"
    MIT = "mit"
    PURCELL = "purcell"
    WEAK = "weak"

    @property
    def label(self) -> str:
        return _REGIME_LABELS[self]


_REGIME_LABELS = {
    Regime.STRONG: "strong coupling",
    Regime.MIT: "magnon-induced transparency",
    Regime.PURCELL: "Purcell regime",
    Regime.WEAK: "weak coupling",
}


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues and eigenvectors of a 2x2 complex matrix.

    ``values`` is ordered by descending real part, ties broken by
    descending imaginary part.  ``vectors`` holds unit-norm column
    eigenvectors aligned with ``values``.  When ``degenerate`` is set the
    eigenvalues coincide to machine accuracy; at a defective point only
    one independent eigenvector exists and both columns repeat it.
    """

    values: tuple[ComplexFrequency, ComplexFrequency]
    vectors: np.ndarray
    degenerate: bool


def effective_hamiltonian(p: SystemParams) -> np.ndarray:
    """Effective non-Hermitian matrix of the two-feed driven system (MHz).

    Returns the 2x2 complex array

        [[omega_c + i*(kappa_1 + kappa_2 - kappa_int),  g_m],
         [g_m,                      omega_m - i*gamma_m]]

    whose eigenvalues are the complex eigenfrequencies of the hybridized
    modes under coherent two-feed drive.
    """
    gain = p.kappa_1 + p.kappa_2 - p.kappa_int
    return np.array(
        [
            [complex(p.omega_c, gain), complex(p.g_m, 0.0)],
            [complex(p.g_m, 0.0), complex(p.omega_m, -p.gamma_m)],
        ],
        dtype=complex,
    )


def hamiltonian_eigen(matrix: np.ndarray) -> EigenDecomposition:
    """Closed-form eigendecomposition of a 2x2 complex matrix.

    For [[a, b], [c, d]] the eigenvalues are (a + d)/2 +/- s with
    s = sqrt(((a - d)/2)**2 + b*c) on the principal branch.  Each
    eigenvector is taken from whichever of (b, lam - a) and (lam - d, c)
    has the larger norm, then normalized; for a scalar matrix the
    coordinate basis is returned.

    Raises
    ------
    ValueError
        If ``matrix`` is not a finite 2x2 complex array.
    """
    m = np.asarray(matrix, dtype=complex)
    if m.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m.view(float))):
        raise ValueError("matrix entries must be finite")

    a, b = complex(m[0, 0]), complex(m[0, 1])
    c, d = complex(m[1, 0]), complex(m[1, 1])
    mean = 0.5 * (a + d)
    split = np.sqrt(complex(0.25 * (a - d) ** 2 + b * c))
    lam = sorted((mean + split, mean - split), key=lambda z: (-z.real, -z.imag))

    scale = max(1.0, abs(lam[0]), abs(lam[1]))
    degenerate = abs(lam[0] - lam[1]) <= _DEGENERACY_RTOL * scale

    def eigvec(lam_k: complex) -> np.ndarray:
        cand_1 = np.array([b, lam_k - a], dtype=complex)
        cand_2 = np.array([lam_k - d, c], dtype=complex)
        v = cand_1 if np.linalg.norm(cand_1) >= np.linalg.norm(cand_2) else cand_2
        norm = np.linalg.norm(v)
        if norm == 0.0:
            return None  # scalar matrix, no direction preferred
        return v / norm

    v1 = eigvec(lam[0])
    v2 = eigvec(lam[1])
    if v1 is None or v2 is None:
        vectors = np.eye(2, dtype=complex)
    elif degenerate:
        vectors = np.column_stack([v1, v1])
    else:
        vectors = np.column_stack([v1, v2])

    values = (
        ComplexFrequency(lam[0].real, lam[0].imag),
        ComplexFrequency(lam[1].real, lam[1].imag),
    )
    return EigenDecomposition(values=values, vectors=vectors, degenerate=degenerate)


def cpa_eigenfrequencies(
    omega_0: float, g_m: float, gamma_m: float
) -> tuple[ComplexFrequency, ComplexFrequency]:
    """Eigenfrequencies of the gain-loss balanced system at degeneracy.

    With both modes at ``omega_0`` and balanced gain and loss the pair is

        omega_0 +/- sqrt(g_m**2 - gamma_m**2)    (g_m >= gamma_m, both real)
        omega_0 +/- i*sqrt(gamma_m**2 - g_m**2)  (g_m < gamma_m, conjugates)

    ordered by descending real part, ties broken by descending imaginary
    part.  In the real-pair phase these frequencies are exactly the
    perfect-absorption frequencies of the two-feed drive.
    """
    omega_0 = _checked_float("omega_0", omega_0)
    g_m = _checked_rate("g_m", g_m)
    gamma_m = _checked_rate("gamma_m", gamma_m)
    if g_m >= gamma_m:
        s = math.sqrt(g_m * g_m - gamma_m * gamma_m)
        return (
            ComplexFrequency(omega_0 + s, 0.0),
            ComplexFrequency(omega_0 - s, 0.0),
        )
    s = math.sqrt(gamma_m * gamma_m - g_m * g_m)
    return (
        ComplexFrequency(omega_0, s),
        ComplexFrequency(omega_0, -s),
    )


def pt_residuals(p: SystemParams) -> tuple[float, float]:
    """How far the parameters sit from exact gain-loss symmetry (MHz).

    Returns ``(detuning, mismatch)`` with detuning = omega_c - omega_m and
    mismatch = (kappa_1 + kappa_2 - kappa_int) - gamma_m.  Both vanish when
    the effective matrix is exactly gain-loss symmetric.
    """
    detuning = p.omega_c - p.omega_m
    mismatch = p.kappa_1 + p.kappa_2 - p.kappa_int - p.gamma_m
    return detuning, mismatch


def classify_regime(g_m: float, kappa_c: float, gamma_m: float) -> Regime:
    """Classify the coupling regime from g_m, kappa_c and gamma_m.

    STRONG needs the coupling to exceed both linewidths, MIT needs
    kappa_c > g_m > gamma_m, PURCELL needs gamma_m > g_m > kappa_c and
    WEAK holds when both linewidths dominate.  Boundary ties fall to the
    weaker regime, so g_m = gamma_m < kappa_c (the exceptional point of
    the balanced system) classifies as WEAK.  The classification depends
    only on the ratios, so a common positive rescaling leaves it fixed.
    """
    g_m = _checked_rate("g_m", g_m)
    kappa_c = _checked_rate("kappa_c", kappa_c)
    gamma_m = _checked_rate("gamma_m", gamma_m)
    if g_m > kappa_c and g_m > gamma_m:
        return Regime.STRONG
    if g_m > gamma_m:
        return Regime.MIT
    if g_m > kappa_c:
        return Regime.PURCELL
    return Regime.WEAK

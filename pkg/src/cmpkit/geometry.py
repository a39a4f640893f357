"""Geometry and calibration maps.

Converts physical handles (cavity dimensions, static field, sphere
displacement) into the model frequencies and rates.  Cavity mode
frequencies come out in GHz because they are compared against carrier
frequencies; everything else stays in the package-wide MHz convention.
"""
from __future__ import annotations

import math

from .params import CavityGeometry, CouplingMap, MagnonFieldMap, _checked_float

__all__ = [
    "SPEED_OF_LIGHT_M_PER_S",
    "cavity_mode_frequency",
    "mode_field_profile",
    "magnon_frequency",
    "coupling_from_displacement",
]

SPEED_OF_LIGHT_M_PER_S = 299792458.0


def _checked_mode_index(n: object) -> int:
    if not isinstance(n, int) or isinstance(n, bool):
        raise ValueError(f"mode index n must be an integer, got {n!r}")
    if n < 1:
        raise ValueError(f"mode index n must be at least 1, got {n}")
    return n


def cavity_mode_frequency(geometry: CavityGeometry, n: int) -> float:
    """Resonance frequency of the TE(1,0,n) mode family, in GHz.

    The mode keeps one half-wave across ``width_mm`` and stacks ``n``
    half-waves along ``length_mm``:

        f = (c / 2) * sqrt((1 / width)**2 + (n / length)**2)

    Parameters
    ----------
    geometry : CavityGeometry
        Interior dimensions in mm.
    n : int
        Number of half-waves along the long edge, n >= 1.

    Returns
    -------
    float
        Mode frequency in GHz.
    """
    n = _checked_mode_index(n)
    width_m = geometry.width_mm * 1e-3
    length_m = geometry.length_mm * 1e-3
    f_hz = 0.5 * SPEED_OF_LIGHT_M_PER_S * math.sqrt(
        (1.0 / width_m) ** 2 + (n / length_m) ** 2
    )
    return f_hz * 1e-9


def mode_field_profile(geometry: CavityGeometry, x_mm: float, n: int) -> float:
    """Normalized microwave field along the long edge at mid-height.

    The standing wave vanishes at both end walls and carries ``n``
    antinodes, so with x measured from the cavity centre

        profile(x) = sin(n * pi * (length/2 - x) / length)

    which is +1 at the centre for n = 1 and has a node there for n = 2
    with antinodes of opposite sign at x = +/- length/4.

    Raises
    ------
    ValueError
        If ``x_mm`` lies outside the cavity or ``n`` is invalid.
    """
    n = _checked_mode_index(n)
    x = _checked_float("x_mm", x_mm)
    half = 0.5 * geometry.length_mm
    if abs(x) > half:
        raise ValueError(
            f"x_mm = {x!r} lies outside the cavity (|x| <= {half!r} mm)"
        )
    return math.sin(n * math.pi * (half - x) / geometry.length_mm)


def magnon_frequency(field_map: MagnonFieldMap, b0_mT: float) -> float:
    """Magnon frequency (MHz) for a static field ``b0_mT`` (mT).

    The bias field must be nonnegative; the map is strictly increasing
    in the field.
    """
    b0 = _checked_float("b0_mT", b0_mT)
    if b0 < 0.0:
        raise ValueError(f"b0_mT must be nonnegative, got {b0!r}")
    return field_map.gamma_e * b0 + field_map.offset


def coupling_from_displacement(coupling: CouplingMap, x_mm: float) -> float:
    """Coupling rate g_m (MHz) for a sphere displacement ``x_mm`` (mm).

    Valid only inside the calibrated window |x| <= ``valid_range_mm``;
    outside it the linear model no longer tracks the mode profile and a
    ValueError names the window.
    """
    x = _checked_float("x_mm", x_mm)
    if abs(x) > coupling.valid_range_mm:
        raise ValueError(
            f"displacement {x!r} mm outside the calibrated window "
            f"|x| <= {coupling.valid_range_mm!r} mm"
        )
    return coupling.slope * abs(x)

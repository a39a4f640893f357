"""Parameter containers shared across the toolkit.

Unit conventions used throughout the package unless a name says otherwise:

* frequencies and rates are ordinary (cyclic, not angular) frequencies in MHz,
* displacements are millimetres, phases are radians,
* fields oscillate as exp(-i 2 pi nu t), so a positive imaginary part of a
  complex eigenfrequency means growth and a negative one means decay.

The containers are frozen dataclasses; every constructor validates its
fields so downstream numerics never see non-finite or negative-rate input.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SystemParams",
    "FeedConfig",
    "ComplexFrequency",
    "CavityGeometry",
    "MagnonFieldMap",
    "CouplingMap",
    "PerturbationTable",
    "DEFAULT_PERTURBATION",
]


def _checked_float(name: str, value: object) -> float:
    try:
        out = float(value)  # type: ignore[arg-type]
    except (TypeError, ValueError) as exc:
        raise ValueError(f"{name} must be a real number, got {value!r}") from exc
    if not math.isfinite(out):
        raise ValueError(f"{name} must be finite, got {out!r}")
    return out


def _checked_rate(name: str, value: object) -> float:
    out = _checked_float(name, value)
    if out < 0.0:
        raise ValueError(f"{name} must be nonnegative, got {out!r}")
    return out


@dataclass(frozen=True)
class SystemParams:
    """Parameters of the coupled cavity-magnon system, all in MHz.

    Attributes
    ----------
    omega_c : float
        Cavity resonance frequency.
    omega_m : float
        Magnon resonance frequency.
    g_m : float
        Cavity-magnon coupling rate.
    kappa_1, kappa_2 : float
        External coupling rates of feed 1 and feed 2.
    kappa_int : float
        Internal cavity dissipation rate.
    gamma_m : float
        Magnon damping rate.
    """

    omega_c: float
    omega_m: float
    g_m: float
    kappa_1: float
    kappa_2: float
    kappa_int: float
    gamma_m: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "omega_c", _checked_float("omega_c", self.omega_c))
        object.__setattr__(self, "omega_m", _checked_float("omega_m", self.omega_m))
        object.__setattr__(self, "g_m", _checked_rate("g_m", self.g_m))
        object.__setattr__(self, "kappa_1", _checked_rate("kappa_1", self.kappa_1))
        object.__setattr__(self, "kappa_2", _checked_rate("kappa_2", self.kappa_2))
        object.__setattr__(self, "kappa_int", _checked_rate("kappa_int", self.kappa_int))
        object.__setattr__(self, "gamma_m", _checked_rate("gamma_m", self.gamma_m))

    @property
    def kappa_c(self) -> float:
        """Total cavity linewidth kappa_1 + kappa_2 + kappa_int."""
        return self.kappa_1 + self.kappa_2 + self.kappa_int


@dataclass(frozen=True)
class FeedConfig:
    """Two-feed drive settings.

    ``delta_phi`` is the phase advance of the feed-1 drive relative to
    feed 2, in radians; it is normalized into (-pi, pi] on construction.
    ``q`` is the feed-1 to feed-2 input power ratio and must be positive,
    so the feed-1 field amplitude is sqrt(q) times the feed-2 amplitude.
    """

    delta_phi: float
    q: float

    def __post_init__(self) -> None:
        phi = _checked_float("delta_phi", self.delta_phi)
        phi = math.remainder(phi, math.tau)
        if phi <= -math.pi:
            phi = math.pi
        object.__setattr__(self, "delta_phi", phi)
        q = _checked_float("q", self.q)
        if q <= 0.0:
            raise ValueError(f"q must be positive, got {q!r}")
        object.__setattr__(self, "q", q)

    @property
    def input_power(self) -> float:
        """Total injected power for unit feed-2 power, 1 + q."""
        return 1.0 + self.q


@dataclass(frozen=True)
class ComplexFrequency:
    """A complex eigenfrequency split into real and imaginary parts (MHz)."""

    re: float
    im: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "re", _checked_float("re", self.re))
        object.__setattr__(self, "im", _checked_float("im", self.im))

    def as_complex(self) -> complex:
        return complex(self.re, self.im)


@dataclass(frozen=True)
class CavityGeometry:
    """Interior dimensions of a rectangular microwave cavity, in mm.

    ``length_mm`` is the longest edge; standing-wave modes put their
    half-wave pattern along it and it is the axis the magnetic sphere
    travels on, with x = 0 at the cavity centre.  ``width_mm`` is the
    transverse edge carrying a single half-wave and ``height_mm`` is the
    smallest edge, along which the mode is uniform.
    """

    length_mm: float
    width_mm: float
    height_mm: float

    def __post_init__(self) -> None:
        for name in ("length_mm", "width_mm", "height_mm"):
            value = _checked_float(name, getattr(self, name))
            if value <= 0.0:
                raise ValueError(f"{name} must be positive, got {value!r}")
            object.__setattr__(self, name, value)
        if self.length_mm < self.width_mm:
            raise ValueError(
                "length_mm must be the longest edge: "
                f"got length {self.length_mm!r} < width {self.width_mm!r}"
            )


@dataclass(frozen=True)
class MagnonFieldMap:
    """Affine map from static magnetic field to magnon frequency.

    nu_m = gamma_e * B0 + offset, with ``gamma_e`` in MHz per mT and
    ``offset`` an anisotropy shift in MHz.
    """

    gamma_e: float = 28.0
    offset: float = 0.0

    def __post_init__(self) -> None:
        gamma_e = _checked_float("gamma_e", self.gamma_e)
        if gamma_e <= 0.0:
            raise ValueError(f"gamma_e must be positive, got {gamma_e!r}")
        object.__setattr__(self, "gamma_e", gamma_e)
        object.__setattr__(self, "offset", _checked_float("offset", self.offset))


@dataclass(frozen=True)
class CouplingMap:
    """Linear map from sphere displacement to coupling rate.

    g_m = slope * |x| for |x| <= valid_range_mm; the magnitude appears
    because the mode field is antisymmetric about the cavity centre while
    the coupling rate follows its magnitude.
    """

    slope: float = 1.3
    valid_range_mm: float = 4.0

    def __post_init__(self) -> None:
        slope = _checked_float("slope", self.slope)
        if slope <= 0.0:
            raise ValueError(f"slope must be positive, got {slope!r}")
        object.__setattr__(self, "slope", slope)
        rng = _checked_float("valid_range_mm", self.valid_range_mm)
        if rng <= 0.0:
            raise ValueError(f"valid_range_mm must be positive, got {rng!r}")
        object.__setattr__(self, "valid_range_mm", rng)


@dataclass(frozen=True)
class PerturbationTable:
    """Displacement-dependent overrides of cavity parameters.

    Inserting the sphere and its support rod into the cavity shifts the
    cavity resonance and internal loss with position.  The table holds
    sample points (``x_mm`` strictly increasing) and ``lookup`` linearly
    interpolates between them; outside the sampled range the end values
    are held constant.
    """

    x_mm: tuple[float, ...]
    omega_c: tuple[float, ...]
    kappa_int: tuple[float, ...]

    def __post_init__(self) -> None:
        x = tuple(_checked_float("x_mm", v) for v in self.x_mm)
        wc = tuple(_checked_float("omega_c", v) for v in self.omega_c)
        ki = tuple(_checked_rate("kappa_int", v) for v in self.kappa_int)
        if len(x) < 2:
            raise ValueError("PerturbationTable needs at least two sample points")
        if not (len(x) == len(wc) == len(ki)):
            raise ValueError("PerturbationTable columns must have equal length")
        if any(x[i] >= x[i + 1] for i in range(len(x) - 1)):
            raise ValueError("x_mm samples must be strictly increasing")
        object.__setattr__(self, "x_mm", x)
        object.__setattr__(self, "omega_c", wc)
        object.__setattr__(self, "kappa_int", ki)

    def lookup(self, x: float) -> tuple[float, float]:
        """Return (omega_c, kappa_int) at displacement ``x`` (mm)."""
        xv = _checked_float("x", x)
        wc = float(np.interp(xv, self.x_mm, self.omega_c))
        ki = float(np.interp(xv, self.x_mm, self.kappa_int))
        return wc, ki


# Default override table for the shipped device parameters.  The support
# rod enters from the negative-x side, so insertion depth grows as x
# decreases: the resonance is pulled down and the internal loss up.
DEFAULT_PERTURBATION = PerturbationTable(
    x_mm=(-4.0, 4.0),
    omega_c=(10023.0, 10024.2),
    kappa_int=(1.61, 1.55),
)

"""Seeded draw helpers shared by the randomized suites.

Exact-balance draws are built from dyadic rationals (integer multiples of
2**-20), which makes kappa_1 + kappa_2 - kappa_int == gamma_m hold bitwise.
Several invariants (mirror symmetry, absorption zeros) are only meaningful
under that exact balance.
"""
import numpy as np

from cmpkit import FeedConfig, SystemParams


def dyadic(rng: np.random.Generator, lo: float, hi: float, scale: int = 20) -> float:
    """Random dyadic rational in [lo, hi): an integer multiple of 2**-scale.

    Sums and differences of a few such values are exact in binary floats.
    """
    steps = int(round((hi - lo) * (1 << scale)))
    return lo + rng.integers(0, steps) * 2.0**-scale


def draw_balanced(rng: np.random.Generator) -> tuple[SystemParams, FeedConfig]:
    """Random exactly balanced system and its matched two-feed drive."""
    omega_0 = float(rng.integers(9000, 11000))
    kappa_1 = dyadic(rng, 0.5, 2.5)
    kappa_2 = dyadic(rng, 0.5, 2.5)
    kappa_int = dyadic(rng, 0.25, min(2.0, kappa_1 + kappa_2 - 0.25))
    gamma_m = kappa_1 + kappa_2 - kappa_int
    assert gamma_m > 0.0
    g_m = dyadic(rng, 0.25, 6.0)
    p = SystemParams(
        omega_c=omega_0,
        omega_m=omega_0,
        g_m=g_m,
        kappa_1=kappa_1,
        kappa_2=kappa_2,
        kappa_int=kappa_int,
        gamma_m=gamma_m,
    )
    feed = FeedConfig(delta_phi=0.0, q=kappa_1 / kappa_2)
    return p, feed


def draw_params(rng: np.random.Generator) -> SystemParams:
    """Random generic (unbalanced) system in a moderate range."""
    omega_c = float(rng.uniform(9000.0, 11000.0))
    return SystemParams(
        omega_c=omega_c,
        omega_m=omega_c + float(rng.uniform(-10.0, 10.0)),
        g_m=float(rng.uniform(0.0, 10.0)),
        kappa_1=float(rng.uniform(0.1, 3.0)),
        kappa_2=float(rng.uniform(0.1, 3.0)),
        kappa_int=float(rng.uniform(0.1, 3.0)),
        gamma_m=float(rng.uniform(0.1, 3.0)),
    )

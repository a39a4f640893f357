"""Shared fixtures for the test suite."""
from dataclasses import replace

import pytest

from cmpkit import CouplingMap, SystemParams


@pytest.fixture
def reference_params() -> SystemParams:
    """The measured parameter set used across the docs and presets."""
    return SystemParams(
        omega_c=10023.6,
        omega_m=10023.6,
        g_m=3.9,
        kappa_1=1.72,
        kappa_2=1.39,
        kappa_int=1.55,
        gamma_m=1.5,
    )


@pytest.fixture
def strong_params(reference_params) -> SystemParams:
    return replace(reference_params, g_m=9.2)


@pytest.fixture
def balanced_params() -> SystemParams:
    """Exactly balanced set: kappa_1 + kappa_2 - kappa_int == gamma_m bitwise."""
    p = SystemParams(
        omega_c=10023.6,
        omega_m=10023.6,
        g_m=3.9,
        kappa_1=1.75,
        kappa_2=1.25,
        kappa_int=1.5,
        gamma_m=1.5,
    )
    assert p.kappa_1 + p.kappa_2 - p.kappa_int == p.gamma_m
    return p


@pytest.fixture
def coupling_map() -> CouplingMap:
    return CouplingMap(slope=1.3, valid_range_mm=4.0)

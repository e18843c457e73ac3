"""Shared fixtures: the reference double-slit setup and cached grids."""

import numpy as np
import pytest

from cpi_sim import (
    Axis,
    ObjectMask,
    QuadratureSpec,
    SourceProfile,
    gamma_quadrature,
    make_geometry,
)

# Reference focused configuration: 500 nm light, 0.5 mm RMS source,
# 50 um slits separated by 150 um, both arms 0.1 m.
REF = dict(z_a=0.1, z_b=0.1, S_o=0.2, F=0.05, lambda0=500e-9)
SIGMA = 0.5e-3
SLIT_WIDTH = 50e-6
SEPARATION = 150e-6


@pytest.fixture(scope="session")
def geom_focused():
    return make_geometry(**REF)


@pytest.fixture(scope="session")
def geom_defocused():
    return make_geometry(z_a=0.1, z_b=0.08, S_o=0.2, F=0.05, lambda0=500e-9)


@pytest.fixture(scope="session")
def source():
    return SourceProfile.gaussian(SIGMA)


@pytest.fixture(scope="session")
def slits():
    return ObjectMask.double_slit(separation=SEPARATION, slit_width=SLIT_WIDTH)


@pytest.fixture(scope="session")
def axis_a():
    return Axis.from_half_width(64, 200e-6)


@pytest.fixture(scope="session")
def axis_b():
    return Axis.from_half_width(64, 500e-6)


@pytest.fixture(scope="session")
def grid_focused(geom_focused, source, slits, axis_a, axis_b):
    quad = QuadratureSpec.auto(geom_focused, source, slits, axis_a, axis_b)
    return gamma_quadrature(geom_focused, source, slits, axis_a, axis_b, quad)


def smooth_two_lobe_mask(sigma_f: float, half_sep: float, n: int = 1201) -> ObjectMask:
    """Two Gaussian-profile slits; smooth objects keep angular tails compact."""
    ext = half_sep + 3.5 * sigma_f
    c = np.linspace(-ext, ext, n)
    prof = np.exp(-((c - half_sep) ** 2) / (2 * sigma_f**2)) + np.exp(
        -((c + half_sep) ** 2) / (2 * sigma_f**2)
    )
    return ObjectMask.from_samples(c, np.clip(prof, 0.0, 1.0), feature_size=2 * sigma_f)

"""Sensor pixel-budget arithmetic and diffraction resolution limits.

A microlens-based plenoptic camera tiles one sensor into macropixels, so
the spatial and angular pixel counts multiply to the total: N_x * N_u =
N_tot. Splitting the measurement across two correlated sensors makes the
budget additive instead, N_x + N_u = N_tot, which is the whole point: far
more angular samples (hence depth of field) at the same image resolution.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import MissingFeatureScale
from .optics import ObjectMask, SetupGeometry, SourceProfile


@dataclass(frozen=True)
class SensorBudget:
    """Total pixel budget per side and the sharing scheme."""

    n_tot: int
    delta: float
    scheme: Literal["plenoptic", "cpi"]

    def __post_init__(self):
        if self.n_tot < 2:
            raise ValueError(f"need n_tot >= 2, got {self.n_tot}")
        if not (self.delta > 0.0):
            raise ValueError(f"pixel pitch must be positive, got {self.delta}")
        if self.scheme not in ("plenoptic", "cpi"):
            raise ValueError(f"unknown scheme {self.scheme!r}")

    @property
    def width(self) -> float:
        """Sensor width W = n_tot * delta."""
        return self.n_tot * self.delta


@dataclass(frozen=True)
class TradeoffCurve:
    """All integer (N_x, N_u) splits admissible under a scheme constraint."""

    scheme: Literal["plenoptic", "cpi"]
    n_tot: int
    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        for n_x, n_u in self.pairs:
            if n_x < 1 or n_u < 1:
                raise ValueError(f"pixel counts must be >= 1, got ({n_x}, {n_u})")
            if self.scheme == "plenoptic" and n_x * n_u != self.n_tot:
                raise ValueError(f"({n_x}, {n_u}) violates N_x * N_u = {self.n_tot}")
            if self.scheme == "cpi" and n_x + n_u != self.n_tot:
                raise ValueError(f"({n_x}, {n_u}) violates N_x + N_u = {self.n_tot}")

    def angular_for(self, n_x: int) -> int | None:
        """N_u available at image resolution n_x, or None if inadmissible."""
        for px, pu in self.pairs:
            if px == n_x:
                return pu
        return None


def tradeoff_curve(budget: SensorBudget) -> TradeoffCurve:
    """Enumerate the admissible integer (N_x, N_u) pairs for the scheme.

    Plenoptic: exact divisor pairs of n_tot (physical macropixel tiling).
    Two-sensor correlation scheme: every split with N_x + N_u = n_tot.
    """
    n = budget.n_tot
    if budget.scheme == "plenoptic":
        pairs = tuple(
            (d, n // d) for d in range(1, n + 1) if n % d == 0
        )
    else:
        pairs = tuple((k, n - k) for k in range(1, n))
    return TradeoffCurve(scheme=budget.scheme, n_tot=n, pairs=pairs)


def plenoptic_hyperbola(n_tot: int, n_points: int = 200) -> np.ndarray:
    """Continuous N_u = n_tot / N_x samples for plotting alongside the
    integer divisor set. Returns an (n_points, 2) array of (N_x, N_u)."""
    n_x = np.linspace(1.0, float(n_tot), n_points)
    return np.column_stack([n_x, n_tot / n_x])


def resolution_limits(
    geom: SetupGeometry, source: SourceProfile, mask: ObjectMask
) -> tuple[float, float]:
    """Diffraction-limited pixel scales of the two sensors.

    delta_rho_a = lambda0 * z_a / D_s   (ghost-image resolution, set by the
    source diameter), and delta_rho_b = M * lambda0 * z_b / d (source-image
    resolution on sensor b, set by the smallest object detail d acting as
    the limiting pupil).
    """
    d_s = source.diameter
    if not (d_s > 0.0):
        raise MissingFeatureScale("source diameter D_s is not defined")
    if mask.feature_size is None or not (mask.feature_size > 0.0):
        raise MissingFeatureScale("object mask declares no feature size d")
    delta_a = geom.lambda0 * geom.z_a / d_s
    delta_b = geom.M * geom.lambda0 * geom.z_b / mask.feature_size
    return delta_a, delta_b

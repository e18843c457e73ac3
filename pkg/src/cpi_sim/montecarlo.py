"""Stochastic oracle: chaotic-speckle synthesis and correlation estimation.

Chaotic light is modeled as a phase-screen random field: each source cell
emits f(rho_s) * exp(i theta) with an independent uniform phase per cell
and realization. Fourth-order moments of that field reproduce the
direct-plus-exchange structure of chaotic statistics, so the intensity
covariance <I_a I_b> - <I_a><I_b> converges to the same crossed correlation
term the quadrature integrator computes (never to the plain intensity
product, which the estimator subtracts by construction).

Cells are sampled in position space and propagated with the two arm
kernels directly; summing position-basis kernels against independent cell
amplitudes is equivalent to the plane-wave decomposition (the transverse
momentum integral collapses onto one source point per cell) and avoids a
redundant Fourier layer.

Randomness is counter-based: realization r draws its phases from a Philox
stream keyed by (seed, r), so cell i of realization r is a pure function of
(seed, r, i) and parallel scheduling cannot perturb the stream.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .correlator import MAX_PHASE_STEP, QuadratureSpec, gamma_quadrature
from .errors import DegenerateStatistics, UnderResolved
from .metrics import normalized_l1, normalized_linf, peak_normalize
from .optics import (
    Axis,
    CorrelationGrid,
    ObjectMask,
    SetupGeometry,
    SourceProfile,
    fresnel_prefactor,
    object_quadrature,
)

_REALIZATION_CHUNK = 256  # realizations per matmul block


@dataclass(frozen=True)
class SpeckleRun:
    """Configuration of one Monte Carlo estimation run.

    ``axis_s`` sets the emitter cells (one independent phase per node);
    ``n_object`` controls the object-plane quadrature inside the arm-b
    kernel. Realizations are split into ``n_batches`` equal-as-possible
    batches whose spread yields the statistical error bars.
    """

    seed: int
    n_realizations: int
    axis_s: Axis
    axis_a: Axis
    axis_b: Axis
    n_object: int = 256
    n_batches: int = 20

    def __post_init__(self):
        if self.n_realizations < 2:
            raise ValueError("need at least 2 realizations")
        if self.n_batches < 2:
            raise ValueError("need at least 2 batches for error bars")
        if self.n_realizations < self.n_batches:
            raise ValueError("more batches than realizations")


@dataclass(frozen=True)
class ConvergenceReport:
    """Distance of the estimate to a deterministic reference, with error bars.

    ``l1`` / ``linf`` are peak-normalized distances; ``se_per_point`` is the
    batch-means standard error of the raw covariance at every grid point,
    and ``se_l1`` rescales it onto the same normalized footing as ``l1``
    (so l1 ~ se_l1 means the estimate agrees with the reference to within
    its own noise).
    """

    n_realizations: int
    n_batches: int
    l1: float
    linf: float
    se_l1: float
    se_per_point: np.ndarray

    def __post_init__(self):
        if self.l1 < 0.0 or self.linf < 0.0 or self.se_l1 < 0.0:
            raise ValueError("distances and errors must be nonnegative")

    def to_dict(self) -> dict:
        se = np.asarray(self.se_per_point, dtype=float)
        return {
            "n_realizations": self.n_realizations,
            "n_batches": self.n_batches,
            "l1": self.l1,
            "linf": self.linf,
            "se_l1": self.se_l1,
            "se_mean": float(se.mean()),
            "se_max": float(se.max()),
            "se_per_point": se.tolist(),
        }


def sample_source_field(
    source: SourceProfile, axis_s: Axis, seed: int, realization_index: int
) -> np.ndarray:
    """One chaotic source realization: f(rho_s_i) * exp(i theta_i).

    Deterministic in (seed, realization_index, cell index); phases are
    i.i.d. uniform on [0, 2 pi).
    """
    rng = np.random.Generator(
        np.random.Philox(key=np.array([seed, realization_index], dtype=np.uint64))
    )
    theta = rng.random(axis_s.n) * (2.0 * np.pi)
    return source.amplitude(axis_s.coordinates) * np.exp(1j * theta)


def _check_cell_size(geom: SetupGeometry, axis_s: Axis, axis_a: Axis, axis_b: Axis) -> None:
    """Each cell must stay unresolved by both detectors (act as a point
    emitter): step <= lambda0 * min(z_a, z_b) / (4 * detector extent)."""
    extent = max(
        max(abs(axis_a.lo), abs(axis_a.hi)),
        max(abs(axis_b.lo), abs(axis_b.hi)) / geom.M,
    )
    limit = geom.lambda0 * min(geom.z_a, geom.z_b) / (4.0 * extent)
    if axis_s.step > limit:
        raise UnderResolved(
            f"source cell {axis_s.step:.3e} m is resolved by the detectors; "
            f"need step <= {limit:.3e} m"
        )


def default_sampling(
    geom: SetupGeometry,
    source: SourceProfile,
    mask: ObjectMask,
    axis_a: Axis,
    axis_b: Axis,
    margin: float = 0.8,
) -> tuple[Axis, int]:
    """Pick a compliant source-cell axis and object node count.

    The cell step takes ``margin`` times the tightest of the unresolved-cell
    rule and the kernel anti-aliasing limits; the object count targets half
    the allowed phase step.
    """
    lo, hi = source.quadrature_interval()
    s_max = max(abs(lo), abs(hi))
    a_max = max(abs(axis_a.lo), abs(axis_a.hi))
    b_max = max(abs(axis_b.lo), abs(axis_b.hi))
    o_max = mask.support_half_width
    w = geom.omega0_over_c

    extent = max(a_max, b_max / geom.M)
    cell_limit = geom.lambda0 * min(geom.z_a, geom.z_b) / (4.0 * extent)
    alias_a = MAX_PHASE_STEP / ((w / geom.z_a) * (a_max + s_max))
    alias_b = MAX_PHASE_STEP / ((w / geom.z_b) * (s_max + o_max))
    step = margin * min(cell_limit, alias_a, alias_b)
    n_cells = max(16, int(np.ceil(2.0 * s_max / step)) + 1)
    axis_s = Axis.from_half_width(n_cells, s_max)

    rate_o = (w / geom.z_b) * (s_max + b_max / geom.M)
    step_o = 0.5 * MAX_PHASE_STEP / rate_o
    support = sum(b - a for a, b in mask.support_intervals())
    n_object = max(16, int(np.ceil(support / step_o)) + 1)
    return axis_s, n_object


def arm_kernels(
    geom: SetupGeometry,
    mask: ObjectMask,
    axis_s: Axis,
    axis_a: Axis,
    axis_b: Axis,
    n_object: int = 256,
) -> tuple[np.ndarray, np.ndarray]:
    """Discrete propagation kernels from source cells to both detectors.

    Returns (K_a, K_b) with shapes (n_a, n_s) and (n_b, n_s); the source
    cell width is folded into the kernels, so E = K @ field.

    Arm a is the free Fresnel kernel h * exp(i w (rho_a - rho_s)^2 / (2 z_a)).
    Arm b carries the source chirp exp(i w rho_s^2 / (2 z_b)) times the
    object-plane integral of A against the lens-imaging phase.
    """
    w = geom.omega0_over_c
    rho_s = axis_s.coordinates
    rho_a = axis_a.coordinates
    rho_b = axis_b.coordinates
    s_max = max(abs(axis_s.lo), abs(axis_s.hi))
    a_max = max(abs(axis_a.lo), abs(axis_a.hi))
    b_max = max(abs(axis_b.lo), abs(axis_b.hi))

    _check_cell_size(geom, axis_s, axis_a, axis_b)

    # Anti-aliasing guards on every oscillatory kernel factor.
    rate_a = (w / geom.z_a) * (a_max + s_max)
    if rate_a * axis_s.step > MAX_PHASE_STEP:
        raise UnderResolved(
            f"arm-a kernel phase advances {rate_a * axis_s.step:.2f} rad per source "
            f"cell; need step <= {MAX_PHASE_STEP / rate_a:.3e} m"
        )
    rho_o, w_o, step_o = object_quadrature(mask, n_object)
    o_max = float(np.max(np.abs(rho_o)))
    rate_sb = (w / geom.z_b) * (s_max + o_max)
    if rate_sb * axis_s.step > MAX_PHASE_STEP:
        raise UnderResolved(
            f"arm-b kernel phase advances {rate_sb * axis_s.step:.2f} rad per source "
            f"cell; need step <= {MAX_PHASE_STEP / rate_sb:.3e} m"
        )
    rate_o = (w / geom.z_b) * (s_max + b_max / geom.M)
    if rate_o * step_o > MAX_PHASE_STEP:
        raise UnderResolved(
            f"arm-b object quadrature phase advances {rate_o * step_o:.2f} rad per "
            f"node; raise n_object above {n_object}"
        )

    h_a = fresnel_prefactor(w, geom.z_a)
    k_a = h_a * np.exp(
        0.5j * (w / geom.z_a) * np.square(rho_a[:, None] - rho_s[None, :])
    ) * axis_s.step

    c_b = (
        fresnel_prefactor(w, geom.z_b)
        * fresnel_prefactor(w, geom.S_i)
        * (geom.S_o / geom.z_b)
    )
    chirp = np.exp(0.5j * (w / geom.z_b) * rho_s**2)
    amp_o = mask.transmission(rho_o) * w_o
    k_b = np.empty((axis_b.n, axis_s.n), dtype=complex)
    c1 = w / geom.z_b
    for j, rb in enumerate(rho_b):
        phase = np.exp(-1j * c1 * np.outer(rho_o, rho_s + rb / geom.M))
        k_b[j, :] = amp_o @ phase
    k_b *= c_b * chirp[None, :] * axis_s.step
    return k_a, k_b


def propagate_arms(
    field: np.ndarray,
    geom: SetupGeometry,
    axis_s: Axis,
    mask: ObjectMask,
    axis_a: Axis,
    axis_b: Axis,
    n_object: int = 256,
) -> tuple[np.ndarray, np.ndarray]:
    """Propagate one source realization to both detectors.

    Returns the complex fields (E_a, E_b) on axis_a and axis_b. Linear in
    the input field.
    """
    k_a, k_b = arm_kernels(geom, mask, axis_s, axis_a, axis_b, n_object)
    field = np.asarray(field, dtype=complex)
    return k_a @ field, k_b @ field


def _batch_covariance(
    source: SourceProfile,
    axis_s: Axis,
    k_a: np.ndarray,
    k_b: np.ndarray,
    seed: int,
    start: int,
    stop: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Two-pass intensity covariance over realizations [start, stop).

    First pass accumulates the mean intensities, the second the centered
    cross products; centering first avoids the catastrophic cancellation of
    the <I_a I_b> - <I_a><I_b> form.
    """
    amp = source.amplitude(axis_s.coordinates)
    m = stop - start
    two_pi = 2.0 * np.pi

    def intensity_block(lo: int, hi: int) -> tuple[np.ndarray, np.ndarray]:
        fields = np.empty((hi - lo, axis_s.n), dtype=complex)
        for r in range(lo, hi):
            rng = np.random.Generator(
                np.random.Philox(key=np.array([seed, r], dtype=np.uint64))
            )
            fields[r - lo] = amp * np.exp(1j * two_pi * rng.random(axis_s.n))
        i_a = np.abs(fields @ k_a.T) ** 2
        i_b = np.abs(fields @ k_b.T) ** 2
        return i_a, i_b

    sum_a = np.zeros(k_a.shape[0])
    sum_b = np.zeros(k_b.shape[0])
    for lo in range(start, stop, _REALIZATION_CHUNK):
        hi = min(lo + _REALIZATION_CHUNK, stop)
        i_a, i_b = intensity_block(lo, hi)
        sum_a += i_a.sum(axis=0)
        sum_b += i_b.sum(axis=0)
    mean_a = sum_a / m
    mean_b = sum_b / m

    cross = np.zeros((k_a.shape[0], k_b.shape[0]))
    for lo in range(start, stop, _REALIZATION_CHUNK):
        hi = min(lo + _REALIZATION_CHUNK, stop)
        i_a, i_b = intensity_block(lo, hi)
        cross += (i_a - mean_a).T @ (i_b - mean_b)
    return cross / (m - 1), mean_a, mean_b


def estimate_gamma(
    run: SpeckleRun,
    geom: SetupGeometry,
    source: SourceProfile,
    mask: ObjectMask,
    reference: CorrelationGrid | None = None,
    ref_quad: QuadratureSpec | None = None,
    threads: int = 1,
) -> tuple[CorrelationGrid, ConvergenceReport]:
    """Estimate the crossed correlation term as an intensity covariance.

    Gamma^(rho_a, rho_b) = <I_a(rho_a) I_b(rho_b)> - <I_a(rho_a)><I_b(rho_b)>
    over ``run.n_realizations`` speckle realizations. Batches are reduced in
    a fixed order, so the result is bitwise identical for any thread count;
    tiny negative covariance noise is clipped to keep the grid nonnegative.

    The report measures the distance to ``reference`` (computed by
    quadrature on the same grid when not supplied).
    """
    if run.n_realizations < 100:
        raise ValueError("need n_realizations >= 100 for meaningful error bars")
    k_a, k_b = arm_kernels(
        geom, mask, run.axis_s, run.axis_a, run.axis_b, run.n_object
    )

    edges = np.linspace(0, run.n_realizations, run.n_batches + 1).astype(int)
    spans = [(int(edges[k]), int(edges[k + 1])) for k in range(run.n_batches)]

    def job(span: tuple[int, int]):
        return _batch_covariance(
            source, run.axis_s, k_a, k_b, run.seed, span[0], span[1]
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(job, spans))
    else:
        results = [job(s) for s in spans]

    covs = np.stack([r[0] for r in results])
    mean_a = np.stack([r[1] for r in results]).mean(axis=0)
    mean_b = np.stack([r[2] for r in results]).mean(axis=0)
    if np.any(mean_a == 0.0) or np.any(mean_b == 0.0):
        raise DegenerateStatistics(
            "a mean detected intensity is exactly zero; no speckle statistics"
        )

    weights = np.array([hi - lo for lo, hi in spans], dtype=float)
    raw = np.tensordot(weights / weights.sum(), covs, axes=1)
    se = covs.std(axis=0, ddof=1) / np.sqrt(run.n_batches)

    if reference is None:
        if ref_quad is None:
            ref_quad = QuadratureSpec.auto(geom, source, mask, run.axis_a, run.axis_b)
        reference = gamma_quadrature(
            geom, source, mask, run.axis_a, run.axis_b, ref_quad
        )

    peak = float(raw.max())
    if not (peak > 0.0):
        raise DegenerateStatistics("covariance estimate has no positive peak")
    ref_norm = peak_normalize(reference.values)
    report = ConvergenceReport(
        n_realizations=run.n_realizations,
        n_batches=run.n_batches,
        l1=normalized_l1(raw, reference.values),
        linf=normalized_linf(raw, reference.values),
        se_l1=float(np.sum(se / peak) / np.sum(ref_norm)),
        se_per_point=se,
    )
    grid = CorrelationGrid(
        axis_a=run.axis_a,
        axis_b=run.axis_b,
        values=np.maximum(raw, 0.0),
        z_a=geom.z_a,
        z_b=geom.z_b,
        M=geom.M,
    )
    return grid, report

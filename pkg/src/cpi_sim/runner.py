"""Configuration-driven experiment runner with a reproducibility manifest.

Every run emits a fixed set of files per mode plus ``manifest.json``
(written last) listing each emitted file with its SHA-256 digest, the
resolved config, per-stage wall times and the headline scalar results.
With a fixed seed and --threads 1 the emitted data files are bitwise
reproducible, so the digest list doubles as a regression oracle.

File formats, and nothing else:
  *.csv  RFC 4180 with '.' decimals, LF line endings, one header row,
         axis metadata in leading '#' comment lines
  *.pgm  binary P5, 16-bit big-endian, min-max scaled per image
         (the scale is recorded in the manifest so values are recoverable)
  *.json UTF-8, keys sorted
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .budget import SensorBudget, plenoptic_hyperbola, resolution_limits, tradeoff_curve
from .config import ExperimentConfig
from .correlator import gamma_geometric, gamma_quadrature, psf_widths
from .metrics import slit_contrast, two_sided_peaks
from .montecarlo import SpeckleRun, default_sampling, estimate_gamma
from .optics import Axis, CorrelationGrid, SampledImage
from .refocus import RefocusSpec, ghost_image, refocus_grid, refocused_image

_PGM_STRIP_ROWS = 32  # 1D images are rendered as a repeated strip


@dataclass
class RunManifest:
    """Everything needed to audit or reproduce a run."""

    mode: str
    config: dict
    tool_version: str = __version__
    stage_seconds: dict = field(default_factory=dict)
    files: list = field(default_factory=list)
    results: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "tool": "cpi-sim",
            "tool_version": self.tool_version,
            "mode": self.mode,
            "config": self.config,
            "stage_seconds": self.stage_seconds,
            "files": self.files,
            "results": self.results,
        }


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


def _num(value) -> str:
    """Shortest round-trip decimal form of a scalar (plain float repr)."""
    return repr(float(value))


def _axis_comment(name: str, axis: Axis) -> str:
    return f"# {name}: n={axis.n} center={_num(axis.center)} step={_num(axis.step)}"


def write_image_csv(path: Path, image: SampledImage) -> None:
    lines = [
        f"# cpi-sim {__version__}",
        f"# label: {image.label}",
        _axis_comment("axis", image.axis),
        "rho_m,value",
    ]
    for x, v in zip(image.axis.coordinates, image.values):
        lines.append(f"{_num(x)},{_num(v)}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def write_grid_csv(path: Path, grid: CorrelationGrid) -> None:
    lines = [
        f"# cpi-sim {__version__}",
        _axis_comment("axis_a", grid.axis_a),
        _axis_comment("axis_b", grid.axis_b),
        f"# z_a={_num(grid.z_a)} z_b={_num(grid.z_b)} M={_num(grid.M)}",
        "rho_a_m,rho_b_m,value",
    ]
    coords_a = grid.axis_a.coordinates
    coords_b = grid.axis_b.coordinates
    valid = grid.validity
    for i, a in enumerate(coords_a):
        for j, b in enumerate(coords_b):
            if valid[i, j]:
                lines.append(f"{_num(a)},{_num(b)},{_num(grid.values[i, j])}")
            else:
                lines.append(f"{_num(a)},{_num(b)},")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def write_pgm(path: Path, values: np.ndarray) -> tuple[float, float]:
    """Render a 2D array (or a 1D image as a strip) as 16-bit binary PGM.

    Returns the (min, max) used for scaling so absolute values stay
    recoverable through the manifest.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = np.tile(values, (_PGM_STRIP_ROWS, 1))
    lo, hi = float(values.min()), float(values.max())
    if hi > lo:
        scaled = np.round((values - lo) / (hi - lo) * 65535.0)
    else:
        scaled = np.zeros_like(values)
    header = f"P5\n{values.shape[1]} {values.shape[0]}\n65535\n".encode("ascii")
    path.write_bytes(header + scaled.astype(">u2").tobytes())
    return lo, hi


def write_json(path: Path, payload: dict) -> None:
    path.write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
        newline="\n",
    )


class _Emitter:
    """Tracks emitted files and their digests for the manifest."""

    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.records: list[dict] = []

    def _record(self, path: Path, extra: dict | None = None) -> None:
        entry = {
            "name": path.name,
            "sha256": _sha256(path),
            "bytes": path.stat().st_size,
        }
        if extra:
            entry.update(extra)
        self.records.append(entry)

    def image_csv(self, name: str, image: SampledImage) -> None:
        path = self.out_dir / name
        write_image_csv(path, image)
        self._record(path)

    def grid_csv(self, name: str, grid: CorrelationGrid) -> None:
        path = self.out_dir / name
        write_grid_csv(path, grid)
        self._record(path)

    def pgm(self, name: str, values: np.ndarray) -> None:
        path = self.out_dir / name
        lo, hi = write_pgm(path, values)
        self._record(path, {"pgm_min": lo, "pgm_max": hi})

    def json(self, name: str, payload: dict) -> None:
        path = self.out_dir / name
        write_json(path, payload)
        self._record(path)

    def csv_rows(self, name: str, comments: list[str], header: str, rows: list[str]) -> None:
        path = self.out_dir / name
        text = "\n".join([*comments, header, *rows]) + "\n"
        path.write_text(text, encoding="utf-8", newline="\n")
        self._record(path)


def _image_metrics(config: ExperimentConfig, image: SampledImage) -> dict:
    """Peak positions of an image, plus slit visibility for double slits."""
    out: dict = {}
    x = image.axis.coordinates
    try:
        left, right = two_sided_peaks(x, image.values)
        out["peak_neg_m"] = left
        out["peak_pos_m"] = right
    except ValueError:
        pass
    if config.get("object.kind") == "double_slit":
        sep = config.get("object.separation")
        out["contrast"] = slit_contrast(x, image.values, min_offset=sep / 4.0)
    return out


def run_experiment(
    config: ExperimentConfig,
    out_dir: str | Path | None = None,
    threads: int | None = None,
    seed: int | None = None,
) -> RunManifest:
    """Execute one configured experiment and emit its files and manifest.

    ``out_dir``, ``threads`` and ``seed`` override the config when given.
    """
    out = Path(out_dir if out_dir is not None else config.get("run.out_dir"))
    out.mkdir(parents=True, exist_ok=True)
    threads = threads if threads is not None else config.get("run.threads")
    seed = seed if seed is not None else config.get("run.seed")

    manifest = RunManifest(mode=config.mode, config=config.to_dict())
    manifest.config["run.threads"] = threads
    manifest.config["run.seed"] = seed
    emit = _Emitter(out)
    clock = time.perf_counter

    t0 = clock()
    if config.mode == "budget":
        _run_budget(config, emit, manifest)
    else:
        geom = config.build_geometry()
        source = config.build_source()
        mask = config.build_mask()
        axis_a, axis_b = config.build_axes()
        manifest.stage_seconds["setup"] = clock() - t0

        if config.mode == "geometric":
            t = clock()
            grid = gamma_geometric(geom, source, mask, axis_a, axis_b)
            manifest.stage_seconds["gamma_geometric"] = clock() - t
            emit.grid_csv("geometric.csv", grid)
            emit.pgm("geometric.pgm", grid.values)

        elif config.mode == "montecarlo":
            t = clock()
            axis_s, n_object = default_sampling(geom, source, mask, axis_a, axis_b)
            run = SpeckleRun(
                seed=seed,
                n_realizations=config.get("run.n_realizations"),
                axis_s=axis_s,
                axis_a=axis_a,
                axis_b=axis_b,
                n_object=n_object,
                n_batches=config.get("run.n_batches"),
            )
            grid, report = estimate_gamma(
                run, geom, source, mask, ref_quad=config.build_quadrature(),
                threads=threads,
            )
            manifest.stage_seconds["estimate_gamma"] = clock() - t
            emit.grid_csv("gamma_mc.csv", grid)
            emit.pgm("gamma_mc.pgm", grid.values)
            emit.json("convergence.json", report.to_dict())
            manifest.results.update(
                {"l1": report.l1, "linf": report.linf, "se_l1": report.se_l1}
            )

        elif config.mode in ("analytic", "refocus"):
            t = clock()
            quad = config.build_quadrature()
            grid = gamma_quadrature(geom, source, mask, axis_a, axis_b, quad)
            manifest.stage_seconds["gamma_quadrature"] = clock() - t

            t = clock()
            ghost = ghost_image(grid)
            spec = RefocusSpec()
            refocused_grid_ = refocus_grid(grid, spec)
            refocused = refocused_image(grid, spec)
            manifest.stage_seconds["refocus"] = clock() - t

            if config.mode == "analytic":
                emit.grid_csv("gamma.csv", grid)
                emit.pgm("gamma.pgm", grid.values)
                emit.image_csv("ghost.csv", ghost)
                emit.pgm("ghost.pgm", ghost.values)
                emit.image_csv("refocused.csv", refocused)
                emit.pgm("refocused.pgm", refocused.values)
            else:
                emit.grid_csv("refocused_grid.csv", refocused_grid_)
                emit.pgm("refocused_grid.pgm", refocused_grid_.values)
                emit.image_csv("refocused.csv", refocused)
                emit.pgm("refocused.pgm", refocused.values)

            ghost_metrics = _image_metrics(config, ghost)
            refocused_metrics = _image_metrics(config, refocused)
            manifest.results.update(
                {f"ghost_{k}": v for k, v in ghost_metrics.items()}
            )
            manifest.results.update(
                {f"refocused_{k}": v for k, v in refocused_metrics.items()}
            )
            if source.kind == "gaussian":
                psf = psf_widths(geom, source.sigma)
                manifest.results["psf_width_coherent_m"] = psf.width_coherent
                manifest.results["psf_width_incoherent_m"] = psf.width_incoherent

    manifest.stage_seconds["total"] = clock() - t0
    manifest.files = emit.records
    write_json(out / "manifest.json", manifest.to_dict())
    return manifest


def _run_budget(config: ExperimentConfig, emit: _Emitter, manifest: RunManifest) -> None:
    n_tot = config.get("budget.n_tot")
    delta = config.get("budget.delta")
    curves = {
        scheme: tradeoff_curve(SensorBudget(n_tot=n_tot, delta=delta, scheme=scheme))
        for scheme in ("plenoptic", "cpi")
    }
    rows = [
        f"{scheme},{n_x},{n_u}"
        for scheme, curve in curves.items()
        for n_x, n_u in curve.pairs
    ]
    emit.csv_rows(
        "budget.csv",
        [f"# cpi-sim {__version__}", f"# n_tot={n_tot} delta={_num(delta)}"],
        "scheme,N_x,N_u",
        rows,
    )
    cont = plenoptic_hyperbola(n_tot)
    emit.csv_rows(
        "budget_continuous.csv",
        [f"# cpi-sim {__version__}", f"# n_tot={n_tot} (continuous hyperbola)"],
        "N_x,N_u",
        [f"{_num(x)},{_num(u)}" for x, u in cont],
    )
    manifest.results["n_tot"] = n_tot
    manifest.results["n_pairs_plenoptic"] = len(curves["plenoptic"].pairs)
    manifest.results["n_pairs_cpi"] = len(curves["cpi"].pairs)

    if config.get("geometry.z_a") is not None:
        delta_a, delta_b = resolution_limits(
            config.build_geometry(), config.build_source(), config.build_mask()
        )
        manifest.results["delta_rho_a_m"] = delta_a
        manifest.results["delta_rho_b_m"] = delta_b

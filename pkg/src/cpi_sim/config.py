"""Experiment configuration: plain dotted key-value text, strictly validated.

The format is one ``section.key = value`` assignment per line, ``#``
comments, and nothing else. Unknown keys are hard errors: a typo in a
numerical experiment must fail loudly, not silently fall back to a
default. Syntax problems raise ParseError with a line number; semantic
problems are collected across the whole file and raised together as one
ValidationError with field-addressed messages.

Documented defaults (applied only when a key is absent):
  grids.n_a = 64, grids.n_b = 64, grids.center_a = 0, grids.center_b = 0
  grids.span_a / span_b     auto from the object support / source image
  grids.n_source, n_object  auto from the anti-aliasing guard
  grids.guard_factor = 4
  run.seed = 0, run.threads = 1, run.n_realizations = 1000,
  run.n_batches = 20, run.out_dir = "out"
  budget.delta = 10e-6
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from .correlator import QuadratureSpec
from .errors import ParseError, ValidationError
from .optics import Axis, ObjectMask, SetupGeometry, SourceProfile, make_geometry

MODES = ("analytic", "montecarlo", "geometric", "refocus", "budget")

# Every key the format accepts, with its value type. Which keys are
# required depends on the run mode and is resolved in _validate().
_SCHEMA: dict[str, type] = {
    "geometry.z_a": float,
    "geometry.z_b": float,
    "geometry.S_o": float,
    "geometry.S_i": float,
    "geometry.F": float,
    "geometry.lambda0": float,
    "source.kind": str,
    "source.sigma": float,
    "source.width": float,
    "object.kind": str,
    "object.slit_width": float,
    "object.separation": float,
    "object.file": str,
    "object.feature_size": float,
    "grids.n_a": int,
    "grids.n_b": int,
    "grids.span_a": float,
    "grids.span_b": float,
    "grids.center_a": float,
    "grids.center_b": float,
    "grids.n_source": int,
    "grids.n_object": int,
    "grids.source_span": float,
    "grids.object_span": float,
    "grids.guard_factor": float,
    "run.mode": str,
    "run.seed": int,
    "run.n_realizations": int,
    "run.n_batches": int,
    "run.threads": int,
    "run.out_dir": str,
    "budget.n_tot": int,
    "budget.delta": float,
}

_DEFAULTS: dict[str, Any] = {
    "grids.n_a": 64,
    "grids.n_b": 64,
    "grids.center_a": 0.0,
    "grids.center_b": 0.0,
    "grids.guard_factor": 4.0,
    "run.seed": 0,
    "run.n_realizations": 1000,
    "run.n_batches": 20,
    "run.threads": 1,
    "run.out_dir": "out",
    "budget.delta": 10e-6,
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully validated experiment description (defaults resolved)."""

    mode: str
    values: tuple[tuple[str, Any], ...]

    def get(self, key: str, default: Any = None) -> Any:
        for k, v in self.values:
            if k == key:
                return v
        return default

    def to_dict(self) -> dict[str, Any]:
        return dict(self.values)

    def serialize(self) -> str:
        """Canonical text form; parse_config(serialize()) round-trips."""
        lines = ["# cpi-sim experiment config"]
        for k, v in self.values:
            lines.append(f"{k} = {v!r}")
        return "\n".join(lines) + "\n"

    # -- builders into module inputs -------------------------------------

    def build_geometry(self) -> SetupGeometry:
        return make_geometry(
            z_a=self.get("geometry.z_a"),
            z_b=self.get("geometry.z_b"),
            S_o=self.get("geometry.S_o"),
            S_i=self.get("geometry.S_i"),
            F=self.get("geometry.F"),
            lambda0=self.get("geometry.lambda0"),
        )

    def build_source(self) -> SourceProfile:
        if self.get("source.kind") == "gaussian":
            return SourceProfile.gaussian(self.get("source.sigma"))
        return SourceProfile.tophat(self.get("source.width"))

    def build_mask(self) -> ObjectMask:
        kind = self.get("object.kind")
        if kind == "double_slit":
            mask = ObjectMask.double_slit(
                separation=self.get("object.separation"),
                slit_width=self.get("object.slit_width"),
            )
        elif kind == "single_slit":
            mask = ObjectMask.single_slit(self.get("object.slit_width"))
        else:
            import numpy as np

            data = np.loadtxt(self.get("object.file"), delimiter=",", comments="#")
            values = data[:, 1] + (1j * data[:, 2] if data.shape[1] > 2 else 0.0)
            mask = ObjectMask.from_samples(
                data[:, 0], values, feature_size=self.get("object.feature_size")
            )
        fs = self.get("object.feature_size")
        if fs is not None and fs != mask.feature_size:
            mask = ObjectMask(
                kind=mask.kind,
                slit_width=mask.slit_width,
                separation=mask.separation,
                sample_coords=mask.sample_coords,
                sample_values=mask.sample_values,
                feature_size=fs,
            )
        return mask

    def build_axes(self) -> tuple[Axis, Axis]:
        mask = self.build_mask()
        span_a = self.get("grids.span_a")
        if span_a is None:
            span_a = 2.0 * mask.support_half_width
        span_b = self.get("grids.span_b")
        if span_b is None:
            geom = self.build_geometry()
            source = self.build_source()
            span_b = 1.5 * geom.M * source.diameter
        axis_a = Axis.from_half_width(
            self.get("grids.n_a"), span_a, self.get("grids.center_a")
        )
        axis_b = Axis.from_half_width(
            self.get("grids.n_b"), span_b, self.get("grids.center_b")
        )
        return axis_a, axis_b

    def build_quadrature(self) -> QuadratureSpec:
        geom = self.build_geometry()
        source = self.build_source()
        mask = self.build_mask()
        axis_a, axis_b = self.build_axes()
        auto = QuadratureSpec.auto(
            geom, source, mask, axis_a, axis_b,
            guard_factor=self.get("grids.guard_factor"),
        )
        return QuadratureSpec(
            n_source=self.get("grids.n_source") or auto.n_source,
            n_object=self.get("grids.n_object") or auto.n_object,
            source_span=self.get("grids.source_span") or auto.source_span,
            object_span=self.get("grids.object_span") or auto.object_span,
        )


def _parse_value(key: str, raw: str, problems: list[str]) -> Any:
    typ = _SCHEMA[key]
    raw = raw.strip()
    if typ is str:
        if len(raw) >= 2 and raw[0] == raw[-1] and raw[0] in "'\"":
            raw = raw[1:-1]
        return raw
    try:
        if typ is int:
            return int(raw)
        return float(raw)
    except ValueError:
        problems.append(f"{key}: expected a {typ.__name__}, got {raw!r}")
        return None


def parse_config(text: str) -> ExperimentConfig:
    """Parse and fully validate config text into an ExperimentConfig."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ParseError(f"expected 'key = value', got {stripped!r}", line=lineno)
        key, _, value = stripped.partition("=")
        key = key.strip()
        if not key:
            raise ParseError("empty key", line=lineno)
        if key in raw:
            raise ParseError(f"duplicate key {key!r}", line=lineno)
        raw[key] = value

    problems: list[str] = []
    values: dict[str, Any] = {}
    for key, value in raw.items():
        if key not in _SCHEMA:
            problems.append(f"{key}: unknown key")
            continue
        parsed = _parse_value(key, value, problems)
        if parsed is not None:
            values[key] = parsed

    for key, default in _DEFAULTS.items():
        values.setdefault(key, default)

    _validate(values, problems)
    if problems:
        raise ValidationError(problems)

    ordered = tuple(sorted(values.items()))
    return ExperimentConfig(mode=values["run.mode"], values=ordered)


def _require(values: dict, key: str, problems: list[str]) -> bool:
    if key not in values:
        problems.append(f"{key}: required but missing")
        return False
    return True


def _positive(values: dict, key: str, problems: list[str]) -> None:
    if key in values and not values[key] > 0:
        problems.append(f"{key}: must be positive, got {values[key]}")


def _validate(values: dict[str, Any], problems: list[str]) -> None:
    if not _require(values, "run.mode", problems):
        return
    mode = values["run.mode"]
    if mode not in MODES:
        problems.append(f"run.mode: must be one of {'|'.join(MODES)}, got {mode!r}")
        return

    for key in ("run.n_realizations", "run.n_batches", "run.threads"):
        _positive(values, key, problems)
    if values.get("run.seed", 0) < 0:
        problems.append("run.seed: must be nonnegative")

    if mode == "budget":
        if _require(values, "budget.n_tot", problems) and values["budget.n_tot"] < 2:
            problems.append("budget.n_tot: must be >= 2")
        _positive(values, "budget.delta", problems)
        # Physics blocks are optional in budget mode; validate them only if begun.
        if not any(k.startswith(("geometry.", "source.", "object.")) for k in values):
            return

    for key in ("geometry.z_a", "geometry.z_b", "geometry.S_o", "geometry.lambda0"):
        if _require(values, key, problems):
            _positive(values, key, problems)
    has_si, has_f = "geometry.S_i" in values, "geometry.F" in values
    if has_si == has_f:
        problems.append(
            "geometry.S_i/geometry.F: give exactly one (the other is solved "
            "from the thin-lens equation)"
        )
    _positive(values, "geometry.S_i", problems)
    _positive(values, "geometry.F", problems)

    if _require(values, "source.kind", problems):
        kind = values["source.kind"]
        if kind == "gaussian":
            if _require(values, "source.sigma", problems):
                _positive(values, "source.sigma", problems)
        elif kind == "tophat":
            if _require(values, "source.width", problems):
                _positive(values, "source.width", problems)
        else:
            problems.append(f"source.kind: must be gaussian|tophat, got {kind!r}")

    if _require(values, "object.kind", problems):
        kind = values["object.kind"]
        if kind == "double_slit":
            for key in ("object.slit_width", "object.separation"):
                if _require(values, key, problems):
                    _positive(values, key, problems)
        elif kind == "single_slit":
            if _require(values, "object.slit_width", problems):
                _positive(values, "object.slit_width", problems)
        elif kind == "sampled":
            _require(values, "object.file", problems)
        else:
            problems.append(
                f"object.kind: must be double_slit|single_slit|sampled, got {kind!r}"
            )

    for key in ("grids.n_a", "grids.n_b"):
        if values.get(key, 2) < 2:
            problems.append(f"{key}: need at least 2 samples")
    for key in ("grids.span_a", "grids.span_b", "grids.source_span",
                "grids.object_span", "grids.guard_factor", "budget.delta"):
        _positive(values, key, problems)
    for key in ("grids.n_source", "grids.n_object"):
        if key in values and values[key] != 0 and values[key] < 16:
            problems.append(f"{key}: need at least 16 nodes (or 0 for auto)")


# -- bundled demo configs ----------------------------------------------------

DEMOS: dict[str, str] = {
    # Double slit acquired out of focus (z_b/z_a = 0.8): the angular
    # integral alone blurs the slits away; refocusing restores them. The
    # source blur D(1-alpha)/2 = 480 um swamps the 600 um slit separation,
    # while the refocused blur sqrt(lambda0 z_b (1-alpha)) = 89 um stays
    # well under the 200 um slit width. The acquired rho_a range must cover
    # the sheared paths: (z_a/z_b)*span + (1 - z_a/z_b)*span_b/M.
    "refocus": """\
# Out-of-focus double slit, refocused (alpha = 0.8)
geometry.z_a = 0.1
geometry.z_b = 0.08
geometry.S_o = 0.2
geometry.F = 0.05
geometry.lambda0 = 500e-9
source.kind = tophat
source.width = 4.8e-3
object.kind = double_slit
object.slit_width = 200e-6
object.separation = 600e-6
grids.n_a = 160
grids.span_a = 1.75e-3
grids.n_b = 64
grids.span_b = 1.1e-3
run.mode = analytic
run.seed = 0
""",
    # Focused ghost-imaging reference; Monte Carlo estimate against the
    # quadrature oracle.
    "montecarlo": """\
# Focused double slit, speckle Monte Carlo vs quadrature
geometry.z_a = 0.1
geometry.z_b = 0.1
geometry.S_o = 0.2
geometry.F = 0.05
geometry.lambda0 = 500e-9
source.kind = gaussian
source.sigma = 0.5e-3
object.kind = double_slit
object.slit_width = 50e-6
object.separation = 150e-6
grids.n_a = 64
grids.span_a = 200e-6
grids.n_b = 64
grids.span_b = 500e-6
run.mode = montecarlo
run.seed = 7
run.n_realizations = 2000
""",
    # Pixel-budget curves for a 50-pixel-per-side sensor.
    "budget": """\
# Spatial/angular pixel trade-off, N_tot = 50
run.mode = budget
budget.n_tot = 50
budget.delta = 10e-6
""",
}

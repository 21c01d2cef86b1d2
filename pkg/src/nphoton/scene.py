"""Scene files: loading, schema validation, and execution.

A scene is a JSON document in one of two forms.  The scenario form
selects one of the wired pipelines from :mod:`nphoton.scenarios` and
optionally overrides its physical parameters (grids stay as tuned for
the chosen variant, so large geometry overrides may trip the sampling
warnings; that is reported, not hidden).  The pipeline form describes
a source, one ordered element list per photon, detectors, and the
output products to compute.

All lengths carry a ``_m`` suffix, times ``_s``, angles ``_rad``.  The
schema shipped with the package is enforced before anything numerical
is built, so a malformed document fails before any output exists.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import asdict, dataclass, is_dataclass, replace
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .core import (
    NPhotonAmplitude,
    SimulationError,
    TemporalModel,
    TransverseGrid,
    Wavelength,
    gaussian_transverse,
    make_grid,
)
from .engine import ValidityReport, check_validity, propagate
from .kernels import (
    DoubleSlitMask,
    GaussianApertureMask,
    Kernel,
    MaskSpec,
    PathSet,
    PhaseMask,
    TabulatedMask,
    compose,
    free_space_kernel,
    identity_kernel,
    lens_kernel,
    mask_kernel,
    path_set,
)
from .measurement import (
    HeraldedState,
    HeraldEvent,
    HeraldImpossibleError,
    herald,
    intensity_profile,
    visibility,
)
from .oracles import imaging_params
from .scenarios import (
    Example1Config,
    Example2Config,
    example1_kernels,
    example2_kernels,
    run_example1,
    run_example2,
)


class SceneError(SimulationError):
    """A scene document that cannot be read, validated, or built."""


BUILTIN_SCENES: dict[str, dict] = {
    "example1-default": {"scenario": {"name": "example1"}},
    "example2-default": {"scenario": {"name": "example2"}},
}

_SCHEMA_CACHE: dict | None = None

_EXAMPLE1_KEYS = {
    "name",
    "variant",
    "wavelength_m",
    "source_rms_m",
    "envelope_rms_s",
    "s0_m",
    "s1_m",
    "s2_m",
    "s3_m",
    "phase_rad",
    "mask1",
    "mask2",
}
_EXAMPLE2_KEYS = {
    "name",
    "variant",
    "lambda1_m",
    "lambda2_m",
    "source_rms_m",
    "envelope_rms_s",
    "s0_m",
    "s1_m",
    "s2_m",
    "s3_m",
    "s4_m",
    "aperture_sigma_m",
    "f2_m",
    "flatten",
}
_SOURCE_PHOTONS = {"gaussian": 1, "biphoton": 2, "triphoton": 3}


# ---------------------------------------------------------------------------
# Loading and validation
# ---------------------------------------------------------------------------


def load_scene(source: str) -> dict:
    """Load a scene document from a builtin name or a JSON file path."""
    if source in BUILTIN_SCENES:
        return copy.deepcopy(BUILTIN_SCENES[source])
    path = Path(source)
    if not path.is_file():
        raise SceneError(
            f"no scene file at {source!r} and no builtin of that name "
            f"(builtins: {', '.join(sorted(BUILTIN_SCENES))})"
        )
    try:
        text = path.read_text()
    except OSError as exc:
        raise SceneError(f"cannot read {source!r}: {exc}") from exc
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneError(
            f"{source}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}"
        ) from exc
    if not isinstance(document, dict):
        raise SceneError(f"{source}: the top level must be a JSON object")
    return document


def _schema() -> dict:
    global _SCHEMA_CACHE
    if _SCHEMA_CACHE is None:
        text = (
            resources.files("nphoton")
            .joinpath("schemas/scene.schema.json")
            .read_text()
        )
        _SCHEMA_CACHE = json.loads(text)
    return _SCHEMA_CACHE


def validate_scene(document: dict) -> None:
    """Raise :class:`SceneError` unless the document is a valid scene."""
    validator = jsonschema.Draft7Validator(_schema())
    errors = list(validator.iter_errors(document))
    if errors:
        best = jsonschema.exceptions.best_match(errors)
        where = "$" + "".join(
            f"[{part}]" if isinstance(part, int) else f".{part}"
            for part in best.absolute_path
        )
        raise SceneError(f"schema violation at {where}: {best.message}")
    if "scenario" in document:
        _check_scenario_semantics(document["scenario"])
    else:
        _check_pipeline_semantics(document)


def _check_scenario_semantics(block: dict) -> None:
    name = block["name"]
    allowed = _EXAMPLE1_KEYS if name == "example1" else _EXAMPLE2_KEYS
    extra = sorted(set(block) - allowed)
    if extra:
        raise SceneError(
            f"scenario {name!r} does not take {', '.join(extra)}"
        )
    variant = block.get("variant", "default")
    variants = ("default", "interleaved") if name == "example1" else (
        "default",
        "demagnified",
    )
    if variant not in variants:
        raise SceneError(
            f"scenario {name!r} has variants {variants}, not {variant!r}"
        )
    if block.get("flatten") and "f2_m" in block:
        raise SceneError("give either flatten or f2_m, not both")


def _check_pipeline_semantics(document: dict) -> None:
    source = document["source"]
    kind = source["type"]
    n_wavelengths = len(source["wavelengths_m"])
    if kind in _SOURCE_PHOTONS and n_wavelengths != _SOURCE_PHOTONS[kind]:
        raise SceneError(
            f"a {kind} source carries {_SOURCE_PHOTONS[kind]} wavelength(s), "
            f"got {n_wavelengths}"
        )
    if kind == "custom-tensor":
        if "tensor_real" not in source:
            raise SceneError("a custom-tensor source needs tensor_real")
    elif "source_rms_m" not in source:
        raise SceneError(f"a {kind} source needs source_rms_m")
    n_photons = n_wavelengths
    if len(document["elements"]) != n_photons:
        raise SceneError(
            f"elements lists one pipeline per photon: expected {n_photons}, "
            f"got {len(document['elements'])}"
        )
    herald_count = 0
    scan_photons: list[int] = []
    for detector in document["detectors"]:
        photon = detector["photon"]
        if photon >= n_photons:
            raise SceneError(
                f"detector references photon {photon}; the source emits "
                f"{n_photons}"
            )
        if detector["role"] == "herald":
            herald_count += 1
            if herald_count > 1:
                raise SceneError("at most one herald detector is supported")
        else:
            if "position_m" in detector:
                raise SceneError(
                    "scan detectors record the whole grid and take no "
                    "position_m"
                )
            if photon in scan_photons:
                raise SceneError(f"photon {photon} has two scan detectors")
            scan_photons.append(photon)
    if herald_count:
        herald_photon = next(
            d["photon"] for d in document["detectors"] if d["role"] == "herald"
        )
        if herald_photon in scan_photons:
            raise SceneError("the heralded photon cannot also be scanned")
        if n_photons < 2:
            raise SceneError("heralding needs at least two photons")
    if not scan_photons:
        raise SceneError("at least one scan detector is required")
    survivors = n_photons - herald_count
    if "coincidence" in document["output"]["products"] and survivors != 2:
        raise SceneError(
            "the coincidence product needs exactly two photons after "
            f"heralding; this scene leaves {survivors}"
        )


# ---------------------------------------------------------------------------
# Scenario form
# ---------------------------------------------------------------------------


def _build_mask(spec: dict) -> MaskSpec:
    kind = spec["kind"]
    if kind == "double-slit":
        return DoubleSlitMask(
            separation=float(spec["separation_m"]),
            slit_width=float(spec["slit_width_m"]),
            offset=float(spec.get("offset_m", 0.0)),
            phase=float(spec.get("phase_rad", 0.0)),
        )
    if kind == "gaussian-aperture":
        return GaussianApertureMask(
            sigma=float(spec["sigma_m"]),
            center=float(spec.get("center_m", 0.0)),
        )
    if kind == "phase-only":
        phase = spec["phase_rad"]
        if isinstance(phase, list):
            return PhaseMask(phase=np.asarray(phase, dtype=float))
        return PhaseMask(phase=float(phase))
    if kind == "tabulated":
        values = np.asarray(spec["values_real"], dtype=float).astype(np.complex128)
        if "values_imag" in spec:
            imag = np.asarray(spec["values_imag"], dtype=float)
            if imag.shape != values.shape:
                raise SceneError(
                    "tabulated mask values_real and values_imag lengths differ"
                )
            values = values + 1j * imag
        return TabulatedMask(values=values)
    raise SceneError(f"unknown mask kind {kind!r}")


def _example1_config(block: dict) -> Example1Config:
    variant = block.get("variant", "default")
    config = (
        Example1Config.default()
        if variant == "default"
        else Example1Config.interleaved()
    )
    updates: dict = {}
    scalars = {
        "wavelength_m": "wavelength",
        "source_rms_m": "source_rms",
        "envelope_rms_s": "envelope_rms",
        "s0_m": "s0",
        "s1_m": "s1",
        "s2_m": "s2",
        "s3_m": "s3",
        "phase_rad": "phase",
    }
    for key, attr in scalars.items():
        if key in block:
            updates[attr] = float(block[key])
    for key in ("mask1", "mask2"):
        if key in block:
            updates[key] = _build_mask(block[key])
    return replace(config, **updates)


def _example2_config(block: dict) -> Example2Config:
    variant = block.get("variant", "default")
    config = (
        Example2Config.default()
        if variant == "default"
        else Example2Config.demagnified()
    )
    updates: dict = {}
    scalars = {
        "lambda1_m": "lambda1",
        "lambda2_m": "lambda2",
        "source_rms_m": "source_rms",
        "envelope_rms_s": "envelope_rms",
        "s0_m": "s0",
        "s1_m": "s1",
        "s2_m": "s2",
        "s3_m": "s3",
        "s4_m": "s4",
        "aperture_sigma_m": "aperture_sigma",
    }
    for key, attr in scalars.items():
        if key in block:
            updates[attr] = float(block[key])
    if {"s0", "s1", "s2"} & set(updates):
        s0 = updates.get("s0", config.s0)
        s1 = updates.get("s1", config.s1)
        s2 = updates.get("s2", config.s2)
        _, updates["f1"] = imaging_params(s0, s1, s2)
    config = replace(config, **updates)
    if block.get("flatten"):
        config = config.with_flattening()
    elif "f2_m" in block:
        config = replace(config, f2=float(block["f2_m"]))
    return config


def _scenario_config(block: dict) -> "Example1Config | Example2Config":
    if block["name"] == "example1":
        return _example1_config(block)
    return _example2_config(block)


# ---------------------------------------------------------------------------
# Pipeline form
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PipelinePlan:
    """Everything a pipeline scene resolves to before propagation."""

    source: NPhotonAmplitude
    path_sets: tuple[PathSet, ...]
    primitive_kernels: tuple[Kernel, ...]
    herald_event: HeraldEvent | None
    scan_photons: tuple[int, ...]
    products: tuple[str, ...]


def _source_amplitude(block: dict) -> NPhotonAmplitude:
    wavelengths = tuple(Wavelength(float(v)) for v in block["wavelengths_m"])
    n = len(wavelengths)
    spec = block["grid"]
    grid = make_grid(
        0.0,
        float(spec.get("center_m", 0.0)),
        float(spec["half_width_m"]),
        int(spec["count"]),
    )
    envelope_rms = float(block["envelope_rms_s"])
    kind = block["type"]
    if kind == "custom-tensor":
        tensor = np.asarray(block["tensor_real"], dtype=float).astype(np.complex128)
        if "tensor_imag" in block:
            imag = np.asarray(block["tensor_imag"], dtype=float)
            if imag.shape != tensor.shape:
                raise SceneError("tensor_real and tensor_imag shapes differ")
            tensor = tensor + 1j * imag
        expected = (grid.count,) * n
        if tensor.shape != expected:
            raise SceneError(
                f"custom tensor has shape {tensor.shape}; the grid and "
                f"wavelength count imply {expected}"
            )
        return NPhotonAmplitude(
            grids=(grid,) * n,
            wavelengths=wavelengths,
            tensor=tensor,
            temporal=TemporalModel.for_photons(n, envelope_rms),
        )
    envelope = gaussian_transverse(grid, float(block["source_rms_m"]))
    if kind == "gaussian":
        tensor = envelope.astype(np.complex128)
    else:
        tensor = np.zeros((grid.count,) * n, dtype=np.complex128)
        index = np.arange(grid.count)
        tensor[(index,) * n] = envelope / grid.spacing ** (n - 1)
    return NPhotonAmplitude(
        grids=(grid,) * n,
        wavelengths=wavelengths,
        tensor=tensor,
        temporal=TemporalModel.for_photons(n, envelope_rms),
    )


def _parse_weight(value: "float | list") -> complex:
    if isinstance(value, list):
        return complex(float(value[0]), float(value[1]))
    return complex(float(value))


def _simple_kernel(
    grid: TransverseGrid,
    element: dict,
    wavelength: Wavelength,
    collected: list[Kernel],
) -> Kernel:
    kind = element["kind"]
    if kind == "free_space":
        spec = element["grid"]
        out = make_grid(
            grid.z + float(element["distance_m"]),
            float(spec.get("center_m", 0.0)),
            float(spec["half_width_m"]),
            int(spec["count"]),
        )
        kernel = free_space_kernel(grid, out, wavelength)
    elif kind == "lens":
        kernel = lens_kernel(grid, float(element["focal_length_m"]), wavelength)
    elif kind == "mask":
        kernel = mask_kernel(grid, _build_mask(element["mask"]))
    else:
        raise SceneError(f"unknown element kind {kind!r}")
    collected.append(kernel)
    return kernel


def _photon_path_set(
    grid: TransverseGrid,
    elements: list,
    wavelength: Wavelength,
    collected: list[Kernel],
) -> PathSet:
    branches: list[tuple[Kernel, complex]] = [(identity_kernel(grid), 1.0 + 0.0j)]
    for element in elements:
        if element["kind"] == "path_split":
            expanded = []
            for prefix, weight in branches:
                for arm in element["arms"]:
                    arm_weight = _parse_weight(arm.get("weight", 1.0))
                    kernel = prefix
                    for sub in arm["elements"]:
                        kernel = compose(
                            kernel,
                            _simple_kernel(
                                kernel.output_grid, sub, wavelength, collected
                            ),
                        )
                    expanded.append((kernel, weight * arm_weight))
            branches = expanded
        else:
            branches = [
                (
                    compose(
                        prefix,
                        _simple_kernel(
                            prefix.output_grid, element, wavelength, collected
                        ),
                    ),
                    weight,
                )
                for prefix, weight in branches
            ]
    return path_set(branches)


def build_pipeline(document: dict) -> PipelinePlan:
    """Resolve a pipeline-form scene into a ready-to-propagate plan."""
    source = _source_amplitude(document["source"])
    collected: list[Kernel] = []
    path_sets = tuple(
        _photon_path_set(
            source.grids[photon],
            document["elements"][photon],
            source.wavelengths[photon],
            collected,
        )
        for photon in range(source.n_photons)
    )
    herald_event: HeraldEvent | None = None
    scans: list[int] = []
    for detector in document["detectors"]:
        if detector["role"] == "herald":
            herald_event = HeraldEvent(
                photon_index=int(detector["photon"]),
                detector_position=float(detector.get("position_m", 0.0)),
                detection_time=float(detector.get("detection_time_s", 0.0)),
            )
        else:
            scans.append(int(detector["photon"]))
    return PipelinePlan(
        source=source,
        path_sets=path_sets,
        primitive_kernels=tuple(collected),
        herald_event=herald_event,
        scan_photons=tuple(sorted(scans)),
        products=tuple(dict.fromkeys(document["output"]["products"])),
    )


# ---------------------------------------------------------------------------
# Execution
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Table:
    """Columnar output destined for one CSV file."""

    header: tuple[str, ...]
    columns: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        if len(self.header) != len(self.columns):
            raise SceneError("table header and column counts differ")


@dataclass(frozen=True, eq=False)
class SceneRunResult:
    """Tables keyed by output file stem, plus a metadata document."""

    tables: dict[str, Table]
    metadata: dict


def _jsonable(value):
    if is_dataclass(value) and not isinstance(value, type):
        return _jsonable(asdict(value))
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    return value


def _grid_summary(photon: int, grid: TransverseGrid) -> dict:
    return {
        "photon": photon,
        "z_m": grid.z,
        "first_sample_m": float(grid.samples[0]),
        "last_sample_m": float(grid.samples[-1]),
        "count": grid.count,
        "spacing_m": grid.spacing,
    }


def _kernel_summary(kernels: "list[Kernel] | tuple[Kernel, ...]") -> list[dict]:
    rows = []
    for kernel in kernels:
        step = kernel.max_phase_step
        rows.append(
            {
                "label": kernel.label,
                "max_phase_step_rad": None if step is None else float(step),
                "max_phase_step_over_pi": None
                if step is None
                else float(step / math.pi),
                "aliased": bool(step is not None and step >= math.pi),
            }
        )
    return rows


def _validity_summary(report: ValidityReport) -> dict:
    return {
        "far_field_ratios": [
            {"description": description, "ratio": value}
            for description, value in report.far_field_ratios
        ],
        "curvature_ratio": report.curvature_ratio,
        "threshold": report.pass_threshold,
        "warnings": list(report.warnings),
        "passed": report.passed,
    }


def _herald_summary(photon: int, position: float, state: HeraldedState) -> dict:
    return {
        "photon": photon,
        "position_m": position,
        "probability_density_per_m": state.herald_probability_density,
        "time_offsets_s": list(state.time_offsets),
        "envelope_rms_s": state.envelope_rms,
    }


def _run_scenario(document: dict) -> SceneRunResult:
    block = document["scenario"]
    config = _scenario_config(block)
    resolved = {
        "scenario": {
            "name": block["name"],
            "variant": block.get("variant", "default"),
            "resolved": _jsonable(config),
        }
    }
    if isinstance(config, Example1Config):
        result = run_example1(config)
        x = result.detector_grid.samples
        tables = {
            "profile_photon0": Table(
                header=("x_m", "intensity", "phase_rad"),
                columns=(
                    x,
                    result.profile,
                    np.angle(result.heralded.conditional.tensor),
                ),
            )
        }
        metrics = {
            "fringe_period_m": result.fringe_period,
            "tau_s": result.tau,
            "visibility": visibility(x, result.profile),
        }
        herald_info = _herald_summary(1, 0.0, result.heralded)
        kernels = example1_kernels(config)
        grids = [_grid_summary(0, result.detector_grid)]
    else:
        result = run_example2(config)
        x = result.detector_grid.samples
        diagonal = np.diagonal(result.conditional.tensor)
        marginal = intensity_profile(result.heralded, 0)
        joint = np.abs(result.conditional.tensor) ** 2
        tables = {
            "profile_photon0": Table(
                header=("x_m", "intensity", "phase_rad"),
                columns=(x, marginal, np.zeros_like(x)),
            ),
            "diagonal_photon0_photon1": Table(
                header=("x_m", "amplitude_abs", "phase_rad"),
                columns=(x, np.abs(diagonal), np.angle(diagonal)),
            ),
            "coincidence_photon0_photon1": Table(
                header=("x0_m", "x1_m", "density"),
                columns=(
                    np.repeat(x, x.size),
                    np.tile(x, x.size),
                    joint.reshape(-1),
                ),
            ),
        }
        metrics = {
            "magnification": config.magnification,
            "imaged_rms_m": result.imaged_rms,
            "magnified_source_rms_m": abs(config.magnification)
            * config.source_rms,
            "diagonal_support": result.diagonal_support,
            "quadratic_phase_rad_per_m2": result.quadratic_phase,
            "flatness": None
            if result.flatness is None
            else _jsonable(result.flatness),
        }
        herald_info = _herald_summary(2, 0.0, result.heralded)
        kernels = example2_kernels(config)
        grids = [
            _grid_summary(0, result.detector_grid),
            _grid_summary(1, result.detector_grid),
        ]
    metadata = {
        "scene": resolved,
        "metrics": _jsonable(metrics),
        "herald": _jsonable(herald_info),
        "branches": {
            "merged": result.propagation.merged_count,
            "kept": result.propagation.kept_count,
        },
        "norms": {
            "conditional": result.heralded.conditional.norm(),
            "branches": [b.norm() for b in result.propagation.branches],
        },
        "validity": _validity_summary(result.validity),
        "kernels": _kernel_summary(kernels),
        "grids": grids,
    }
    return SceneRunResult(tables=tables, metadata=_jsonable(metadata))


def _branch_herald(
    branches: "tuple[NPhotonAmplitude, ...]", event: HeraldEvent
) -> "list[HeraldedState]":
    """Herald every branch, dropping those with zero click density.

    Distinguishable branches add at the intensity level, so each is
    conditioned separately and later recombined with its density as
    the weight.
    """
    states = []
    for branch in branches:
        try:
            states.append(herald(branch, event))
        except HeraldImpossibleError:
            continue
    if not states:
        raise HeraldImpossibleError(
            "the herald detector sits in a dark fringe of every branch"
        )
    return states


def _run_pipeline(document: dict) -> SceneRunResult:
    plan = build_pipeline(document)
    propagation = propagate(plan.source, list(plan.path_sets))
    tables: dict[str, Table] = {}
    herald_info = None

    if plan.herald_event is not None:
        event = plan.herald_event
        states = _branch_herald(propagation.branches, event)
        densities = [s.herald_probability_density for s in states]
        total_density = float(sum(densities))
        survivors = [
            p for p in range(plan.source.n_photons) if p != event.photon_index
        ]
        if "profile" in plan.products:
            for photon in plan.scan_photons:
                reduced_index = survivors.index(photon)
                grid = states[0].conditional.grids[reduced_index]
                profile = np.zeros(grid.count)
                for state, density in zip(states, densities):
                    profile += density * intensity_profile(state, reduced_index)
                profile /= total_density
                if len(states) == 1 and len(survivors) == 1:
                    phase = np.angle(states[0].conditional.tensor)
                else:
                    phase = np.zeros(grid.count)
                tables[f"profile_photon{photon}"] = Table(
                    header=("x_m", "intensity", "phase_rad"),
                    columns=(grid.samples, profile, phase),
                )
        if "coincidence" in plan.products:
            grids = states[0].conditional.grids
            joint = np.zeros((grids[0].count, grids[1].count))
            for state, density in zip(states, densities):
                joint += density * np.abs(state.conditional.tensor) ** 2
            joint /= total_density
            tables[
                f"coincidence_photon{survivors[0]}_photon{survivors[1]}"
            ] = Table(
                header=("x0_m", "x1_m", "density"),
                columns=(
                    np.repeat(grids[0].samples, grids[1].count),
                    np.tile(grids[1].samples, grids[0].count),
                    joint.reshape(-1),
                ),
            )
        herald_info = _herald_summary(
            event.photon_index, event.detector_position, states[0]
        )
        herald_info["probability_density_per_m"] = total_density
        herald_info["branch_densities_per_m"] = densities
        final_grids = [
            _grid_summary(photon, states[0].conditional.grids[i])
            for i, photon in enumerate(survivors)
        ]
        norms = {
            "input": plan.source.norm(),
            "branches": [b.norm() for b in propagation.branches],
            "conditional": [s.conditional.norm() for s in states],
        }
    else:
        branches = propagation.branches
        if "profile" in plan.products:
            for photon in plan.scan_photons:
                grid = branches[0].grids[photon]
                profile = np.zeros(grid.count)
                for branch in branches:
                    profile += intensity_profile(branch, photon)
                if len(branches) == 1 and plan.source.n_photons == 1:
                    phase = np.angle(branches[0].tensor)
                else:
                    phase = np.zeros(grid.count)
                tables[f"profile_photon{photon}"] = Table(
                    header=("x_m", "intensity", "phase_rad"),
                    columns=(grid.samples, profile, phase),
                )
        if "coincidence" in plan.products:
            grids = branches[0].grids
            joint = np.zeros((grids[0].count, grids[1].count))
            for branch in branches:
                joint += np.abs(branch.tensor) ** 2
            tables["coincidence_photon0_photon1"] = Table(
                header=("x0_m", "x1_m", "density"),
                columns=(
                    np.repeat(grids[0].samples, grids[1].count),
                    np.tile(grids[1].samples, grids[0].count),
                    joint.reshape(-1),
                ),
            )
        final_grids = [
            _grid_summary(photon, branches[0].grids[photon])
            for photon in range(plan.source.n_photons)
        ]
        norms = {
            "input": plan.source.norm(),
            "branches": [b.norm() for b in branches],
        }

    metadata = {
        "scene": document,
        "metrics": {},
        "herald": herald_info,
        "branches": {
            "merged": propagation.merged_count,
            "kept": propagation.kept_count,
        },
        "norms": norms,
        "validity": None,
        "kernels": _kernel_summary(plan.primitive_kernels),
        "grids": final_grids,
    }
    return SceneRunResult(tables=tables, metadata=_jsonable(metadata))


def run_scene(document: dict) -> SceneRunResult:
    """Validate and execute a scene document."""
    validate_scene(document)
    if "scenario" in document:
        return _run_scenario(document)
    return _run_pipeline(document)


def scene_kernels(
    document: dict,
) -> "tuple[list[Kernel], ValidityReport | None]":
    """Primitive kernels plus, for scenario scenes, the validity check.

    Builds everything except the propagation itself, so sampling
    problems surface without paying for a run.
    """
    validate_scene(document)
    if "scenario" in document:
        block = document["scenario"]
        config = _scenario_config(block)
        if isinstance(config, Example1Config):
            kernels = example1_kernels(config)
            report = check_validity(
                config.s0,
                config.s1,
                config.s2,
                config.s3,
                source_rms=config.source_rms,
                mask_half_extent=config.mask_half_extent,
                wavelengths=[config.wavelength],
            )
        else:
            kernels = example2_kernels(config)
            report = check_validity(
                config.s0,
                config.s1,
                config.s2,
                config.s3,
                config.s4,
                source_rms=config.source_rms,
                wavelengths=[config.lambda1, config.lambda2],
            )
        return kernels, report
    plan = build_pipeline(document)
    return list(plan.primitive_kernels), None

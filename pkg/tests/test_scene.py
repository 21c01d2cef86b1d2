"""Scene documents: loading, validation, resolution, and execution."""

import json
import math
from pathlib import Path

import numpy as np
import pytest

from nphoton import (
    SimulationError,
    Wavelength,
    gaussian_transverse,
    imaging_params,
    make_grid,
)
from nphoton.scene import (
    BUILTIN_SCENES,
    SceneError,
    build_pipeline,
    load_scene,
    run_scene,
    scene_kernels,
    validate_scene,
)
from nphoton.scene import _scenario_config

SCENES_DIR = Path(__file__).resolve().parent.parent / "scenes"


def _identity_scene(count=257, half_width=8e-3, wavelength=5e-7):
    return {
        "source": {
            "type": "gaussian",
            "wavelengths_m": [wavelength],
            "source_rms_m": 1e-3,
            "envelope_rms_s": 1e-12,
            "grid": {"half_width_m": half_width, "count": count},
        },
        "elements": [[]],
        "detectors": [{"photon": 0, "role": "scan"}],
        "output": {"products": ["profile"]},
    }


def _biphoton_scene(**source_overrides):
    source = {
        "type": "biphoton",
        "wavelengths_m": [5e-6, 5e-6],
        "source_rms_m": 1e-3,
        "envelope_rms_s": 1e-12,
        "grid": {"half_width_m": 4e-3, "count": 129},
    }
    source.update(source_overrides)
    return {
        "source": source,
        "elements": [[], []],
        "detectors": [
            {"photon": 1, "role": "herald", "position_m": 0.0},
            {"photon": 0, "role": "scan"},
        ],
        "output": {"products": ["profile"]},
    }


class TestLoadScene:
    def test_builtins_are_deep_copied(self):
        first = load_scene("example1-default")
        first["scenario"]["s3_m"] = 99.0
        second = load_scene("example1-default")
        assert "s3_m" not in second["scenario"]
        assert BUILTIN_SCENES["example1-default"] == {
            "scenario": {"name": "example1"}
        }

    def test_unknown_name_lists_builtins(self):
        with pytest.raises(SceneError, match="example1-default"):
            load_scene("no-such-scene")

    def test_malformed_json_reports_position(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"scenario": {')
        with pytest.raises(SceneError, match=r"bad\.json:1:"):
            load_scene(str(bad))

    def test_non_object_top_level_rejected(self, tmp_path):
        bad = tmp_path / "list.json"
        bad.write_text("[1, 2]")
        with pytest.raises(SceneError, match="top level"):
            load_scene(str(bad))

    def test_shipped_scenes_validate(self):
        for path in sorted(SCENES_DIR.glob("*.json")):
            validate_scene(load_scene(str(path)))


class TestValidateScene:
    def test_builtins_pass(self):
        for name in BUILTIN_SCENES:
            validate_scene(load_scene(name))

    def test_unknown_scenario_name_rejected(self):
        with pytest.raises(SceneError, match="schema violation"):
            validate_scene({"scenario": {"name": "example3"}})

    def test_extra_top_level_key_rejected(self):
        with pytest.raises(SceneError, match="schema violation"):
            validate_scene(
                {"scenario": {"name": "example1"}, "comment": "hello"}
            )

    def test_grid_count_capped(self):
        scene = _identity_scene(count=8192)
        with pytest.raises(SceneError, match="schema violation"):
            validate_scene(scene)

    def test_cross_scenario_key_rejected(self):
        with pytest.raises(SceneError, match="does not take"):
            validate_scene(
                {"scenario": {"name": "example1", "lambda1_m": 0.7e-6}}
            )

    def test_wrong_variant_rejected(self):
        with pytest.raises(SceneError, match="variants"):
            validate_scene(
                {"scenario": {"name": "example1", "variant": "demagnified"}}
            )

    def test_flatten_and_f2_exclusive(self):
        with pytest.raises(SceneError, match="not both"):
            validate_scene(
                {
                    "scenario": {
                        "name": "example2",
                        "flatten": True,
                        "f2_m": 0.5,
                    }
                }
            )

    def test_wavelength_count_must_match_source_type(self):
        scene = _biphoton_scene(wavelengths_m=[5e-6])
        with pytest.raises(SceneError, match="wavelength"):
            validate_scene(scene)

    def test_gaussian_source_needs_rms(self):
        scene = _identity_scene()
        del scene["source"]["source_rms_m"]
        with pytest.raises(SceneError, match="source_rms_m"):
            validate_scene(scene)

    def test_custom_tensor_needs_values(self):
        scene = _identity_scene()
        scene["source"]["type"] = "custom-tensor"
        with pytest.raises(SceneError, match="tensor_real"):
            validate_scene(scene)

    def test_element_list_per_photon(self):
        scene = _biphoton_scene()
        scene["elements"] = [[]]
        with pytest.raises(SceneError, match="element"):
            validate_scene(scene)

    def test_single_herald_only(self):
        scene = _biphoton_scene()
        scene["detectors"] = [
            {"photon": 0, "role": "herald"},
            {"photon": 1, "role": "herald"},
        ]
        with pytest.raises(SceneError, match="one herald"):
            validate_scene(scene)

    def test_herald_cannot_be_scanned(self):
        scene = _biphoton_scene()
        scene["detectors"] = [
            {"photon": 1, "role": "herald"},
            {"photon": 1, "role": "scan"},
        ]
        with pytest.raises(SceneError, match="cannot also be scanned"):
            validate_scene(scene)

    def test_scan_takes_no_position(self):
        scene = _identity_scene()
        scene["detectors"][0]["position_m"] = 0.0
        with pytest.raises(SceneError):
            validate_scene(scene)

    def test_duplicate_scans_rejected(self):
        scene = _biphoton_scene()
        scene["detectors"] = [
            {"photon": 1, "role": "herald"},
            {"photon": 0, "role": "scan"},
            {"photon": 0, "role": "scan"},
        ]
        with pytest.raises(SceneError, match="two scan"):
            validate_scene(scene)

    def test_herald_needs_companions(self):
        scene = _identity_scene()
        scene["detectors"] = [{"photon": 0, "role": "herald"}]
        with pytest.raises(SceneError):
            validate_scene(scene)

    def test_at_least_one_scan(self):
        scene = _biphoton_scene()
        scene["detectors"] = [{"photon": 1, "role": "herald"}]
        with pytest.raises(SceneError, match="scan"):
            validate_scene(scene)

    def test_coincidence_needs_two_survivors(self):
        scene = _identity_scene()
        scene["output"]["products"] = ["profile", "coincidence"]
        with pytest.raises(SceneError, match="coincidence"):
            validate_scene(scene)


class TestScenarioResolution:
    def test_scalar_override(self):
        config = _scenario_config({"name": "example1", "s3_m": 0.5})
        assert config.s3 == 0.5
        assert config.s1 == 1.72  # untouched default

    def test_mask_override(self):
        config = _scenario_config(
            {
                "name": "example1",
                "mask1": {
                    "kind": "double-slit",
                    "separation_m": 1.0e-4,
                    "slit_width_m": 1.0e-5,
                    "offset_m": 2.0e-5,
                    "phase_rad": 0.4,
                },
            }
        )
        assert config.mask1.separation == 1.0e-4
        assert config.mask1.offset == 2.0e-5
        assert config.mask1.phase == 0.4
        assert config.mask2.separation == 190e-6

    def test_example2_f1_tracks_conjugation(self):
        config = _scenario_config({"name": "example2", "s1_m": 0.3})
        _, expected = imaging_params(0.1, 0.3, 0.6)
        assert config.f1 == pytest.approx(expected, rel=1e-12)

    def test_flatten_resolves_f2(self):
        config = _scenario_config({"name": "example2", "flatten": True})
        assert config.f2 == pytest.approx(0.5142857142857143, rel=1e-12)

    def test_interleaved_variant_with_phase(self):
        config = _scenario_config(
            {"name": "example1", "variant": "interleaved", "phase_rad": math.pi}
        )
        assert config.phase == math.pi
        assert config.mask1.offset == -50e-6


class TestBuildPipeline:
    def test_gaussian_source_amplitude(self):
        plan = build_pipeline(_identity_scene())
        grid = plan.source.grids[0]
        expected = gaussian_transverse(grid, 1e-3)
        np.testing.assert_allclose(plan.source.tensor, expected, rtol=1e-13)
        assert plan.herald_event is None
        assert plan.scan_photons == (0,)
        assert plan.products == ("profile",)

    def test_custom_tensor_roundtrip(self):
        grid = make_grid(0.0, 0.0, 1e-3, 9)
        real = np.arange(81, dtype=float).reshape(9, 9)
        imag = np.ones((9, 9))
        scene = {
            "source": {
                "type": "custom-tensor",
                "wavelengths_m": [5e-7, 5e-7],
                "envelope_rms_s": 1e-12,
                "grid": {"half_width_m": 1e-3, "count": 9},
                "tensor_real": real.tolist(),
                "tensor_imag": imag.tolist(),
            },
            "elements": [[], []],
            "detectors": [
                {"photon": 1, "role": "herald"},
                {"photon": 0, "role": "scan"},
            ],
            "output": {"products": ["profile"]},
        }
        validate_scene(scene)
        plan = build_pipeline(scene)
        np.testing.assert_allclose(plan.source.tensor, real + 1j * imag)
        assert plan.source.grids[0].matches(grid)

    def test_custom_tensor_shape_checked(self):
        scene = {
            "source": {
                "type": "custom-tensor",
                "wavelengths_m": [5e-7, 5e-7],
                "envelope_rms_s": 1e-12,
                "grid": {"half_width_m": 1e-3, "count": 9},
                "tensor_real": np.ones((9, 8)).tolist(),
            },
            "elements": [[], []],
            "detectors": [
                {"photon": 1, "role": "herald"},
                {"photon": 0, "role": "scan"},
            ],
            "output": {"products": ["profile"]},
        }
        with pytest.raises(SceneError, match="shape"):
            build_pipeline(scene)

    def test_tabulated_mask_length_mismatch_surfaces(self):
        scene = _identity_scene(count=17)
        scene["elements"] = [
            [
                {
                    "kind": "mask",
                    "mask": {"kind": "tabulated", "values_real": [1.0, 0.5]},
                }
            ]
        ]
        validate_scene(scene)
        with pytest.raises(SimulationError):
            build_pipeline(scene)

    def test_primitive_kernels_collected(self):
        scene = _identity_scene()
        scene["elements"] = [
            [
                {
                    "kind": "free_space",
                    "distance_m": 0.5,
                    "grid": {"half_width_m": 8e-3, "count": 257},
                },
                {"kind": "lens", "focal_length_m": 0.25},
                {
                    "kind": "free_space",
                    "distance_m": 0.5,
                    "grid": {"half_width_m": 8e-3, "count": 257},
                },
            ]
        ]
        scene["source"]["wavelengths_m"] = [5e-6]
        validate_scene(scene)
        plan = build_pipeline(scene)
        assert len(plan.primitive_kernels) == 3
        labels = [k.label for k in plan.primitive_kernels]
        assert any("lens" in label for label in labels)
        assert plan.path_sets[0].output_grid.z == 1.0


class TestRunScene:
    def test_identity_profile_is_source_density(self):
        scene = _identity_scene()
        result = run_scene(scene)
        table = result.tables["profile_photon0"]
        assert table.header == ("x_m", "intensity", "phase_rad")
        x, intensity, phase = table.columns
        grid = make_grid(0.0, 0.0, 8e-3, 257)
        np.testing.assert_allclose(x, grid.samples)
        expected = np.abs(gaussian_transverse(grid, 1e-3)) ** 2
        np.testing.assert_allclose(intensity, expected, rtol=1e-12)
        integral = np.sum(intensity) * grid.spacing
        assert integral == pytest.approx(1.0, abs=1e-9)
        assert result.metadata["branches"] == {"merged": 0, "kept": 1}

    def test_heralded_biphoton_profile_normalized(self):
        result = run_scene(_biphoton_scene())
        x, intensity, _ = result.tables["profile_photon0"].columns
        spacing = x[1] - x[0]
        assert np.sum(intensity) * spacing == pytest.approx(1.0, rel=1e-9)

    def test_unheralded_coincidence_table(self):
        scene = _biphoton_scene()
        scene["detectors"] = [
            {"photon": 0, "role": "scan"},
            {"photon": 1, "role": "scan"},
        ]
        scene["output"]["products"] = ["profile", "coincidence"]
        validate_scene(scene)
        result = run_scene(scene)
        coincidence = result.tables["coincidence_photon0_photon1"]
        assert coincidence.header == ("x0_m", "x1_m", "density")
        assert coincidence.columns[2].size == 129 * 129
        # The source pins both photons together: the joint density is
        # diagonal, so off-diagonal cells are empty.
        density = coincidence.columns[2].reshape(129, 129)
        assert density[0, 128] == 0.0
        assert density[64, 64] > 0.0

    def test_opposite_path_split_arms_cancel(self):
        scene = _identity_scene(wavelength=5e-6)
        hop = {
            "kind": "free_space",
            "distance_m": 0.4,
            "grid": {"half_width_m": 8e-3, "count": 129},
        }
        scene["elements"] = [
            [
                {
                    "kind": "path_split",
                    "arms": [
                        {"weight": 1.0, "elements": [hop]},
                        {"weight": -1.0, "elements": [hop]},
                    ],
                }
            ]
        ]
        validate_scene(scene)
        result = run_scene(scene)
        _, intensity, _ = result.tables["profile_photon0"].columns
        np.testing.assert_array_equal(intensity, 0.0)
        assert result.metadata["branches"] == {"merged": 1, "kept": 1}

    def test_scenario_metadata_resolves_overrides(self):
        result = run_scene(
            {"scenario": {"name": "example1", "s3_m": 0.9}}
        )
        resolved = result.metadata["scene"]["scenario"]["resolved"]
        assert resolved["s3"] == 0.9
        assert result.metadata["metrics"]["tau_s"] == pytest.approx(
            (1.72 - 0.40 - 0.9) / 299792458.0, rel=1e-12
        )

    def test_metadata_is_json_serializable(self):
        result = run_scene(_biphoton_scene())
        text = json.dumps(result.metadata, sort_keys=True)
        assert "herald" in result.metadata
        assert json.loads(text) == result.metadata


class TestSceneKernels:
    def test_scenario_reports_validity(self):
        kernels, report = scene_kernels(load_scene("example1-default"))
        assert len(kernels) == 5
        assert report is not None and report.passed
        ratios = dict(report.far_field_ratios)
        assert ratios[
            "far-field mask to herald detector, d^2/(lambda s3)"
        ] == pytest.approx(0.02, rel=1e-12)

    def test_example2_reports_curvature_failure(self):
        kernels, report = scene_kernels(load_scene("example2-default"))
        assert report is not None and not report.passed
        assert report.curvature_ratio == pytest.approx(1.3125, rel=1e-12)

    def test_pipeline_has_no_validity_report(self):
        kernels, report = scene_kernels(_identity_scene())
        assert report is None
        assert kernels == []

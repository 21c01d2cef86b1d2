"""Command-line interface, run in process through ``main``."""

import json
import math
from pathlib import Path

import pytest

from nphoton.cli import main

SCENES_DIR = Path(__file__).resolve().parent.parent / "scenes"
IDENTITY = str(SCENES_DIR / "identity.json")
WIDE_MASK = str(SCENES_DIR / "example1_wide_mask.json")


def _read_outputs(directory: Path) -> dict:
    return {
        path.name: path.read_bytes() for path in sorted(directory.iterdir())
    }


class TestRun:
    def test_identity_run_writes_outputs(self, tmp_path, capsys):
        out = tmp_path / "out"
        assert main(["run", IDENTITY, "-o", str(out)]) == 0
        stdout = capsys.readouterr().out
        assert "wrote" in stdout
        files = _read_outputs(out)
        assert set(files) == {"profile_photon0.csv", "metadata.json"}
        header = files["profile_photon0.csv"].decode().splitlines()[0]
        assert header == "x_m,intensity,phase_rad"
        metadata = json.loads(files["metadata.json"])
        assert metadata["software"]["name"] == "nphoton"
        assert metadata["branches"] == {"merged": 0, "kept": 1}

    def test_repeated_runs_byte_identical(self, tmp_path):
        first = tmp_path / "a"
        second = tmp_path / "b"
        assert main(["run", IDENTITY, "-o", str(first)]) == 0
        assert main(["run", IDENTITY, "-o", str(second)]) == 0
        assert _read_outputs(first) == _read_outputs(second)

    def test_malformed_json_fails_without_outputs(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"scenario":')
        out = tmp_path / "out"
        assert main(["run", str(bad), "-o", str(out)]) == 1
        assert "error:" in capsys.readouterr().err
        assert not out.exists()

    def test_invalid_scene_fails_without_outputs(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"scenario": {"name": "example3"}}))
        out = tmp_path / "out"
        assert main(["run", str(bad), "-o", str(out)]) == 1
        assert "error:" in capsys.readouterr().err
        assert not out.exists()

    def test_missing_scene_fails(self, tmp_path, capsys):
        out = tmp_path / "out"
        assert main(["run", "no-such-scene", "-o", str(out)]) == 1
        assert "builtin" in capsys.readouterr().err
        assert not out.exists()

    def test_strict_elevates_warnings_but_still_writes(self, tmp_path, capsys):
        aliased = {
            "source": {
                "type": "gaussian",
                "wavelengths_m": [5e-7],
                "source_rms_m": 1.5e-3,
                "envelope_rms_s": 1e-12,
                "grid": {"half_width_m": 5e-3, "count": 64},
            },
            "elements": [
                [
                    {
                        "kind": "free_space",
                        "distance_m": 0.1,
                        "grid": {"half_width_m": 5e-3, "count": 64},
                    }
                ]
            ],
            "detectors": [{"photon": 0, "role": "scan"}],
            "output": {"products": ["profile"]},
        }
        scene = tmp_path / "aliased.json"
        scene.write_text(json.dumps(aliased))

        plain_dir = tmp_path / "plain"
        assert main(["run", str(scene), "-o", str(plain_dir)]) == 0
        plain_err = capsys.readouterr().err
        assert "warning:" in plain_err and "phase step" in plain_err

        strict_dir = tmp_path / "strict"
        assert main(["run", str(scene), "--strict", "-o", str(strict_dir)]) == 2
        strict_err = capsys.readouterr().err
        assert "strict mode" in strict_err
        # Strict mode changes the exit code, never the outputs.
        assert _read_outputs(plain_dir) == _read_outputs(strict_dir)

    def test_thread_limit_accepted(self, tmp_path):
        out = tmp_path / "out"
        assert main(["run", IDENTITY, "--threads", "1", "-o", str(out)]) == 0

    def test_bad_thread_count_fails(self, tmp_path, capsys):
        out = tmp_path / "out"
        assert main(["run", IDENTITY, "--threads", "0", "-o", str(out)]) == 1
        assert "error:" in capsys.readouterr().err

    def test_missing_output_flag_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["run", IDENTITY])
        assert excinfo.value.code == 1
        assert "error:" in capsys.readouterr().err


class TestValidate:
    def test_builtin_interferometer_passes(self, capsys):
        assert main(["validate", "example1-default"]) == 0
        stdout = capsys.readouterr().out
        assert "PASS" in stdout
        assert "0.02" in stdout
        assert "far-field mask to herald detector" in stdout
        assert "max phase step" in stdout

    def test_wide_mask_fails_far_field(self, capsys):
        assert main(["validate", WIDE_MASK]) == 2
        stdout = capsys.readouterr().out
        assert "FAIL" in stdout
        assert "4" in stdout

    def test_imaging_scenario_reports_curvature(self, capsys):
        # The imaging geometry violates the flat-correlation assumption;
        # validate reports the ratio honestly and signals failure.
        assert main(["validate", "example2-default"]) == 2
        stdout = capsys.readouterr().out
        assert "1.3125" in stdout
        assert "FAIL" in stdout

    def test_missing_scene_fails(self, capsys):
        assert main(["validate", "missing.json"]) == 1
        assert "error:" in capsys.readouterr().err


class TestOracle:
    def test_gaussian_beam(self, capsys):
        assert main(
            ["oracle", "gaussian-beam", "w0=1e-3", "lambda=0.5e-6", "z=6.2832"]
        ) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "width_m"
        assert float(lines[1]) == pytest.approx(1.4142e-3, rel=1e-4)

    def test_double_slit_on_axis(self, capsys):
        assert main(
            [
                "oracle",
                "double-slit",
                "separation=200e-6",
                "slit_width=10e-6",
                "lambda=0.5e-6",
                "distance=1.0",
            ]
        ) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "x_m,amplitude_real,amplitude_imag"
        x, real, imag = (float(v) for v in lines[1].split(","))
        assert x == 0.0
        assert real == pytest.approx(2e-5, rel=1e-12)
        assert imag == 0.0

    def test_imaging(self, capsys):
        assert main(["oracle", "imaging", "s0=0.1", "s1=0.2", "s2=0.6"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "magnification,f1_m"
        magnification, f1 = (float(v) for v in lines[1].split(","))
        assert magnification == pytest.approx(2.0, rel=1e-12)
        assert f1 == pytest.approx(0.2, rel=1e-12)

    def test_flatness(self, capsys):
        assert main(
            [
                "oracle",
                "flatness",
                "lambda1=0.7e-6",
                "lambda2=0.35e-6",
                "M=2",
                "s0=0.1",
                "s2=0.6",
                "s3=0.2",
                "s4=0.3",
            ]
        ) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "f2_m,feasible,lower_m,upper_m,residual"
        f2, feasible, lower, upper, residual = lines[1].split(",")
        assert float(f2) == pytest.approx(0.17142857142857143, rel=1e-14)
        assert feasible == "true"
        assert float(lower) == pytest.approx(0.15, rel=1e-12)
        assert float(upper) == 0.3
        assert float(residual) < 1e-12

    def test_unknown_oracle_fails(self, capsys):
        assert main(["oracle", "frobnicate"]) == 1
        err = capsys.readouterr().err
        assert "gaussian-beam" in err

    def test_missing_parameter_fails(self, capsys):
        assert main(["oracle", "gaussian-beam", "w0=1e-3"]) == 1
        assert "missing" in capsys.readouterr().err

    def test_unknown_parameter_fails(self, capsys):
        assert main(
            ["oracle", "gaussian-beam", "w0=1e-3", "lambda=0.5e-6", "z=1", "q=2"]
        ) == 1
        assert "unknown" in capsys.readouterr().err

    def test_malformed_parameter_fails(self, capsys):
        assert main(["oracle", "gaussian-beam", "w0", "lambda=0.5e-6"]) == 1
        assert "key=value" in capsys.readouterr().err


class TestCsvFormat:
    def test_full_precision_and_trailing_newline(self, tmp_path):
        out = tmp_path / "out"
        assert main(["run", IDENTITY, "-o", str(out)]) == 0
        text = (out / "profile_photon0.csv").read_text()
        assert text.endswith("\n")
        rows = text.splitlines()[1:]
        assert len(rows) == 257
        # Round-tripping through the printed representation is lossless.
        x = [float(row.split(",")[0]) for row in rows]
        assert x[0] == -8e-3
        assert math.isclose(x[1] - x[0], 16e-3 / 256, rel_tol=1e-15)

    def test_metadata_sorted_and_stable(self, tmp_path):
        out = tmp_path / "out"
        assert main(["run", IDENTITY, "-o", str(out)]) == 0
        text = (out / "metadata.json").read_text()
        parsed = json.loads(text)
        assert text == json.dumps(parsed, sort_keys=True, indent=2) + "\n"

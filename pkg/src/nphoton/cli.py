"""Command-line entry points.

Three subcommands::

    nphoton run <scene> -o <dir> [--strict] [--threads N]
    nphoton validate <scene>
    nphoton oracle <name> [key=value ...]

``<scene>`` is a JSON scene file path or a builtin name
(``example1-default``, ``example2-default``).  ``run`` writes one CSV
per output table plus ``metadata.json`` into the output directory;
every file is written to a temporary name and atomically renamed, and
nothing is written at all if the scene fails to parse or validate.
Outputs carry no timestamps and are byte-identical across repeated
runs of the same scene.

Exit codes: 0 on success, 1 on errors (missing or malformed scene,
unknown oracle, runtime failure), 2 when ``validate`` fails or when
``--strict`` elevates sampling or far-field warnings.  ``--strict``
never changes the numerical outputs, only the exit code.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import math
import os
import sys
import tempfile
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .core import SimulationError
from .kernels import AliasingWarning, DoubleSlitMask
from .oracles import (
    NoSolutionError,
    fraunhofer_double_slit,
    gaussian_beam_width,
    imaging_params,
    solve_flatness_f2,
)
from .scene import SceneError, Table, load_scene, run_scene, scene_kernels

ORACLE_NAMES = ("gaussian-beam", "double-slit", "imaging", "flatness")


class _Parser(argparse.ArgumentParser):
    """Argument errors are input errors: exit 1, not argparse's 2."""

    def error(self, message: str) -> "None":
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 1


# ---------------------------------------------------------------------------
# Output writing
# ---------------------------------------------------------------------------


def _atomic_write(path: Path, text: str) -> None:
    handle, temp_name = tempfile.mkstemp(
        dir=path.parent, prefix=path.name + ".", suffix=".tmp"
    )
    try:
        with os.fdopen(handle, "w", newline="\n") as stream:
            stream.write(text)
        os.replace(temp_name, path)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(temp_name)
        raise


def _csv_text(table: Table) -> str:
    columns = [np.asarray(column, dtype=float) for column in table.columns]
    lines = [",".join(table.header)]
    for row in zip(*columns):
        lines.append(",".join(format(value, ".17g") for value in row))
    return "\n".join(lines) + "\n"


def _write_outputs(outdir: Path, tables: dict, metadata: dict) -> list[str]:
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for name in sorted(tables):
        path = outdir / f"{name}.csv"
        _atomic_write(path, _csv_text(tables[name]))
        written.append(path.name)
    _atomic_write(
        outdir / "metadata.json",
        json.dumps(metadata, sort_keys=True, indent=2) + "\n",
    )
    written.append("metadata.json")
    return written


def _thread_limit(count: "int | None"):
    if count is None:
        return contextlib.nullcontext()
    if count < 1:
        raise SceneError(f"--threads must be at least 1, got {count}")
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:
        print(
            "note: threadpoolctl is not installed, --threads has no effect",
            file=sys.stderr,
        )
        return contextlib.nullcontext()
    return threadpool_limits(limits=count)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_run(args: argparse.Namespace) -> int:
    document = load_scene(args.scene)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        with _thread_limit(args.threads):
            result = run_scene(document)
    metadata = {
        "software": {"name": "nphoton", "version": __version__},
        **result.metadata,
    }
    written = _write_outputs(Path(args.output), result.tables, metadata)

    complaints = [
        str(record.message)
        for record in caught
        if issubclass(record.category, AliasingWarning)
    ]
    validity = result.metadata.get("validity")
    if validity:
        complaints.extend(validity["warnings"])
    for complaint in complaints:
        print(f"warning: {complaint}", file=sys.stderr)
    print(f"wrote {', '.join(written)} to {args.output}")
    if args.strict and complaints:
        print("strict mode: warnings are fatal", file=sys.stderr)
        return 2
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    document = load_scene(args.scene)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AliasingWarning)
        kernels, report = scene_kernels(document)
    aliased = False
    for kernel in kernels:
        step = kernel.max_phase_step
        if step is None:
            print(f"kernel {kernel.label}: no sampling constraint")
            continue
        status = "ok" if step < math.pi else "ALIASED"
        aliased = aliased or step >= math.pi
        print(
            f"kernel {kernel.label}: max phase step {step:.4f} rad "
            f"({step / math.pi:.3f} pi) [{status}]"
        )
    failed = aliased
    if report is not None:
        for description, value in report.far_field_ratios:
            status = "ok" if value <= report.pass_threshold else "FAIL"
            print(f"ratio {description}: {value:.6g} [{status}]")
        status = (
            "ok" if report.curvature_ratio <= report.pass_threshold else "FAIL"
        )
        print(
            "ratio source curvature, lambda (s0+min(s1,s2))/(4 S^2): "
            f"{report.curvature_ratio:.6g} [{status}]"
        )
        print(f"threshold {report.pass_threshold:g}")
        failed = failed or not report.passed
    print("FAIL" if failed else "PASS")
    return 2 if failed else 0


def _parse_oracle_params(pairs: "list[str]") -> dict:
    params = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise SceneError(f"oracle parameters look like key=value, got {pair!r}")
        try:
            params[key] = float(value)
        except ValueError as exc:
            raise SceneError(f"parameter {key!r} is not a number: {value!r}") from exc
    return params


def _require(params: dict, *names: str) -> list[float]:
    missing = [name for name in names if name not in params]
    if missing:
        raise SceneError(f"missing oracle parameters: {', '.join(missing)}")
    unknown = sorted(set(params) - set(names) - {"offset", "phase", "x"})
    if unknown:
        raise SceneError(f"unknown oracle parameters: {', '.join(unknown)}")
    return [params[name] for name in names]


def cmd_oracle(args: argparse.Namespace) -> int:
    if args.name not in ORACLE_NAMES:
        return _fail(
            f"unknown oracle {args.name!r}; available: {', '.join(ORACLE_NAMES)}"
        )
    params = _parse_oracle_params(args.params)
    if args.name == "gaussian-beam":
        waist, lam, z = _require(params, "w0", "lambda", "z")
        width = gaussian_beam_width(waist, lam, z)
        print("width_m")
        print(format(width, ".17g"))
    elif args.name == "double-slit":
        separation, slit_width, lam, distance = _require(
            params, "separation", "slit_width", "lambda", "distance"
        )
        mask = DoubleSlitMask(
            separation=separation,
            slit_width=slit_width,
            offset=params.get("offset", 0.0),
            phase=params.get("phase", 0.0),
        )
        x = params.get("x", 0.0)
        amplitude = fraunhofer_double_slit(mask, lam, distance, x)
        print("x_m,amplitude_real,amplitude_imag")
        print(
            ",".join(
                format(value, ".17g")
                for value in (x, amplitude.real, amplitude.imag)
            )
        )
    elif args.name == "imaging":
        s0, s1, s2 = _require(params, "s0", "s1", "s2")
        magnification, f1 = imaging_params(s0, s1, s2)
        print("magnification,f1_m")
        print(f"{format(magnification, '.17g')},{format(f1, '.17g')}")
    else:
        lam1, lam2, mag, s0, s2, s3, s4 = _require(
            params, "lambda1", "lambda2", "M", "s0", "s2", "s3", "s4"
        )
        solution = solve_flatness_f2(lam1, lam2, mag, s0, s2, s3, s4)
        print("f2_m,feasible,lower_m,upper_m,residual")
        print(
            ",".join(
                [
                    format(solution.f2, ".17g"),
                    "true" if solution.feasible else "false",
                    format(solution.bounds[0], ".17g"),
                    format(solution.bounds[1], ".17g"),
                    format(solution.residual, ".17g"),
                ]
            )
        )
    return 0


def main(argv: "list[str] | None" = None) -> int:
    parser = _Parser(
        prog="nphoton",
        description="Dense-matrix few-photon transverse amplitude simulator.",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    run_parser = subparsers.add_parser(
        "run", help="execute a scene and write CSV + metadata outputs"
    )
    run_parser.add_argument("scene", help="scene file path or builtin name")
    run_parser.add_argument(
        "-o", "--output", required=True, help="output directory"
    )
    run_parser.add_argument(
        "--strict",
        action="store_true",
        help="exit 2 if any sampling or far-field warning fires",
    )
    run_parser.add_argument(
        "--threads",
        type=int,
        default=None,
        help="cap BLAS threads (needs threadpoolctl; default leaves them alone)",
    )

    validate_parser = subparsers.add_parser(
        "validate", help="report sampling and far-field checks without running"
    )
    validate_parser.add_argument("scene", help="scene file path or builtin name")

    oracle_parser = subparsers.add_parser(
        "oracle", help="print closed-form reference values as CSV"
    )
    oracle_parser.add_argument("name", help=f"one of: {', '.join(ORACLE_NAMES)}")
    oracle_parser.add_argument(
        "params", nargs="*", help="key=value parameters, all numeric"
    )

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "validate":
            return cmd_validate(args)
        return cmd_oracle(args)
    except (SceneError, SimulationError, NoSolutionError) as exc:
        return _fail(str(exc))
    except OSError as exc:
        return _fail(f"i/o failure: {exc}")


if __name__ == "__main__":
    sys.exit(main())

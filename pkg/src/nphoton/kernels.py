"""Single-photon propagation kernels as dense grid-to-grid matrices.

A kernel maps a sampled amplitude on one transverse plane to a sampled
amplitude on a later plane by plain matrix application; the midpoint
quadrature weight (input grid spacing) is folded into the matrix
entries, so propagation is literally ``matrix @ vector``.

Free-space propagation between planes separated by ``z`` uses the exact
two-point distance ``R = sqrt((x_out - x_in)^2 + z^2)`` with entries

    exp(i (2 pi R / lambda - pi/4)) / sqrt(lambda R) * dx_in

which is the cylindrical-wave (one transverse dimension) kernel: its
1/sqrt(lambda R) magnitude and -pi/4 phase bias are what makes the
discrete propagation unitary on adequately sampled grids, so norms,
Gaussian beam widths and the semigroup property all come out right
without per-distance fudge factors.  The paraxial variant replaces R
by its quadratic expansion and is kept as an oracle for the exact one.
No obliquity factor is applied.

Nothing here is ever evaluated lazily or on the fly: kernels are
precomputed dense complex matrices (grids stay at or below 4096
samples), immutable, and reused across photons and paths.

Sampling diagnostics: every oscillatory kernel records the worst-case
phase difference between adjacent entries along a matrix row
(``max_phase_step``, evaluated analytically at the grid corners).  If
it reaches pi the kernel is aliased and construction emits
:class:`AliasingWarning`; results computed from such a kernel are
garbage even though every individual entry is finite.
"""

from __future__ import annotations

import math
import warnings
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from .core import (
    InvalidArgumentError,
    InvalidGeometryError,
    TransverseGrid,
    Wavelength,
    as_wavelength,
)


class AliasingWarning(UserWarning):
    """A kernel's phase advances by >= pi between adjacent samples."""


_PATH_LENGTH_ATOL = 1e-12


@dataclass(frozen=True, eq=False)
class Kernel:
    """Dense linear map between two transverse grids.

    Attributes
    ----------
    input_grid, output_grid:
        Planes the kernel maps between.
    matrix:
        complex128 array of shape (output count, input count) with the
        input quadrature weight already folded in.
    path_length:
        Nominal optical path length in metres, used for arrival-time
        bookkeeping.  Never less than the axial separation of the two
        planes.
    wavelength:
        The vacuum wavelength the entries were evaluated at, or None
        for wavelength-independent elements (masks, identity).
    label:
        Short human-readable description used in diagnostics.
    max_phase_step:
        Worst-case phase increment (rad) between adjacent entries
        along a row, or None when the kernel has no oscillatory
        structure to sample (masks, composites).
    """

    input_grid: TransverseGrid
    output_grid: TransverseGrid
    matrix: np.ndarray
    path_length: float
    wavelength: Wavelength | None
    label: str = ""
    max_phase_step: float | None = None

    def __post_init__(self) -> None:
        matrix = np.asarray(self.matrix, dtype=np.complex128)
        expected = (self.output_grid.count, self.input_grid.count)
        if matrix.shape != expected:
            raise InvalidArgumentError(
                f"kernel matrix shape {matrix.shape} does not match grids {expected}"
            )
        length = float(self.path_length)
        if not math.isfinite(length):
            raise InvalidArgumentError(f"path_length must be finite, got {length!r}")
        gap = abs(self.output_grid.z - self.input_grid.z)
        if length < gap - _PATH_LENGTH_ATOL * max(1.0, gap):
            raise InvalidGeometryError(
                f"path_length {length!r} is shorter than the plane gap {gap!r}"
            )
        matrix = matrix.copy()
        matrix.flags.writeable = False
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "path_length", length)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.output_grid.count, self.input_grid.count)

    def apply(self, vector: np.ndarray) -> np.ndarray:
        """Apply to a sampled amplitude on the input grid."""
        vector = np.asarray(vector)
        if vector.shape != (self.input_grid.count,):
            raise InvalidArgumentError(
                f"vector length {vector.shape} does not match "
                f"input grid count {self.input_grid.count}"
            )
        return self.matrix @ vector


def _warn_if_aliased(label: str, max_phase_step: float) -> None:
    if max_phase_step >= math.pi:
        warnings.warn(
            AliasingWarning(
                f"{label}: phase step {max_phase_step:.3f} rad >= pi between "
                "adjacent samples; refine the grids or shrink the spans"
            ),
            stacklevel=3,
        )


def _max_transverse_separation(a: TransverseGrid, b: TransverseGrid) -> float:
    return max(
        abs(float(b.samples[-1]) - float(a.samples[0])),
        abs(float(a.samples[-1]) - float(b.samples[0])),
    )


def free_space_kernel(
    input_grid: TransverseGrid,
    output_grid: TransverseGrid,
    wavelength: Wavelength | float,
) -> Kernel:
    """Exact free-space kernel between two planes.

    Uses the full two-point distance, so it remains valid far outside
    the paraxial cone; the price is that it is not a convolution and
    must be applied densely.  Requires ``output_grid.z > input_grid.z``.
    """
    wavelength = as_wavelength(wavelength)
    dz = output_grid.z - input_grid.z
    if dz <= 0:
        raise InvalidGeometryError(
            f"free-space propagation needs z_out > z_in, got gap {dz!r}"
        )
    lam = wavelength.value
    sep = output_grid.samples[:, None] - input_grid.samples[None, :]
    r = np.hypot(sep, dz)
    matrix = (
        np.exp(1j * (2.0 * math.pi * r / lam - 0.25 * math.pi))
        / np.sqrt(lam * r)
        * input_grid.spacing
    )
    sep_max = _max_transverse_separation(input_grid, output_grid)
    sin_theta = sep_max / math.hypot(sep_max, dz)
    step = 2.0 * math.pi * sin_theta * input_grid.spacing / lam
    label = f"free-space z={input_grid.z:g}->{output_grid.z:g}"
    _warn_if_aliased(label, step)
    return Kernel(
        input_grid=input_grid,
        output_grid=output_grid,
        matrix=matrix,
        path_length=dz,
        wavelength=wavelength,
        label=label,
        max_phase_step=step,
    )


def fresnel_kernel(
    input_grid: TransverseGrid,
    output_grid: TransverseGrid,
    wavelength: Wavelength | float,
) -> Kernel:
    """Paraxial (quadratic-phase) free-space kernel.

    Agrees with :func:`free_space_kernel` on axis exactly and to better
    than 1e-3 relative while transverse offsets stay within z/100; kept
    as an independently-coded cross-check for the exact kernel.
    """
    wavelength = as_wavelength(wavelength)
    dz = output_grid.z - input_grid.z
    if dz <= 0:
        raise InvalidGeometryError(
            f"free-space propagation needs z_out > z_in, got gap {dz!r}"
        )
    lam = wavelength.value
    sep = output_grid.samples[:, None] - input_grid.samples[None, :]
    phase = 2.0 * math.pi * dz / lam + math.pi * sep**2 / (lam * dz) - 0.25 * math.pi
    matrix = np.exp(1j * phase) / math.sqrt(lam * dz) * input_grid.spacing
    sep_max = _max_transverse_separation(input_grid, output_grid)
    step = 2.0 * math.pi * sep_max * input_grid.spacing / (lam * dz)
    label = f"fresnel z={input_grid.z:g}->{output_grid.z:g}"
    _warn_if_aliased(label, step)
    return Kernel(
        input_grid=input_grid,
        output_grid=output_grid,
        matrix=matrix,
        path_length=dz,
        wavelength=wavelength,
        label=label,
        max_phase_step=step,
    )


def lens_kernel(
    grid: TransverseGrid,
    focal_length: float,
    wavelength: Wavelength | float,
) -> Kernel:
    """Thin lens: diagonal quadratic phase exp(-i pi x^2 / (lambda f)).

    Positive ``focal_length`` converges.  The lens is infinitesimally
    thin: input and output share the same grid and the path length is
    zero.
    """
    wavelength = as_wavelength(wavelength)
    focal_length = float(focal_length)
    if focal_length == 0 or not math.isfinite(focal_length):
        raise InvalidArgumentError(f"focal length must be nonzero, got {focal_length!r}")
    lam = wavelength.value
    x = grid.samples
    matrix = np.diag(np.exp(-1j * math.pi * x**2 / (lam * focal_length)))
    edge = max(abs(float(x[0])), abs(float(x[-1])))
    step = 2.0 * math.pi * edge * grid.spacing / (lam * abs(focal_length))
    label = f"lens f={focal_length:g} at z={grid.z:g}"
    _warn_if_aliased(label, step)
    return Kernel(
        input_grid=grid,
        output_grid=grid,
        matrix=matrix,
        path_length=0.0,
        wavelength=wavelength,
        label=label,
        max_phase_step=step,
    )


# ---------------------------------------------------------------------------
# Transmission masks
# ---------------------------------------------------------------------------


class MaskSpec(ABC):
    """Complex transmission profile with |t| <= 1 everywhere."""

    @abstractmethod
    def transmission(self, x: np.ndarray) -> np.ndarray:
        """Sampled complex transmission at coordinates ``x`` (metres)."""


@dataclass(frozen=True)
class DoubleSlitMask(MaskSpec):
    """Two clear slits of width ``slit_width`` centred ``separation`` apart.

    Transmission is exp(i*phase) strictly inside the two windows
    |x - offset -+ separation/2| < slit_width/2 and zero elsewhere.
    ``offset`` shifts the whole pattern laterally.
    """

    separation: float
    slit_width: float
    offset: float = 0.0
    phase: float = 0.0

    def __post_init__(self) -> None:
        if not (0 < self.slit_width < self.separation):
            raise InvalidArgumentError(
                "need 0 < slit_width < separation, got "
                f"width {self.slit_width!r}, separation {self.separation!r}"
            )
        for name in ("separation", "slit_width", "offset", "phase"):
            if not math.isfinite(float(getattr(self, name))):
                raise InvalidArgumentError(f"{name} must be finite")

    def slit_centers(self) -> tuple[float, float]:
        return (self.offset - self.separation / 2, self.offset + self.separation / 2)

    def transmission(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=np.complex128)
        value = np.exp(1j * self.phase)
        for center in self.slit_centers():
            out[np.abs(x - center) < self.slit_width / 2] = value
        return out


@dataclass(frozen=True)
class GaussianApertureMask(MaskSpec):
    """Soft aperture with amplitude transmission exp(-(x-c)^2 / (2 sigma^2)).

    ``sigma`` is the 1/sqrt(e) half-width of the amplitude (so the
    transmitted intensity falls to 1/e at ``sigma``).
    """

    sigma: float
    center: float = 0.0

    def __post_init__(self) -> None:
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise InvalidArgumentError(f"sigma must be positive, got {self.sigma!r}")
        if not math.isfinite(self.center):
            raise InvalidArgumentError(f"center must be finite, got {self.center!r}")

    def transmission(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.exp(-((x - self.center) ** 2) / (2.0 * self.sigma**2)).astype(
            np.complex128
        )


@dataclass(frozen=True, eq=False)
class PhaseMask(MaskSpec):
    """Unit-magnitude mask: uniform phase (scalar) or sampled phase array."""

    phase: float | np.ndarray

    def __post_init__(self) -> None:
        phase = self.phase
        if np.isscalar(phase):
            if not math.isfinite(float(phase)):
                raise InvalidArgumentError(f"phase must be finite, got {phase!r}")
            object.__setattr__(self, "phase", float(phase))
            return
        phase = np.asarray(phase, dtype=float)
        if phase.ndim != 1 or not np.all(np.isfinite(phase)):
            raise InvalidArgumentError("sampled phase must be a finite 1-D array")
        phase = phase.copy()
        phase.flags.writeable = False
        object.__setattr__(self, "phase", phase)

    def transmission(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if np.isscalar(self.phase):
            return np.full(x.shape, np.exp(1j * self.phase), dtype=np.complex128)
        if self.phase.shape != x.shape:
            raise InvalidArgumentError(
                f"sampled phase has {self.phase.shape[0]} entries, "
                f"grid has {x.shape[0]}"
            )
        return np.exp(1j * self.phase)


@dataclass(frozen=True, eq=False)
class TabulatedMask(MaskSpec):
    """Arbitrary sampled complex transmission, |values| <= 1."""

    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.complex128)
        if values.ndim != 1:
            raise InvalidArgumentError("tabulated transmission must be 1-D")
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError("tabulated transmission must be finite")
        if np.any(np.abs(values) > 1.0 + 1e-12):
            raise InvalidArgumentError(
                "transmission magnitude exceeds 1 "
                f"(max {float(np.max(np.abs(values)))!r})"
            )
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def transmission(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x)
        if self.values.shape != x.shape:
            raise InvalidArgumentError(
                f"tabulated mask has {self.values.shape[0]} entries, "
                f"grid has {x.shape[0]}"
            )
        return self.values.copy()


def mask_kernel(grid: TransverseGrid, mask: MaskSpec) -> Kernel:
    """Diagonal kernel of the mask's sampled transmission.

    Point-samples the transmission at the grid coordinates: features
    narrower than a grid cell are the caller's responsibility to
    resolve.  Wavelength-independent, zero path length.
    """
    if not isinstance(mask, MaskSpec):
        raise InvalidArgumentError(f"expected a MaskSpec, got {type(mask).__name__}")
    t = np.asarray(mask.transmission(grid.samples), dtype=np.complex128)
    if t.shape != grid.samples.shape:
        raise InvalidArgumentError(
            f"mask returned {t.shape} samples for a {grid.count}-point grid"
        )
    if np.any(np.abs(t) > 1.0 + 1e-12):
        raise InvalidArgumentError("mask transmission magnitude exceeds 1")
    return Kernel(
        input_grid=grid,
        output_grid=grid,
        matrix=np.diag(t),
        path_length=0.0,
        wavelength=None,
        label=f"mask {type(mask).__name__} at z={grid.z:g}",
        max_phase_step=None,
    )


def identity_kernel(grid: TransverseGrid) -> Kernel:
    """Do-nothing kernel on one plane."""
    return Kernel(
        input_grid=grid,
        output_grid=grid,
        matrix=np.eye(grid.count, dtype=np.complex128),
        path_length=0.0,
        wavelength=None,
        label=f"identity at z={grid.z:g}",
        max_phase_step=None,
    )


# ---------------------------------------------------------------------------
# Composition and multi-path sets
# ---------------------------------------------------------------------------


def _merge_wavelengths(
    a: Wavelength | None, b: Wavelength | None, context: str
) -> Wavelength | None:
    if a is None:
        return b
    if b is None:
        return a
    if a.value != b.value:
        raise InvalidGeometryError(
            f"{context}: wavelength mismatch ({a.value!r} vs {b.value!r})"
        )
    return a


def compose(first: Kernel, second: Kernel) -> Kernel:
    """Kernel equivalent to applying ``first`` then ``second``.

    The matrix is ``second.matrix @ first.matrix`` and path lengths
    add.  The planes must agree: ``first.output_grid`` is
    ``second.input_grid``, and wavelengths must match where both are
    defined.
    """
    if not first.output_grid.matches(second.input_grid):
        raise InvalidGeometryError(
            "cannot compose: first.output_grid does not match second.input_grid "
            f"({first.label!r} -> {second.label!r})"
        )
    wavelength = _merge_wavelengths(first.wavelength, second.wavelength, "compose")
    return Kernel(
        input_grid=first.input_grid,
        output_grid=second.output_grid,
        matrix=second.matrix @ first.matrix,
        path_length=first.path_length + second.path_length,
        wavelength=wavelength,
        label=f"({second.label}) o ({first.label})",
        max_phase_step=None,
    )


@dataclass(frozen=True, eq=False)
class PathSet:
    """Alternative single-photon paths between one pair of planes.

    Each kernel already carries its path weight folded into the matrix
    and its own optical path length; interference between paths is
    decided downstream by comparing those lengths.
    """

    paths: tuple[Kernel, ...]

    def __post_init__(self) -> None:
        if not self.paths:
            raise InvalidArgumentError("path set needs at least one path")
        head = self.paths[0]
        wavelength = head.wavelength
        for kernel in self.paths[1:]:
            if not kernel.input_grid.matches(head.input_grid) or not (
                kernel.output_grid.matches(head.output_grid)
            ):
                raise InvalidGeometryError(
                    "all paths in a set must share input and output grids"
                )
            wavelength = _merge_wavelengths(
                wavelength, kernel.wavelength, "path set"
            )
        object.__setattr__(self, "paths", tuple(self.paths))

    @property
    def input_grid(self) -> TransverseGrid:
        return self.paths[0].input_grid

    @property
    def output_grid(self) -> TransverseGrid:
        return self.paths[0].output_grid

    @property
    def path_lengths(self) -> tuple[float, ...]:
        return tuple(k.path_length for k in self.paths)

    def summed_kernel(self) -> Kernel:
        """Coherent sum of all paths; requires equal path lengths."""
        lengths = self.path_lengths
        spread = max(lengths) - min(lengths)
        if spread > _PATH_LENGTH_ATOL * max(1.0, max(lengths)):
            raise InvalidArgumentError(
                f"paths differ in length by {spread!r} m; they are temporally "
                "distinguishable and cannot be summed into one kernel"
            )
        matrix = self.paths[0].matrix.copy()
        for kernel in self.paths[1:]:
            matrix += kernel.matrix
        wavelength = None
        for kernel in self.paths:
            wavelength = _merge_wavelengths(wavelength, kernel.wavelength, "path sum")
        return Kernel(
            input_grid=self.input_grid,
            output_grid=self.output_grid,
            matrix=matrix,
            path_length=lengths[0],
            wavelength=wavelength,
            label=f"sum of {len(self.paths)} paths",
            max_phase_step=None,
        )


def path_set(paths: list[tuple[Kernel, complex]]) -> PathSet:
    """Build a :class:`PathSet`, folding each weight into its kernel."""
    if not paths:
        raise InvalidArgumentError("path set needs at least one path")
    folded = []
    for kernel, weight in paths:
        weight = complex(weight)
        folded.append(
            Kernel(
                input_grid=kernel.input_grid,
                output_grid=kernel.output_grid,
                matrix=weight * kernel.matrix,
                path_length=kernel.path_length,
                wavelength=kernel.wavelength,
                label=f"{weight!r} * ({kernel.label})",
                max_phase_step=kernel.max_phase_step,
            )
        )
    return PathSet(paths=tuple(folded))

"""End-to-end heralded-interference and two-color imaging pipelines.

Two scenarios are wired here, from entangled source amplitude through
per-photon propagation to a heralded conditional state and its summary
metrics.

The first sends one photon of a position-correlated pair directly to a
scanning detector while its twin traverses a balanced two-arm
interferometer holding a diffraction mask in each arm, and is then
detected on axis.  Conditioned on that click, the scanning detector
sees the coherent sum of the two mask diffraction patterns even though
the scanned photon never touched a mask; the fringes live at the
far-field scale of the *summed* distances (source to scan plus source
to mask), which is the signature of correlated-pair diffraction.  The
relative weight of the two arms is (-1/sqrt(2), +exp(i(phi+pi))/sqrt(2)):
an alternating sign per arm from the two balanced splitter traversals,
a pi port offset so the nominally dark output port carries the sum
pattern, and the adjustable phase phi on the second arm.

The second scenario images a position-correlated photon triplet: two
photons of wavelength lambda1 pass one imaging lens onto a common
detector plane while the third, at lambda2, heralds.  The conditional
pair bunches on the image-plane diagonal with a Gaussian envelope
magnified by |M|, carrying a quadratic phase that a suitable herald-arm
lens cancels.

Default configurations are tuned so every kernel passes the sampling
criterion and the far-field metrics land well inside their analytic
targets; grids are explicit because silent auto-gridding is how
aliasing bugs hide.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .core import (
    SPEED_OF_LIGHT,
    InvalidArgumentError,
    InvalidGeometryError,
    NPhotonAmplitude,
    TemporalModel,
    TransverseGrid,
    Wavelength,
    as_wavelength,
    gaussian_transverse,
    make_grid,
)
from .engine import (
    PropagationResult,
    ValidityReport,
    check_validity,
    propagate,
)
from .kernels import (
    DoubleSlitMask,
    GaussianApertureMask,
    Kernel,
    compose,
    free_space_kernel,
    lens_kernel,
    mask_kernel,
    path_set,
)
from .measurement import (
    HeraldedState,
    HeraldEvent,
    diagonal_energy_fraction,
    fit_quadratic_phase,
    fringe_period,
    herald,
    intensity_profile,
    rms_width,
    visibility,
)
from .oracles import LensFlatnessSolution, imaging_params, solve_flatness_f2


@dataclass(frozen=True)
class GridSpec:
    """Recipe for a symmetric uniform grid, independent of its plane."""

    half_width: float
    count: int
    center: float = 0.0

    def build(self, z: float) -> TransverseGrid:
        return make_grid(z, self.center, self.half_width, self.count)


def _require_positive(**lengths: float) -> None:
    for name, value in lengths.items():
        if not (value > 0 and math.isfinite(value)):
            raise InvalidArgumentError(f"{name} must be positive, got {value!r}")


# ---------------------------------------------------------------------------
# Heralded two-mask interference
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Example1Config:
    """Geometry and grids for the heralded two-mask interferometer.

    Photon a flies from the source plane over s0 + s1 to the scanning
    detector; photon b flies s0 + s2 to the mask plane (one mask per
    interferometer arm, equal arm lengths) and then s3 to the on-axis
    herald detector.  ``source_rms`` is the rms of the squared source
    envelope; ``envelope_rms`` the temporal analogue.
    """

    wavelength: Wavelength
    source_rms: float
    envelope_rms: float
    s0: float
    s1: float
    s2: float
    s3: float
    mask1: DoubleSlitMask
    mask2: DoubleSlitMask
    phase: float
    source_grid: GridSpec
    mask_grid: GridSpec
    detector_a_grid: GridSpec
    detector_b_grid: GridSpec

    def __post_init__(self) -> None:
        object.__setattr__(self, "wavelength", as_wavelength(self.wavelength))
        _require_positive(
            source_rms=self.source_rms,
            envelope_rms=self.envelope_rms,
            s0=self.s0,
            s1=self.s1,
            s2=self.s2,
            s3=self.s3,
        )
        if not math.isfinite(self.phase):
            raise InvalidArgumentError(f"phase must be finite, got {self.phase!r}")

    @property
    def fringe_scale(self) -> float:
        """Distance setting the heralded fringe period: 2 s0 + s1 + s2."""
        return 2 * self.s0 + self.s1 + self.s2

    @property
    def mask_half_extent(self) -> float:
        """Outermost illuminated mask coordinate (the far-field d scale)."""
        return max(
            abs(m.offset) + m.separation / 2 + m.slit_width / 2
            for m in (self.mask1, self.mask2)
        )

    @classmethod
    def default(cls) -> "Example1Config":
        """Identical 190 um double slits, fringe period 5.79 mm.

        All validity ratios sit below 0.05 and every kernel is
        comfortably inside the sampling criterion, so the heralded
        pattern tracks the far-field oracle to about 1%.
        """
        mask = DoubleSlitMask(separation=190e-6, slit_width=10e-6)
        return cls(
            wavelength=Wavelength(0.5e-6),
            source_rms=12.7e-3,
            envelope_rms=1e-12,
            s0=0.04,
            s1=1.72,
            s2=0.40,
            s3=1.0,
            mask1=mask,
            mask2=mask,
            phase=0.0,
            source_grid=GridSpec(half_width=14.224e-3, count=4096),
            mask_grid=GridSpec(half_width=104e-6, count=833),
            detector_a_grid=GridSpec(half_width=16e-3, count=1280),
            detector_b_grid=GridSpec(half_width=0.5e-3, count=65),
        )

    @classmethod
    def interleaved(cls, phase: float = 0.0) -> "Example1Config":
        """Masks offset by half their slit separation in opposite
        directions, so the two slit patterns interleave on a common
        100 um pitch.  Toggling ``phase`` between 0 and pi doubles the
        fringe frequency: the arms switch between reinforcing the
        shared pitch and cancelling every other effective slit.
        """
        return cls(
            wavelength=Wavelength(0.5e-6),
            source_rms=4e-3,
            envelope_rms=1e-12,
            s0=0.06,
            s1=1.14,
            s2=0.30,
            s3=0.36,
            mask1=DoubleSlitMask(separation=100e-6, slit_width=10e-6, offset=-50e-6),
            mask2=DoubleSlitMask(separation=100e-6, slit_width=10e-6, offset=+50e-6),
            phase=phase,
            source_grid=GridSpec(half_width=10e-3, count=2816),
            mask_grid=GridSpec(half_width=112e-6, count=897),
            detector_a_grid=GridSpec(half_width=24e-3, count=1024),
            detector_b_grid=GridSpec(half_width=0.5e-3, count=65),
        )


@dataclass(frozen=True, eq=False)
class Example1Result:
    """Heralded scan-detector pattern and its summary numbers."""

    detector_grid: TransverseGrid
    profile: np.ndarray
    tau: float
    fringe_period: float
    validity: ValidityReport
    heralded: HeraldedState
    propagation: PropagationResult


def correlated_pair(
    grid: TransverseGrid,
    wavelength: Wavelength,
    source_rms: float,
    envelope_rms: float,
) -> NPhotonAmplitude:
    """Position-correlated biphoton: Gaussian envelope times a sampled
    delta pinning the two photons to the same transverse point."""
    envelope = gaussian_transverse(grid, source_rms)
    tensor = np.zeros((grid.count, grid.count), dtype=np.complex128)
    np.fill_diagonal(tensor, envelope / grid.spacing)
    return NPhotonAmplitude(
        grids=(grid, grid),
        wavelengths=(wavelength, wavelength),
        tensor=tensor,
        temporal=TemporalModel.for_photons(2, envelope_rms, reference_index=1),
    )


def run_example1(config: Example1Config) -> Example1Result:
    """Run the heralded two-mask interferometer.

    Builds the correlated pair on the source grid, propagates photon a
    straight to the scanning detector and photon b through both
    interferometer arms onto the herald detector, conditions on the
    on-axis herald click, and measures the resulting fringe pattern.
    ``tau``, the expected arrival-time offset of photon a relative to
    the herald click, is computed analytically as (s1 - s2 - s3)/c;
    the engine's accumulated-delay bookkeeping reproduces it only to
    rounding.
    """
    lam = config.wavelength
    source = config.source_grid.build(z=0.0)
    mask_plane = config.mask_grid.build(z=config.s0 + config.s2)
    plane_a = config.detector_a_grid.build(z=config.s0 + config.s1)
    plane_b = config.detector_b_grid.build(z=config.s0 + config.s2 + config.s3)

    pair = correlated_pair(source, lam, config.source_rms, config.envelope_rms)

    to_detector_a = free_space_kernel(source, plane_a, lam)
    to_mask = free_space_kernel(source, mask_plane, lam)
    mask_to_b = free_space_kernel(mask_plane, plane_b, lam)
    arm1 = compose(compose(to_mask, mask_kernel(mask_plane, config.mask1)), mask_to_b)
    arm2 = compose(compose(to_mask, mask_kernel(mask_plane, config.mask2)), mask_to_b)
    weight = 1.0 / math.sqrt(2.0)
    arms = path_set(
        [
            (arm1, -weight),
            (arm2, weight * np.exp(1j * (config.phase + math.pi))),
        ]
    )
    straight = path_set([(to_detector_a, 1.0)])

    propagation = propagate(pair, [straight, arms])
    state = herald(
        propagation.amplitude, HeraldEvent(photon_index=1, detector_position=0.0)
    )
    profile = intensity_profile(state, 0)
    period = fringe_period(plane_a.samples, profile)
    validity = check_validity(
        config.s0,
        config.s1,
        config.s2,
        config.s3,
        source_rms=config.source_rms,
        mask_half_extent=config.mask_half_extent,
        wavelengths=[lam],
    )
    tau = (config.s1 - config.s2 - config.s3) / SPEED_OF_LIGHT
    return Example1Result(
        detector_grid=plane_a,
        profile=profile,
        tau=tau,
        fringe_period=period,
        validity=validity,
        heralded=state,
        propagation=propagation,
    )


@dataclass(frozen=True)
class PhaseSweepRow:
    phase: float
    fringe_period: float
    visibility: float


def sweep_phase(
    config: Example1Config, phases: "list[float] | tuple[float, ...]"
) -> list[PhaseSweepRow]:
    """Run the interferometer at each phase; report period and contrast.

    Visibility is evaluated over the central fringe region (one eighth
    of the scan span around the peak).
    """
    rows = []
    for phase in phases:
        result = run_example1(replace(config, phase=float(phase)))
        rows.append(
            PhaseSweepRow(
                phase=float(phase),
                fringe_period=result.fringe_period,
                visibility=visibility(
                    result.detector_grid.samples, result.profile
                ),
            )
        )
    return rows


def example1_kernels(config: Example1Config) -> list[Kernel]:
    """Primitive kernels of the interferometer, for sampling diagnostics.

    Returns the uncombined free-space and mask kernels; composition
    does not change any sampling margin, so this is what a validity
    check needs without paying for the matrix products.
    """
    lam = config.wavelength
    source = config.source_grid.build(z=0.0)
    mask_plane = config.mask_grid.build(z=config.s0 + config.s2)
    plane_a = config.detector_a_grid.build(z=config.s0 + config.s1)
    plane_b = config.detector_b_grid.build(z=config.s0 + config.s2 + config.s3)
    return [
        free_space_kernel(source, plane_a, lam),
        free_space_kernel(source, mask_plane, lam),
        mask_kernel(mask_plane, config.mask1),
        mask_kernel(mask_plane, config.mask2),
        free_space_kernel(mask_plane, plane_b, lam),
    ]


# ---------------------------------------------------------------------------
# Two-color triplet imaging
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Example2Config:
    """Geometry and grids for the heralded triplet imaging scenario.

    Two photons at ``lambda1`` travel s0 + s1 to a thin lens (focal
    ``f1``, apodized by a Gaussian aperture of amplitude half-width
    ``aperture_sigma``) and s2 further to the common image detector;
    the ``lambda2`` photon travels s0 + s3 + s4 to the herald
    detector, optionally through a lens of focal ``f2`` placed at
    s0 + s3.  ``f1`` must image the source plane onto the detector
    plane: 1/f1 = 1/(s0+s1) + 1/s2.

    The aperture is physical, not a numerical trick: it sets the
    imaging resolution, and together with the source-side quadratic
    phases it bounds how faithfully the magnified envelope survives.
    The defaults keep that distortion below half a percent.
    """

    lambda1: Wavelength
    lambda2: Wavelength
    source_rms: float
    envelope_rms: float
    s0: float
    s1: float
    s2: float
    s3: float
    s4: float
    f1: float
    aperture_sigma: float
    source_grid: GridSpec
    lens_grid: GridSpec
    detector_a_grid: GridSpec
    detector_b_grid: GridSpec
    f2: float | None = None
    herald_lens_grid: GridSpec | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "lambda1", as_wavelength(self.lambda1))
        object.__setattr__(self, "lambda2", as_wavelength(self.lambda2))
        _require_positive(
            source_rms=self.source_rms,
            envelope_rms=self.envelope_rms,
            s0=self.s0,
            s1=self.s1,
            s2=self.s2,
            s3=self.s3,
            s4=self.s4,
            f1=self.f1,
            aperture_sigma=self.aperture_sigma,
        )
        _, focal = imaging_params(self.s0, self.s1, self.s2)
        if abs(self.f1 - focal) > 1e-9 * focal:
            raise InvalidGeometryError(
                f"f1={self.f1!r} does not image the source onto the detector "
                f"(conjugation needs {focal!r})"
            )
        if self.f2 is not None:
            if not (self.f2 > 0 and math.isfinite(self.f2)):
                raise InvalidArgumentError(f"f2 must be positive, got {self.f2!r}")
            if self.herald_lens_grid is None:
                raise InvalidArgumentError(
                    "a herald-arm lens needs herald_lens_grid"
                )

    @property
    def magnification(self) -> float:
        return self.s2 / (self.s0 + self.s1)

    @classmethod
    def default(cls) -> "Example2Config":
        """Magnification 2: object 0.3 m, image 0.6 m, f1 = 0.2 m."""
        return cls(
            lambda1=Wavelength(0.7e-6),
            lambda2=Wavelength(0.35e-6),
            source_rms=0.2e-3,
            envelope_rms=1e-12,
            s0=0.1,
            s1=0.2,
            s2=0.6,
            s3=0.7,
            s4=1.2,
            f1=0.2,
            aperture_sigma=4e-3,
            source_grid=GridSpec(half_width=1e-3, count=257),
            lens_grid=GridSpec(half_width=10.4e-3, count=3584),
            detector_a_grid=GridSpec(half_width=2e-3, count=129),
            detector_b_grid=GridSpec(half_width=0.2e-3, count=17),
            herald_lens_grid=GridSpec(half_width=10.5e-3, count=3712),
        )

    @classmethod
    def demagnified(cls) -> "Example2Config":
        """Magnification 0.5: object 0.8 m, image 0.4 m."""
        return cls(
            lambda1=Wavelength(0.7e-6),
            lambda2=Wavelength(0.35e-6),
            source_rms=0.2e-3,
            envelope_rms=1e-12,
            s0=0.2,
            s1=0.6,
            s2=0.4,
            s3=0.4,
            s4=0.6,
            f1=0.8 / 3.0,
            aperture_sigma=5e-3,
            source_grid=GridSpec(half_width=1e-3, count=257),
            lens_grid=GridSpec(half_width=12.5e-3, count=4096),
            detector_a_grid=GridSpec(half_width=0.6e-3, count=65),
            detector_b_grid=GridSpec(half_width=0.2e-3, count=17),
        )

    def flatness_solution(self) -> LensFlatnessSolution:
        return solve_flatness_f2(
            self.lambda1,
            self.lambda2,
            self.magnification,
            self.s0,
            self.s2,
            self.s3,
            self.s4,
        )

    def with_flattening(self) -> "Example2Config":
        """Copy with the herald-arm lens set to the flatness solution."""
        solution = self.flatness_solution()
        if not solution.feasible:
            raise InvalidGeometryError(
                f"flatness solve infeasible: f2={solution.f2!r} "
                f"outside {solution.bounds!r}"
            )
        if self.herald_lens_grid is None:
            raise InvalidArgumentError(
                "config has no herald_lens_grid to place the lens on"
            )
        return replace(self, f2=solution.f2)


@dataclass(frozen=True, eq=False)
class Example2Result:
    """Conditional image-plane pair state and its summary metrics."""

    detector_grid: TransverseGrid
    conditional: NPhotonAmplitude
    diagonal_support: float
    imaged_rms: float
    quadratic_phase: float
    flatness: LensFlatnessSolution | None
    validity: ValidityReport
    heralded: HeraldedState
    propagation: PropagationResult


def correlated_triplet(
    grid: TransverseGrid,
    wavelengths: tuple[Wavelength, Wavelength, Wavelength],
    source_rms: float,
    envelope_rms: float,
) -> NPhotonAmplitude:
    """Three photons pinned to one transverse emission point."""
    envelope = gaussian_transverse(grid, source_rms)
    n = grid.count
    tensor = np.zeros((n, n, n), dtype=np.complex128)
    index = np.arange(n)
    tensor[index, index, index] = envelope / grid.spacing**2
    return NPhotonAmplitude(
        grids=(grid, grid, grid),
        wavelengths=wavelengths,
        tensor=tensor,
        temporal=TemporalModel.for_photons(3, envelope_rms, reference_index=2),
    )


def run_example2(config: Example2Config) -> Example2Result:
    """Run the heralded triplet imaging scenario.

    Propagates the two lambda1 photons through the apodized imaging
    lens onto the common detector plane, the lambda2 photon down the
    herald arm, conditions on the on-axis herald click, and summarizes
    the conditional pair: fraction of energy on the tensor diagonal,
    rms width of the position marginal, and the quadratic coefficient
    of the unwrapped phase along the diagonal.
    """
    lam1, lam2 = config.lambda1, config.lambda2
    source = config.source_grid.build(z=0.0)
    lens_plane = config.lens_grid.build(z=config.s0 + config.s1)
    plane_a = config.detector_a_grid.build(z=config.s0 + config.s1 + config.s2)
    plane_b = config.detector_b_grid.build(z=config.s0 + config.s3 + config.s4)

    triplet = correlated_triplet(
        source, (lam1, lam1, lam2), config.source_rms, config.envelope_rms
    )

    to_lens = free_space_kernel(source, lens_plane, lam1)
    lens = lens_kernel(lens_plane, config.f1, lam1)
    aperture = mask_kernel(
        lens_plane, GaussianApertureMask(sigma=config.aperture_sigma)
    )
    to_image = free_space_kernel(lens_plane, plane_a, lam1)
    imaging = compose(compose(compose(to_lens, lens), aperture), to_image)

    if config.f2 is None:
        herald_arm = free_space_kernel(source, plane_b, lam2)
    else:
        assert config.herald_lens_grid is not None
        herald_lens_plane = config.herald_lens_grid.build(z=config.s0 + config.s3)
        herald_arm = compose(
            compose(
                free_space_kernel(source, herald_lens_plane, lam2),
                lens_kernel(herald_lens_plane, config.f2, lam2),
            ),
            free_space_kernel(herald_lens_plane, plane_b, lam2),
        )

    propagation = propagate(
        triplet,
        [
            path_set([(imaging, 1.0)]),
            path_set([(imaging, 1.0)]),
            path_set([(herald_arm, 1.0)]),
        ],
    )
    state = herald(
        propagation.amplitude, HeraldEvent(photon_index=2, detector_position=0.0)
    )
    conditional = state.conditional
    marginal = intensity_profile(state, 0)
    diagonal = np.diagonal(conditional.tensor)
    validity = check_validity(
        config.s0,
        config.s1,
        config.s2,
        config.s3,
        config.s4,
        source_rms=config.source_rms,
        wavelengths=[lam1, lam2],
    )
    return Example2Result(
        detector_grid=plane_a,
        conditional=conditional,
        diagonal_support=diagonal_energy_fraction(conditional, cells=2),
        imaged_rms=rms_width(plane_a.samples, marginal),
        quadratic_phase=fit_quadratic_phase(plane_a.samples, diagonal),
        flatness=config.flatness_solution() if config.f2 is not None else None,
        validity=validity,
        heralded=state,
        propagation=propagation,
    )


def example2_kernels(config: Example2Config) -> list[Kernel]:
    """Primitive kernels of the imaging scenario, for sampling diagnostics."""
    lam1, lam2 = config.lambda1, config.lambda2
    source = config.source_grid.build(z=0.0)
    lens_plane = config.lens_grid.build(z=config.s0 + config.s1)
    plane_a = config.detector_a_grid.build(z=config.s0 + config.s1 + config.s2)
    plane_b = config.detector_b_grid.build(z=config.s0 + config.s3 + config.s4)
    kernels = [
        free_space_kernel(source, lens_plane, lam1),
        lens_kernel(lens_plane, config.f1, lam1),
        mask_kernel(lens_plane, GaussianApertureMask(sigma=config.aperture_sigma)),
        free_space_kernel(lens_plane, plane_a, lam1),
    ]
    if config.f2 is None:
        kernels.append(free_space_kernel(source, plane_b, lam2))
    else:
        assert config.herald_lens_grid is not None
        herald_lens_plane = config.herald_lens_grid.build(z=config.s0 + config.s3)
        kernels.extend(
            [
                free_space_kernel(source, herald_lens_plane, lam2),
                lens_kernel(herald_lens_plane, config.f2, lam2),
                free_space_kernel(herald_lens_plane, plane_b, lam2),
            ]
        )
    return kernels

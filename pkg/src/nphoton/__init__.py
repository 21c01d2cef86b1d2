"""Dense-matrix simulation of few-photon transverse amplitudes.

The state of N photons is a complex rank-N tensor sampled on one
uniform 1-D transverse grid per photon.  Linear optical elements act
as dense matrices along single photon axes; nothing here assumes a
convolution structure, so exotic grids and strongly off-axis
geometries cost nothing extra.  Heralding slices the tensor at a
detector position and renormalizes, which is how the conditional
interference and imaging scenarios in :mod:`nphoton.scenarios` work.

Everything is SI units and complex128.  Grids carry their axial plane;
kernels refuse to compose across mismatched planes, and under-sampled
phases raise :class:`nphoton.kernels.AliasingWarning` at build time
rather than corrupting results silently.
"""

__version__ = "0.1.0"

from .core import (
    SPEED_OF_LIGHT,
    BranchExplosionError,
    HeraldImpossibleError,
    InvalidArgumentError,
    InvalidGeometryError,
    NoSolutionError,
    NPhotonAmplitude,
    OutOfRangeError,
    SimulationError,
    TemporalModel,
    TransverseGrid,
    Wavelength,
    as_wavelength,
    delta_on_grid,
    gaussian_transverse,
    make_grid,
)
from .kernels import (
    AliasingWarning,
    DoubleSlitMask,
    GaussianApertureMask,
    Kernel,
    MaskSpec,
    PathSet,
    PhaseMask,
    TabulatedMask,
    compose,
    free_space_kernel,
    fresnel_kernel,
    identity_kernel,
    lens_kernel,
    mask_kernel,
    path_set,
)
from .engine import (
    MAX_TEMPORAL_BRANCHES,
    PropagationResult,
    ValidityReport,
    apply_along_photon,
    check_validity,
    propagate,
)
from .measurement import (
    HeraldedState,
    HeraldEvent,
    coincidence_density,
    diagonal_energy_fraction,
    fit_quadratic_phase,
    fringe_period,
    herald,
    intensity_profile,
    rms_width,
    visibility,
)
from .oracles import (
    LensFlatnessSolution,
    fraunhofer_double_slit,
    gaussian_beam_width,
    imaging_params,
    solve_flatness_f2,
)
from .scenarios import (
    Example1Config,
    Example1Result,
    Example2Config,
    Example2Result,
    GridSpec,
    PhaseSweepRow,
    correlated_pair,
    correlated_triplet,
    run_example1,
    run_example2,
    sweep_phase,
)
from .scene import (
    BUILTIN_SCENES,
    SceneError,
    SceneRunResult,
    Table,
    load_scene,
    run_scene,
    scene_kernels,
    validate_scene,
)

__all__ = [
    "SPEED_OF_LIGHT",
    "AliasingWarning",
    "BranchExplosionError",
    "BUILTIN_SCENES",
    "DoubleSlitMask",
    "Example1Config",
    "Example1Result",
    "Example2Config",
    "Example2Result",
    "GaussianApertureMask",
    "GridSpec",
    "HeraldedState",
    "HeraldEvent",
    "HeraldImpossibleError",
    "InvalidArgumentError",
    "InvalidGeometryError",
    "Kernel",
    "LensFlatnessSolution",
    "MAX_TEMPORAL_BRANCHES",
    "MaskSpec",
    "NoSolutionError",
    "NPhotonAmplitude",
    "OutOfRangeError",
    "PathSet",
    "PhaseMask",
    "PhaseSweepRow",
    "PropagationResult",
    "SceneError",
    "SceneRunResult",
    "SimulationError",
    "Table",
    "TabulatedMask",
    "TemporalModel",
    "TransverseGrid",
    "ValidityReport",
    "Wavelength",
    "apply_along_photon",
    "as_wavelength",
    "check_validity",
    "coincidence_density",
    "compose",
    "correlated_pair",
    "correlated_triplet",
    "delta_on_grid",
    "diagonal_energy_fraction",
    "fit_quadratic_phase",
    "fraunhofer_double_slit",
    "free_space_kernel",
    "fresnel_kernel",
    "fringe_period",
    "gaussian_beam_width",
    "gaussian_transverse",
    "herald",
    "identity_kernel",
    "imaging_params",
    "intensity_profile",
    "lens_kernel",
    "load_scene",
    "make_grid",
    "mask_kernel",
    "path_set",
    "propagate",
    "rms_width",
    "run_example1",
    "run_example2",
    "run_scene",
    "scene_kernels",
    "solve_flatness_f2",
    "sweep_phase",
    "validate_scene",
    "visibility",
]

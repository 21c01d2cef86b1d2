"""Propagation of N-photon amplitudes photon by photon.

A kernel acts on one tensor axis at a time: the N-photon amplitude is
contracted with the kernel matrix along the chosen photon's axis while
every other axis rides along.  Because the joint amplitude factorises
per photon inside each path term, this mode-product is the whole
propagation story; entanglement lives in the tensor, not the kernels.

Multi-path interferometers are handled by expanding the coherent sum
over per-photon path combinations.  Two combinations interfere (their
amplitudes add into one term) only when their arrival-time patterns
agree within a small fraction of the source's temporal envelope;
otherwise they are distinguishable in principle and are kept as
separate branches whose intensities would add.  The tolerance is
deliberately strict (1e-3 of the envelope rms) so the engine errs
toward keeping branches distinct, and every propagation reports how
many terms merged versus survived.

Also here: the closed-form validity diagnostics for the heralded
far-field scenarios, exposed as ratios that should be small rather
than as hard failures.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import (
    SPEED_OF_LIGHT,
    BranchExplosionError,
    InvalidArgumentError,
    InvalidGeometryError,
    NPhotonAmplitude,
    Wavelength,
    as_wavelength,
)
from .kernels import Kernel, PathSet

MAX_TEMPORAL_BRANCHES = 64

# Fraction of the temporal envelope rms within which two path delays
# count as indistinguishable.
BRANCH_MERGE_FRACTION = 1e-3


def apply_along_photon(
    amplitude: NPhotonAmplitude, photon_index: int, kernel: Kernel
) -> NPhotonAmplitude:
    """Contract one photon's axis with a kernel matrix.

    The photon's grid is replaced by the kernel output grid and its
    accumulated arrival delay advances by path length over c.  Other
    photons are untouched, so kernels applied to distinct indices
    commute.
    """
    n = amplitude.n_photons
    if not 0 <= photon_index < n:
        raise InvalidArgumentError(
            f"photon index {photon_index!r} out of range for {n} photons"
        )
    if not kernel.input_grid.matches(amplitude.grids[photon_index]):
        raise InvalidGeometryError(
            f"kernel input grid does not match photon {photon_index}'s grid "
            f"({kernel.label!r})"
        )
    lam = amplitude.wavelengths[photon_index]
    if kernel.wavelength is not None and kernel.wavelength.value != lam.value:
        raise InvalidGeometryError(
            f"kernel built for wavelength {kernel.wavelength.value!r} applied to "
            f"photon {photon_index} at {lam.value!r}"
        )
    moved = np.tensordot(kernel.matrix, amplitude.tensor, axes=([1], [photon_index]))
    tensor = np.moveaxis(moved, 0, photon_index)
    grids = list(amplitude.grids)
    grids[photon_index] = kernel.output_grid
    return NPhotonAmplitude(
        grids=tuple(grids),
        wavelengths=amplitude.wavelengths,
        tensor=tensor,
        temporal=amplitude.temporal.advance(
            photon_index, kernel.path_length / SPEED_OF_LIGHT
        ),
    )


@dataclass(frozen=True, eq=False)
class PropagationResult:
    """Outcome of :func:`propagate`: surviving temporal branches.

    ``branches`` holds one amplitude per distinguishable arrival-time
    pattern; their temporal models carry the per-photon delays.
    ``kept_count`` is ``len(branches)`` and ``merged_count`` is how
    many of the expanded path combinations were absorbed into another
    term by amplitude addition.
    """

    branches: tuple[NPhotonAmplitude, ...]
    merged_count: int
    kept_count: int

    @property
    def amplitude(self) -> NPhotonAmplitude:
        """The single surviving branch; raises if there are several."""
        if len(self.branches) != 1:
            raise InvalidArgumentError(
                f"{len(self.branches)} temporal branches survive; inspect "
                ".branches instead of .amplitude"
            )
        return self.branches[0]


def _cluster_paths(paths: tuple[Kernel, ...], length_tol: float):
    """Group paths whose lengths agree within ``length_tol`` metres.

    Sorted single-linkage chaining: deterministic, and transitively
    merges near-coincident lengths.  Cluster order follows the lowest
    original path index in each cluster; members keep input order.
    """
    order = sorted(range(len(paths)), key=lambda k: (paths[k].path_length, k))
    groups: list[list[int]] = [[order[0]]]
    for k in order[1:]:
        previous = paths[groups[-1][-1]].path_length
        if paths[k].path_length - previous <= length_tol:
            groups[-1].append(k)
        else:
            groups.append([k])
    clusters = []
    for group in groups:
        members = sorted(group)
        matrix = paths[members[0]].matrix.copy()
        for k in members[1:]:
            matrix += paths[k].matrix
        head = paths[members[0]]
        clusters.append(
            (
                members,
                Kernel(
                    input_grid=head.input_grid,
                    output_grid=head.output_grid,
                    matrix=matrix,
                    path_length=head.path_length,
                    wavelength=head.wavelength,
                    label=f"paths {members}",
                    max_phase_step=None,
                ),
            )
        )
    clusters.sort(key=lambda entry: entry[0][0])
    return clusters


def propagate(
    amplitude: NPhotonAmplitude, per_photon: list[PathSet]
) -> PropagationResult:
    """Propagate through one PathSet per photon, branching on timing.

    Expands the coherent sum over path combinations.  Per photon,
    paths whose optical lengths agree within ``BRANCH_MERGE_FRACTION``
    of the envelope (times c) are merged by matrix addition before
    expansion; the surviving combinations form the returned branches
    in path-index order.
    """
    n = amplitude.n_photons
    if len(per_photon) != n:
        raise InvalidArgumentError(
            f"need one path set per photon: got {len(per_photon)} for {n} photons"
        )
    for index, path_set_ in enumerate(per_photon):
        if not isinstance(path_set_, PathSet):
            raise InvalidArgumentError(
                f"per_photon[{index}] is {type(path_set_).__name__}, not PathSet"
            )
        if not path_set_.input_grid.matches(amplitude.grids[index]):
            raise InvalidGeometryError(
                f"path set for photon {index} does not start on that photon's grid"
            )
    length_tol = (
        BRANCH_MERGE_FRACTION * amplitude.temporal.envelope_rms * SPEED_OF_LIGHT
    )
    clustered = [_cluster_paths(ps.paths, length_tol) for ps in per_photon]
    total_terms = 1
    n_branches = 1
    for ps, clusters in zip(per_photon, clustered):
        total_terms *= len(ps.paths)
        n_branches *= len(clusters)
    if n_branches > MAX_TEMPORAL_BRANCHES:
        raise BranchExplosionError(
            f"{n_branches} temporally distinguishable branches exceed the cap "
            f"of {MAX_TEMPORAL_BRANCHES}"
        )
    # Mode products on distinct axes commute, so the application order
    # only affects cost: contracting the smallest output grid first
    # shrinks the tensor before the expensive axes are touched.  The
    # order is a fixed function of the grids, keeping runs reproducible.
    order = sorted(
        range(n), key=lambda i: (per_photon[i].output_grid.count, i)
    )
    branches = []
    for combination in itertools.product(*clustered):
        branch = amplitude
        for photon_index in order:
            branch = apply_along_photon(
                branch, photon_index, combination[photon_index][1]
            )
        branches.append(branch)
    return PropagationResult(
        branches=tuple(branches),
        merged_count=total_terms - n_branches,
        kept_count=n_branches,
    )


# ---------------------------------------------------------------------------
# Validity diagnostics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ValidityReport:
    """Small-is-good ratios for the heralded far-field approximations.

    ``far_field_ratios`` holds (description, d^2/(lambda*distance))
    pairs; ``curvature_ratio`` is lambda*(s0+min(s1,s2))/(4*S^2), the
    residual curvature of the source correlation across its envelope.
    Ratios above ``pass_threshold`` get a warning string; nothing here
    raises.
    """

    far_field_ratios: tuple[tuple[str, float], ...]
    curvature_ratio: float
    pass_threshold: float
    warnings: tuple[str, ...]

    @property
    def passed(self) -> bool:
        ratios = [value for _, value in self.far_field_ratios]
        ratios.append(self.curvature_ratio)
        return all(value <= self.pass_threshold for value in ratios)

    @property
    def worst_ratio(self) -> float:
        return max(
            [value for _, value in self.far_field_ratios] + [self.curvature_ratio]
        )


def check_validity(
    s0: float,
    s1: float,
    s2: float,
    s3: float | None = None,
    s4: float | None = None,
    *,
    source_rms: float,
    mask_half_extent: float | None = None,
    wavelengths: "list[Wavelength | float] | tuple[Wavelength | float, ...]",
    threshold: float = 0.1,
) -> ValidityReport:
    """Evaluate the far-field and source-curvature validity ratios.

    ``mask_half_extent`` is the d scale of the diffracting structure
    (outermost illuminated coordinate); when omitted, only the
    curvature ratio is reported.  With several wavelengths the check
    is conservative: far-field ratios use the smallest wavelength
    (hardest to satisfy), the curvature ratio uses the largest.
    """
    lengths = {"s0": s0, "s1": s1, "s2": s2}
    if s3 is not None:
        lengths["s3"] = s3
    if s4 is not None:
        lengths["s4"] = s4
    for name, value in lengths.items():
        if not (value > 0 and math.isfinite(value)):
            raise InvalidArgumentError(f"{name} must be positive, got {value!r}")
    if not (source_rms > 0 and math.isfinite(source_rms)):
        raise InvalidArgumentError(f"source_rms must be positive, got {source_rms!r}")
    if mask_half_extent is not None and not (
        mask_half_extent > 0 and math.isfinite(mask_half_extent)
    ):
        raise InvalidArgumentError(
            f"mask_half_extent must be positive, got {mask_half_extent!r}"
        )
    values = [as_wavelength(w).value for w in wavelengths]
    if not values:
        raise InvalidArgumentError("need at least one wavelength")
    lam_short, lam_long = min(values), max(values)

    ratios: list[tuple[str, float]] = []
    if mask_half_extent is not None:
        d2 = mask_half_extent**2
        if s3 is not None:
            ratios.append(("far-field mask to herald detector, d^2/(lambda s3)",
                           d2 / (lam_short * s3)))
        ratios.append(("far-field source to mask, d^2/(lambda (s0+s2))",
                       d2 / (lam_short * (s0 + s2))))
    curvature = lam_long * (s0 + min(s1, s2)) / (4.0 * source_rms**2)

    warnings_: list[str] = []
    for description, value in ratios + [
        ("source curvature, lambda (s0+min(s1,s2))/(4 S^2)", curvature)
    ]:
        if value > threshold:
            warnings_.append(
                f"{description} = {value:.4g} exceeds threshold {threshold:g}"
            )
    return ValidityReport(
        far_field_ratios=tuple(ratios),
        curvature_ratio=curvature,
        pass_threshold=float(threshold),
        warnings=tuple(warnings_),
    )

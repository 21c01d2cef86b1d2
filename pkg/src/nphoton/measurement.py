"""Detection model: coincidences, heralding, and pattern estimators.

Detectors here are point-like: a detection at transverse position x is
a nearest-sample slice of the amplitude tensor, not an integration
over a finite pixel.  Heralding on one photon therefore projects the
N-photon tensor onto an (N-1)-photon conditional amplitude, which is
renormalized to unit norm while the discarded magnitude is kept as the
herald probability density (per metre of herald detector coordinate),
so conditioning loses no information.

Detection times are never gridded.  The temporal structure rides along
symbolically: a heralded state reports, per surviving photon, the
arrival-time offset relative to the herald click and the Gaussian
envelope rms, from which the temporal amplitude factor
exp(-(dt - offset)^2 / (4 T^2)) can be evaluated exactly.

The estimators at the bottom (fringe period, visibility, rms width,
quadratic-phase fit) operate on sampled patterns and are deliberately
simple, estimator-unambiguous constructions: half-maximum crossings
with linear interpolation, intensity second moments, and weighted
polynomial fits on unwrapped phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    HeraldImpossibleError,
    InvalidArgumentError,
    NPhotonAmplitude,
    OutOfRangeError,
    TransverseGrid,
)


@dataclass(frozen=True)
class HeraldEvent:
    """A point detection used to condition the remaining photons.

    ``detector_position`` is the transverse coordinate (m) on the
    heralded photon's current grid; ``detection_time`` (s) is the
    click time t_* the surviving photons' offsets refer to.
    """

    photon_index: int
    detector_position: float
    detection_time: float = 0.0

    def __post_init__(self) -> None:
        if not math.isfinite(self.detector_position):
            raise InvalidArgumentError(
                f"detector position must be finite, got {self.detector_position!r}"
            )
        if not math.isfinite(self.detection_time):
            raise InvalidArgumentError(
                f"detection time must be finite, got {self.detection_time!r}"
            )


@dataclass(frozen=True, eq=False)
class HeraldedState:
    """Conditional state of the surviving photons after a herald click.

    ``time_offsets[i]`` is the expected arrival-time offset of
    surviving photon i relative to the click time t_* (None when the
    source puts no timing constraint between the pair).  The temporal
    amplitude of photon i at detection time t is
    exp(-((t - t_*) - offset)^2 / (4 envelope_rms^2)).
    """

    conditional: NPhotonAmplitude
    herald_probability_density: float
    time_offsets: tuple[float | None, ...]
    envelope_rms: float

    def __post_init__(self) -> None:
        if self.herald_probability_density < 0:
            raise InvalidArgumentError("herald probability density must be >= 0")
        if len(self.time_offsets) != self.conditional.n_photons:
            raise InvalidArgumentError(
                "need one time offset per surviving photon"
            )

    def envelope_factor(
        self, delta_t: "float | np.ndarray", photon_index: int = 0
    ) -> "float | np.ndarray":
        """Temporal amplitude at time t_* + delta_t for one photon."""
        offset = self.time_offsets[photon_index]
        if offset is None:
            raise InvalidArgumentError(
                f"photon {photon_index} has no timing constraint to the herald"
            )
        return np.exp(
            -((np.asarray(delta_t) - offset) ** 2) / (4.0 * self.envelope_rms**2)
        )


def _nearest_sample(grid: TransverseGrid, position: float) -> int:
    samples = grid.samples
    if not math.isfinite(position):
        raise InvalidArgumentError(f"position must be finite, got {position!r}")
    if position < samples[0] or position > samples[-1]:
        raise OutOfRangeError(
            f"position {position!r} outside grid "
            f"[{samples[0]!r}, {samples[-1]!r}]"
        )
    return int(np.argmin(np.abs(samples - position)))


def coincidence_density(
    amplitude: NPhotonAmplitude, positions: "list[float] | tuple[float, ...]"
) -> float:
    """Joint detection probability density |a(r_1, ..., r_N)|^2.

    Positions are snapped to the nearest grid sample of each photon.
    The value is a density: units 1/m per photon coordinate.
    """
    if len(positions) != amplitude.n_photons:
        raise InvalidArgumentError(
            f"need {amplitude.n_photons} positions, got {len(positions)}"
        )
    index = tuple(
        _nearest_sample(grid, float(position))
        for grid, position in zip(amplitude.grids, positions)
    )
    return float(np.abs(amplitude.tensor[index]) ** 2)


def herald(amplitude: NPhotonAmplitude, event: HeraldEvent) -> HeraldedState:
    """Condition on a point detection of one photon.

    Slices the tensor at the nearest sample to the event position,
    renormalizes the slice, and recomputes the surviving photons'
    arrival-time offsets relative to the click.  The discarded scale
    is returned as ``herald_probability_density``: integrating it over
    the herald coordinate recovers the squared norm of the input.
    """
    n = amplitude.n_photons
    if n < 2:
        raise InvalidArgumentError("heralding needs at least two photons")
    h = event.photon_index
    if not 0 <= h < n:
        raise InvalidArgumentError(f"photon index {h!r} out of range for {n} photons")
    index = _nearest_sample(amplitude.grids[h], event.detector_position)
    slicer = tuple(index if axis == h else slice(None) for axis in range(n))
    conditional_tensor = amplitude.tensor[slicer]

    survivors = [i for i in range(n) if i != h]
    rest_measure = 1.0
    for i in survivors:
        rest_measure *= amplitude.grids[i].spacing
    density = float(
        np.sum(np.abs(conditional_tensor) ** 2) * rest_measure
    )
    if density == 0.0:
        raise HeraldImpossibleError(
            f"heralding photon {h} at {event.detector_position!r} has zero "
            "probability (dark fringe or blocked path)"
        )
    offsets = tuple(amplitude.temporal.offset_between(i, h) for i in survivors)
    conditional = NPhotonAmplitude(
        grids=tuple(amplitude.grids[i] for i in survivors),
        wavelengths=tuple(amplitude.wavelengths[i] for i in survivors),
        tensor=conditional_tensor / math.sqrt(density),
        temporal=amplitude.temporal.reduce(h),
        norm_convention="unit-normalized",
    )
    return HeraldedState(
        conditional=conditional,
        herald_probability_density=density,
        time_offsets=offsets,
        envelope_rms=amplitude.temporal.envelope_rms,
    )


def intensity_profile(
    state: "NPhotonAmplitude | HeraldedState", photon_index: int = 0
) -> np.ndarray:
    """Marginal intensity over one photon's grid.

    Sums |a|^2 over the other photons' coordinates with their grid
    weights, so the result is a 1-D density whose midpoint-rule
    integral equals the squared norm.
    """
    amplitude = state.conditional if isinstance(state, HeraldedState) else state
    n = amplitude.n_photons
    if not 0 <= photon_index < n:
        raise InvalidArgumentError(
            f"photon index {photon_index!r} out of range for {n} photons"
        )
    abs2 = np.abs(amplitude.tensor) ** 2
    other_axes = tuple(axis for axis in range(n) if axis != photon_index)
    profile = np.sum(abs2, axis=other_axes) if other_axes else abs2
    weight = 1.0
    for axis in other_axes:
        weight *= amplitude.grids[axis].spacing
    return profile * weight


# ---------------------------------------------------------------------------
# Pattern estimators
# ---------------------------------------------------------------------------


def fringe_period(x: np.ndarray, intensity: np.ndarray) -> float:
    """Fringe period from half-maximum up-crossing spacing.

    Subtracts half the peak value and finds the upward zero crossings
    with linear interpolation; the period is the median spacing of
    consecutive crossings.  Because the crossings sit on the steep
    flanks of the central fringes, the estimate self-localizes to the
    bright central region and tolerates slow envelope modulation.
    Requires at least five crossings (four periods).
    """
    x = np.asarray(x, dtype=float)
    intensity = np.asarray(intensity, dtype=float)
    if x.shape != intensity.shape or x.ndim != 1:
        raise InvalidArgumentError("x and intensity must be equal-length 1-D arrays")
    if intensity.size < 4 or not np.all(np.isfinite(intensity)):
        raise InvalidArgumentError("intensity must be finite and reasonably sampled")
    signal = intensity - 0.5 * float(np.max(intensity))
    below = signal[:-1] < 0
    above = signal[1:] >= 0
    rising = np.nonzero(below & above)[0]
    if rising.size < 5:
        raise InvalidArgumentError(
            f"only {rising.size} half-maximum crossings; need >= 5 to "
            "estimate a period over >= 4 fringes"
        )
    frac = -signal[rising] / (signal[rising + 1] - signal[rising])
    crossings = x[rising] + frac * (x[rising + 1] - x[rising])
    return float(np.median(np.diff(crossings)))


def visibility(
    x: np.ndarray, intensity: np.ndarray, half_window: float | None = None
) -> float:
    """(max - min) / (max + min) over the central region.

    ``half_window`` bounds the region |x - x_peak| <= half_window
    around the brightest sample; default is an eighth of the span,
    wide enough for several fringes of any pattern worth measuring.
    """
    x = np.asarray(x, dtype=float)
    intensity = np.asarray(intensity, dtype=float)
    if x.shape != intensity.shape or x.ndim != 1:
        raise InvalidArgumentError("x and intensity must be equal-length 1-D arrays")
    if half_window is None:
        half_window = float(x[-1] - x[0]) / 8.0
    center = float(x[int(np.argmax(intensity))])
    region = intensity[np.abs(x - center) <= half_window]
    if region.size < 3:
        raise InvalidArgumentError("central window contains too few samples")
    top, bottom = float(np.max(region)), float(np.min(region))
    if top + bottom == 0:
        return 0.0
    return (top - bottom) / (top + bottom)


def rms_width(x: np.ndarray, intensity: np.ndarray) -> float:
    """Intensity rms width: sqrt of the centered second moment."""
    x = np.asarray(x, dtype=float)
    intensity = np.asarray(intensity, dtype=float)
    if x.shape != intensity.shape or x.ndim != 1:
        raise InvalidArgumentError("x and intensity must be equal-length 1-D arrays")
    total = float(np.sum(intensity))
    if total <= 0:
        raise InvalidArgumentError("intensity must have positive total weight")
    mean = float(np.sum(x * intensity) / total)
    variance = float(np.sum((x - mean) ** 2 * intensity) / total)
    return math.sqrt(max(variance, 0.0))


def fit_quadratic_phase(
    x: np.ndarray, values: np.ndarray, floor_fraction: float = 0.05
) -> float:
    """Quadratic coefficient (rad/m^2) of the unwrapped phase.

    Restricts to the contiguous run around the magnitude peak where
    |values| >= floor_fraction * max|values| (phase is meaningless in
    the dark), unwraps the phase there, and fits a weighted quadratic
    with sqrt-magnitude weights.  Returns the x^2 coefficient.
    """
    x = np.asarray(x, dtype=float)
    values = np.asarray(values)
    if x.shape != values.shape or x.ndim != 1:
        raise InvalidArgumentError("x and values must be equal-length 1-D arrays")
    magnitude = np.abs(values)
    peak = int(np.argmax(magnitude))
    keep = magnitude >= floor_fraction * magnitude[peak]
    lo = peak
    while lo > 0 and keep[lo - 1]:
        lo -= 1
    hi = peak
    while hi < keep.size - 1 and keep[hi + 1]:
        hi += 1
    if hi - lo + 1 < 5:
        raise InvalidArgumentError(
            "fewer than 5 usable samples above the magnitude floor"
        )
    window = slice(lo, hi + 1)
    phase = np.unwrap(np.angle(values[window]))
    weights = np.sqrt(magnitude[window])
    coefficients = np.polyfit(x[window], phase, 2, w=weights)
    return float(coefficients[0])


def diagonal_energy_fraction(amplitude: NPhotonAmplitude, cells: int = 2) -> float:
    """Fraction of a two-photon state's energy within |i-j| <= cells.

    A position-correlated (bunched) pair concentrates its tensor on
    the main diagonal; this metric is 1 for a perfect sampled delta
    and degrades as correlations wash out.  Requires both grids to
    have equal counts so the diagonal is well-defined.
    """
    if amplitude.n_photons != 2:
        raise InvalidArgumentError("diagonal support is defined for 2 photons")
    n0, n1 = (g.count for g in amplitude.grids)
    if n0 != n1:
        raise InvalidArgumentError("diagonal support needs equal grid counts")
    if cells < 0:
        raise InvalidArgumentError(f"cells must be >= 0, got {cells!r}")
    abs2 = np.abs(amplitude.tensor) ** 2
    total = float(np.sum(abs2))
    if total == 0:
        raise InvalidArgumentError("amplitude is identically zero")
    index = np.arange(n0)
    near = np.abs(index[:, None] - index[None, :]) <= cells
    return float(np.sum(abs2[near]) / total)

"""Shared value types for sampled multi-photon transverse amplitudes.

An N-photon state restricted to one transverse dimension per photon is
represented by a complex rank-N tensor sampled on per-photon coordinate
grids.  Axis ``i`` of the tensor runs over the samples of photon ``i``'s
grid, so ``tensor[j0, ..., jN-1]`` is the joint amplitude density for
finding photon 0 at ``grids[0].samples[j0]``, photon 1 at
``grids[1].samples[j1]``, and so on.  Amplitudes carry density units:
integrals over transverse coordinates are approximated by midpoint
sums weighted with each grid's spacing, so the squared norm is

    sum |tensor|^2 * prod_i spacing_i

Timing degrees of freedom are not sampled.  Sources of interest emit
photons with delta-correlated emission times under a slow Gaussian
envelope, and propagation only shifts arrival times by path length
over c.  :class:`TemporalModel` tracks exactly that structure
symbolically: pairwise emission-time constraints, one Gaussian
envelope attached to a reference photon, and the accumulated delay of
each photon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0
"""Vacuum speed of light in m/s (exact, by definition of the metre)."""


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------


class SimulationError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgumentError(SimulationError, ValueError):
    """An argument fails validation (wrong sign, shape, or structure)."""


class OutOfRangeError(SimulationError, ValueError):
    """A coordinate or index falls outside the sampled region."""


class InvalidGeometryError(SimulationError, ValueError):
    """An optical layout is self-inconsistent (e.g. non-positive gap)."""


class HeraldImpossibleError(SimulationError):
    """Conditioning on a detection outcome of zero probability."""


class BranchExplosionError(SimulationError):
    """Temporally distinguishable path combinations exceed the cap."""


class NoSolutionError(SimulationError):
    """A design solve has no solution in the feasible region."""


# ---------------------------------------------------------------------------
# Transverse grids
# ---------------------------------------------------------------------------


_UNIFORMITY_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class TransverseGrid:
    """Uniform 1-D transverse coordinate grid attached to an axial plane.

    Parameters
    ----------
    z:
        Axial position of the plane in metres.
    samples:
        Strictly increasing, uniformly spaced transverse coordinates in
        metres.  At least two samples are required so a spacing is
        defined; the array is copied and frozen.
    """

    z: float
    samples: np.ndarray

    def __post_init__(self) -> None:
        z = float(self.z)
        if not math.isfinite(z):
            raise InvalidArgumentError(f"grid plane z must be finite, got {z!r}")
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1:
            raise InvalidArgumentError(
                f"grid samples must be 1-D, got shape {samples.shape}"
            )
        if samples.size < 2:
            raise InvalidArgumentError("a grid needs at least 2 samples")
        if not np.all(np.isfinite(samples)):
            raise InvalidArgumentError("grid samples must be finite")
        steps = np.diff(samples)
        if np.any(steps <= 0):
            raise InvalidArgumentError("grid samples must be strictly increasing")
        mean_step = float(steps.mean())
        if np.any(np.abs(steps - mean_step) > _UNIFORMITY_RTOL * mean_step):
            raise InvalidArgumentError("grid samples must be uniformly spaced")
        samples = samples.copy()
        samples.flags.writeable = False
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "samples", samples)

    @property
    def count(self) -> int:
        return int(self.samples.size)

    @property
    def spacing(self) -> float:
        """Sample spacing in metres."""
        return float((self.samples[-1] - self.samples[0]) / (self.samples.size - 1))

    @property
    def span(self) -> float:
        """Total extent ``samples[-1] - samples[0]`` in metres."""
        return float(self.samples[-1] - self.samples[0])

    def matches(self, other: "TransverseGrid") -> bool:
        """Whether two grids describe the same sampled plane.

        Compares the axial position and every sample with an absolute
        tolerance tied to the coordinate scale, so grids built
        independently from identical parameters match.
        """
        if self.count != other.count:
            return False
        scale = max(1.0, abs(self.z), abs(other.z))
        if abs(self.z - other.z) > 1e-12 * scale:
            return False
        xscale = max(1.0, self.span, other.span)
        return bool(np.all(np.abs(self.samples - other.samples) <= 1e-12 * xscale))


def make_grid(z: float, center: float, half_width: float, count: int) -> TransverseGrid:
    """Build a symmetric uniform grid of ``count`` samples.

    The samples run from ``center - half_width`` to ``center + half_width``
    inclusive, e.g. ``make_grid(1.0, 0.0, 5e-3, 3)`` samples at
    -5 mm, 0, +5 mm.
    """
    if not (half_width > 0 and math.isfinite(half_width)):
        raise InvalidArgumentError(f"half_width must be positive, got {half_width!r}")
    if count < 2:
        raise InvalidArgumentError(f"count must be at least 2, got {count!r}")
    samples = np.linspace(center - half_width, center + half_width, int(count))
    return TransverseGrid(z=float(z), samples=samples)


# ---------------------------------------------------------------------------
# Wavelength
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Wavelength:
    """Vacuum wavelength in metres; must be positive and finite."""

    value: float

    def __post_init__(self) -> None:
        value = float(self.value)
        if not (value > 0 and math.isfinite(value)):
            raise InvalidArgumentError(f"wavelength must be positive, got {value!r}")
        object.__setattr__(self, "value", value)

    @property
    def wavenumber(self) -> float:
        """Angular wavenumber 2*pi/lambda in rad/m."""
        return 2.0 * math.pi / self.value


def as_wavelength(value: "Wavelength | float") -> Wavelength:
    """Coerce a bare float (metres) into a :class:`Wavelength`."""
    if isinstance(value, Wavelength):
        return value
    return Wavelength(float(value))


# ---------------------------------------------------------------------------
# Symbolic temporal model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TemporalModel:
    """Delta-correlated emission times under one Gaussian envelope.

    The sources handled here emit all photons at times tied together by
    delta functions, with a single Gaussian amplitude envelope
    ``exp(-t_ref^2 / (4 T^2))`` on the emission time of one reference
    photon (``T`` is the rms of the squared envelope).  Propagation
    never reshapes this structure; it only delays each photon's arrival
    by path length over c.  The model is therefore fully symbolic:

    - ``offsets`` lists constraints ``(i, j, tau)`` meaning the source
      enforces emission times ``t_i = t_j + tau``,
    - ``delays[i]`` is the accumulated propagation delay of photon i,
    - ``reference_index`` names the photon carrying the envelope.

    Constraints form a graph; any pair of photons in one connected
    component has a definite emission-time offset obtained by summing
    along a path.  Cycles must be consistent.
    """

    envelope_rms: float
    reference_index: int
    offsets: tuple[tuple[int, int, float], ...]
    delays: tuple[float, ...]

    def __post_init__(self) -> None:
        if not (self.envelope_rms > 0 and math.isfinite(self.envelope_rms)):
            raise InvalidArgumentError(
                f"envelope_rms must be positive, got {self.envelope_rms!r}"
            )
        n = len(self.delays)
        if n < 1:
            raise InvalidArgumentError("temporal model needs at least one photon")
        if not 0 <= self.reference_index < n:
            raise InvalidArgumentError(
                f"reference_index {self.reference_index} out of range for {n} photons"
            )
        if not all(math.isfinite(d) for d in self.delays):
            raise InvalidArgumentError("delays must be finite")
        norm_offsets = []
        for entry in self.offsets:
            i, j, tau = entry
            i, j, tau = int(i), int(j), float(tau)
            if not (0 <= i < n and 0 <= j < n) or i == j:
                raise InvalidArgumentError(f"bad offset constraint {entry!r}")
            if not math.isfinite(tau):
                raise InvalidArgumentError(f"offset tau must be finite in {entry!r}")
            norm_offsets.append((i, j, tau))
        object.__setattr__(self, "offsets", tuple(norm_offsets))
        object.__setattr__(self, "delays", tuple(float(d) for d in self.delays))
        object.__setattr__(self, "reference_index", int(self.reference_index))
        object.__setattr__(self, "envelope_rms", float(self.envelope_rms))
        self._emission_potentials()  # raises on inconsistent cycles

    @classmethod
    def for_photons(
        cls,
        n_photons: int,
        envelope_rms: float,
        reference_index: int | None = None,
    ) -> "TemporalModel":
        """All photons emitted simultaneously, envelope on one of them.

        By default the last photon carries the envelope, matching
        sources where the herald arm is listed last.
        """
        if n_photons < 1:
            raise InvalidArgumentError("need at least one photon")
        ref = n_photons - 1 if reference_index is None else reference_index
        offsets = tuple((i, ref, 0.0) for i in range(n_photons) if i != ref)
        return cls(
            envelope_rms=envelope_rms,
            reference_index=ref,
            offsets=offsets,
            delays=(0.0,) * n_photons,
        )

    @property
    def n_photons(self) -> int:
        return len(self.delays)

    def _emission_potentials(self) -> list[float | None]:
        """Assign per-photon emission times up to a shift per component.

        Returns one potential per photon, with ``None`` marking photons
        not connected to any constraint once components are rooted at
        their lowest index.  Every photon gets a potential (each index
        roots its own component), so the list never actually contains
        ``None`` for valid models; the Optional type covers lookups on
        components handled separately.  Raises if a cycle is
        inconsistent beyond rounding.
        """
        n = self.n_photons
        adjacency: list[list[tuple[int, float]]] = [[] for _ in range(n)]
        scale = 0.0
        for i, j, tau in self.offsets:
            adjacency[i].append((j, tau))
            adjacency[j].append((i, -tau))
            scale = max(scale, abs(tau))
        potential: list[float | None] = [None] * n
        for root in range(n):
            if potential[root] is not None:
                continue
            potential[root] = 0.0
            stack = [root]
            while stack:
                node = stack.pop()
                base = potential[node]
                assert base is not None
                for nbr, tau in adjacency[node]:
                    want = base - tau  # t_node = t_nbr + tau
                    have = potential[nbr]
                    if have is None:
                        potential[nbr] = want
                        stack.append(nbr)
                    elif abs(have - want) > 1e-9 * max(1e-30, scale):
                        raise InvalidArgumentError(
                            "inconsistent emission-time constraints: cycle through "
                            f"photons {node} and {nbr} disagrees by {have - want!r} s"
                        )
        return potential

    def _component_labels(self) -> list[int]:
        n = self.n_photons
        labels = list(range(n))

        def find(a: int) -> int:
            while labels[a] != a:
                labels[a] = labels[labels[a]]
                a = labels[a]
            return a

        for i, j, _ in self.offsets:
            ri, rj = find(i), find(j)
            if ri != rj:
                labels[max(ri, rj)] = min(ri, rj)
        return [find(i) for i in range(n)]

    def emission_offset(self, i: int, j: int) -> float | None:
        """Emission-time difference ``t_i - t_j``, or None if unlinked."""
        n = self.n_photons
        if not (0 <= i < n and 0 <= j < n):
            raise InvalidArgumentError(f"photon index out of range: {(i, j)!r}")
        if i == j:
            return 0.0
        labels = self._component_labels()
        if labels[i] != labels[j]:
            return None
        potential = self._emission_potentials()
        pi, pj = potential[i], potential[j]
        assert pi is not None and pj is not None
        return pi - pj

    def offset_between(self, i: int, j: int) -> float | None:
        """Arrival-time difference ``t_i - t_j`` at the detectors.

        Combines the emission-time constraint with each photon's
        accumulated propagation delay.  Returns None when the two
        photons share no emission-time constraint.
        """
        emission = self.emission_offset(i, j)
        if emission is None:
            return None
        return emission + self.delays[i] - self.delays[j]

    def advance(self, index: int, delay: float) -> "TemporalModel":
        """Return a copy with ``delay`` seconds added to one photon."""
        if not 0 <= index < self.n_photons:
            raise InvalidArgumentError(f"photon index out of range: {index!r}")
        if not math.isfinite(delay):
            raise InvalidArgumentError(f"delay must be finite, got {delay!r}")
        delays = list(self.delays)
        delays[index] += delay
        return replace(self, delays=tuple(delays))

    def reduce(self, removed_index: int) -> "TemporalModel":
        """Drop one photon and reindex the survivors.

        Emission-time links that ran through the removed photon are
        replaced by their transitive closure among survivors, rooted at
        the new reference.  If the old reference is removed, the
        envelope is inherited by the lowest-index survivor linked to
        it; evaluating the envelope at the removed photon's detection
        time is the caller's business.
        """
        n = self.n_photons
        if n < 2:
            raise InvalidArgumentError("cannot reduce a single-photon model")
        if not 0 <= removed_index < n:
            raise InvalidArgumentError(f"photon index out of range: {removed_index!r}")
        survivors = [i for i in range(n) if i != removed_index]
        new_index = {old: new for new, old in enumerate(survivors)}
        if self.reference_index != removed_index:
            new_ref_old = self.reference_index
        else:
            labels = self._component_labels()
            linked = [
                i for i in survivors if labels[i] == labels[removed_index]
            ]
            new_ref_old = linked[0] if linked else survivors[0]
        offsets = []
        for i in survivors:
            if i == new_ref_old:
                continue
            tau = self.emission_offset(i, new_ref_old)
            if tau is not None:
                offsets.append((new_index[i], new_index[new_ref_old], tau))
        return TemporalModel(
            envelope_rms=self.envelope_rms,
            reference_index=new_index[new_ref_old],
            offsets=tuple(offsets),
            delays=tuple(self.delays[i] for i in survivors),
        )


# ---------------------------------------------------------------------------
# N-photon amplitudes
# ---------------------------------------------------------------------------


_NORM_CONVENTIONS = ("unnormalized", "unit-normalized")


@dataclass(frozen=True, eq=False)
class NPhotonAmplitude:
    """Complex rank-N amplitude tensor on per-photon transverse grids.

    Attributes
    ----------
    grids:
        One :class:`TransverseGrid` per photon; axis i of ``tensor``
        runs over ``grids[i].samples``.
    wavelengths:
        One vacuum :class:`Wavelength` per photon.
    tensor:
        complex128 array of shape ``tuple(g.count for g in grids)``,
        in amplitude-density units (1/sqrt(m) per photon axis).
    temporal:
        Symbolic timing structure; ``temporal.n_photons`` must match.
    norm_convention:
        ``"unnormalized"`` or ``"unit-normalized"``; the latter asserts
        the discrete L2 norm is within 1e-6 of one.
    """

    grids: tuple[TransverseGrid, ...]
    wavelengths: tuple[Wavelength, ...]
    tensor: np.ndarray
    temporal: TemporalModel
    norm_convention: str = "unnormalized"

    def __post_init__(self) -> None:
        grids = tuple(self.grids)
        if not grids:
            raise InvalidArgumentError("amplitude needs at least one photon")
        wavelengths = tuple(as_wavelength(w) for w in self.wavelengths)
        if len(wavelengths) != len(grids):
            raise InvalidArgumentError(
                f"{len(grids)} grids but {len(wavelengths)} wavelengths"
            )
        tensor = np.asarray(self.tensor, dtype=np.complex128)
        expected = tuple(g.count for g in grids)
        if tensor.shape != expected:
            raise InvalidArgumentError(
                f"tensor shape {tensor.shape} does not match grids {expected}"
            )
        if self.temporal.n_photons != len(grids):
            raise InvalidArgumentError(
                f"temporal model covers {self.temporal.n_photons} photons, "
                f"amplitude has {len(grids)}"
            )
        if self.norm_convention not in _NORM_CONVENTIONS:
            raise InvalidArgumentError(
                f"norm_convention must be one of {_NORM_CONVENTIONS}, "
                f"got {self.norm_convention!r}"
            )
        tensor = tensor.copy()
        tensor.flags.writeable = False
        object.__setattr__(self, "grids", grids)
        object.__setattr__(self, "wavelengths", wavelengths)
        object.__setattr__(self, "tensor", tensor)
        if self.norm_convention == "unit-normalized":
            n = self.norm()
            if abs(n - 1.0) > 1e-6:
                raise InvalidArgumentError(
                    f"norm_convention says unit-normalized but norm is {n!r}"
                )

    @property
    def n_photons(self) -> int:
        return len(self.grids)

    @property
    def measure(self) -> float:
        """Product of grid spacings, the discrete integration weight."""
        out = 1.0
        for g in self.grids:
            out *= g.spacing
        return out

    def norm(self) -> float:
        """Discrete L2 norm sqrt(sum |tensor|^2 * prod spacing)."""
        return float(np.sqrt(np.sum(np.abs(self.tensor) ** 2) * self.measure))

    def normalized(self) -> "NPhotonAmplitude":
        """Unit-normalized copy; raises if the amplitude vanishes."""
        n = self.norm()
        if n == 0.0:
            raise HeraldImpossibleError("cannot normalize a vanishing amplitude")
        return NPhotonAmplitude(
            grids=self.grids,
            wavelengths=self.wavelengths,
            tensor=self.tensor / n,
            temporal=self.temporal,
            norm_convention="unit-normalized",
        )


# ---------------------------------------------------------------------------
# Common transverse profiles
# ---------------------------------------------------------------------------


def delta_on_grid(grid: TransverseGrid, position: float) -> np.ndarray:
    """Discrete delta: 1/spacing at the sample nearest ``position``.

    The midpoint-rule integral of the returned array is exactly one.
    ``position`` must lie within the sampled extent.
    """
    if not math.isfinite(position):
        raise InvalidArgumentError(f"position must be finite, got {position!r}")
    samples = grid.samples
    if position < samples[0] or position > samples[-1]:
        raise OutOfRangeError(
            f"position {position!r} outside grid [{samples[0]!r}, {samples[-1]!r}]"
        )
    index = int(np.argmin(np.abs(samples - position)))
    out = np.zeros(grid.count, dtype=np.complex128)
    out[index] = 1.0 / grid.spacing
    return out


def gaussian_transverse(
    grid: TransverseGrid, rms: float, center: float = 0.0
) -> np.ndarray:
    """Gaussian amplitude with unit continuum L2 norm.

    ``rms`` is the rms width of the squared amplitude, so the profile
    is ``exp(-(x-center)^2 / (4 rms^2)) / (2 pi rms^2)^(1/4)``.
    """
    if not (rms > 0 and math.isfinite(rms)):
        raise InvalidArgumentError(f"rms must be positive, got {rms!r}")
    x = grid.samples - center
    return (
        np.exp(-(x**2) / (4.0 * rms**2)) / (2.0 * math.pi * rms**2) ** 0.25
    ).astype(np.complex128)

"""Closed-form references the numerical propagation is checked against.

Each function here is independent of the kernel machinery: these are
textbook results (far-field mask transforms, Gaussian beam spreading,
thin-lens conjugation) plus the algebraic solve for the herald-arm
focal length that flattens the conditional phase in the two-color
imaging scenario.  Tests compare the engine's output patterns against
these forms; the forms themselves are never computed from kernels, so
agreement is evidence rather than tautology.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    InvalidArgumentError,
    InvalidGeometryError,
    NoSolutionError,
    Wavelength,
    as_wavelength,
)
from .kernels import DoubleSlitMask


def fraunhofer_double_slit(
    mask: DoubleSlitMask,
    wavelength: "Wavelength | float",
    distance: float,
    x: "float | np.ndarray",
) -> "complex | np.ndarray":
    """Far-field amplitude of a double slit at transverse position x.

    Evaluates the mask's Fourier transform at spatial frequency
    q = 2 pi x / (lambda * distance):

        2 w sinc(q w / 2) cos(q delta / 2) exp(-i q offset) exp(i phase)

    with sinc(u) = sin(u)/u.  A lateral pattern offset contributes the
    separate linear phase factor; it never tilts the cos fringes.
    """
    wavelength = as_wavelength(wavelength)
    if not (distance > 0 and math.isfinite(distance)):
        raise InvalidArgumentError(f"distance must be positive, got {distance!r}")
    q = 2.0 * math.pi * np.asarray(x, dtype=float) / (wavelength.value * distance)
    amplitude = (
        2.0
        * mask.slit_width
        * np.sinc(q * mask.slit_width / (2.0 * math.pi))
        * np.cos(q * mask.separation / 2.0)
        * np.exp(-1j * q * mask.offset)
        * np.exp(1j * mask.phase)
    )
    if np.isscalar(x):
        return complex(amplitude)
    return amplitude


def gaussian_beam_width(
    waist: float, wavelength: "Wavelength | float", z: float
) -> float:
    """1/e^2 intensity half-width of a Gaussian beam at distance z.

    w(z) = w0 sqrt(1 + (z lambda / (pi w0^2))^2); the Rayleigh range
    is z_R = pi w0^2 / lambda and w(z_R) = w0 sqrt(2).
    """
    wavelength = as_wavelength(wavelength)
    if not (waist > 0 and math.isfinite(waist)):
        raise InvalidArgumentError(f"waist must be positive, got {waist!r}")
    if not math.isfinite(z):
        raise InvalidArgumentError(f"z must be finite, got {z!r}")
    return waist * math.sqrt(1.0 + (z * wavelength.value / (math.pi * waist**2)) ** 2)


def imaging_params(s0: float, s1: float, s2: float) -> tuple[float, float]:
    """Magnification and focal length imaging plane 0 onto plane s2.

    The object sits s0 + s1 before the lens and the image s2 after:
    M = s2/(s0+s1) and 1/f1 = 1/(s0+s1) + 1/s2.  All distances
    positive, so the conjugation is always realizable.
    """
    for name, value in (("s0", s0), ("s1", s1), ("s2", s2)):
        if not (value > 0 and math.isfinite(value)):
            raise InvalidGeometryError(f"{name} must be positive, got {value!r}")
    object_distance = s0 + s1
    magnification = s2 / object_distance
    focal = 1.0 / (1.0 / object_distance + 1.0 / s2)
    return magnification, focal


@dataclass(frozen=True)
class LensFlatnessSolution:
    """Herald-arm focal length that cancels the conditional curvature.

    ``bounds`` brackets the physically meaningful interval
    (s4*(s0+s3)/(s0+s3+s4), s4); ``residual`` is the relative error of
    the defining condition when f2 is substituted back.
    """

    f2: float
    feasible: bool
    bounds: tuple[float, float]
    residual: float


def solve_flatness_f2(
    lambda1: "Wavelength | float",
    lambda2: "Wavelength | float",
    magnification: float,
    s0: float,
    s2: float,
    s3: float,
    s4: float,
) -> LensFlatnessSolution:
    """Solve 2 (l2/l1) M (M+1) = s2 / ((1/f2 - 1/s4)^{-1} - (s0+s3)).

    Rearranged: the intermediate g = (1/f2 - 1/s4)^{-1} must equal
    (s0+s3) + s2/target, giving f2 = g*s4/(g+s4).  Because g exceeds
    s0+s3 for any positive target, the solution always lands strictly
    inside the bounds for positive inputs; the solver nonetheless
    reports feasibility rather than trusting that argument, and
    refuses to clamp an out-of-bounds value.
    """
    lambda1 = as_wavelength(lambda1)
    lambda2 = as_wavelength(lambda2)
    if not (magnification > 0 and math.isfinite(magnification)):
        raise InvalidArgumentError(
            f"magnification must be positive, got {magnification!r}"
        )
    for name, value in (("s0", s0), ("s2", s2), ("s3", s3), ("s4", s4)):
        if not (value > 0 and math.isfinite(value)):
            raise InvalidArgumentError(f"{name} must be positive, got {value!r}")
    target = (
        2.0
        * (lambda2.value / lambda1.value)
        * magnification
        * (magnification + 1.0)
    )
    g = (s0 + s3) + s2 / target
    if g + s4 == 0.0:
        raise NoSolutionError("degenerate geometry: g + s4 vanishes")
    f2 = g * s4 / (g + s4)
    lower = s4 * (s0 + s3) / (s0 + s3 + s4)
    upper = s4
    feasible = lower < f2 < upper
    back = 1.0 / (1.0 / f2 - 1.0 / s4) - (s0 + s3)
    if back == 0.0:
        raise NoSolutionError("substitution degenerate: recovered g equals s0+s3")
    residual = abs(s2 / back - target) / target
    return LensFlatnessSolution(
        f2=f2, feasible=feasible, bounds=(lower, upper), residual=residual
    )

"""Invariants checked over randomized inputs."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nphoton import (
    DoubleSlitMask,
    GaussianApertureMask,
    NPhotonAmplitude,
    TemporalModel,
    Wavelength,
    coincidence_density,
    compose,
    delta_on_grid,
    free_space_kernel,
    gaussian_transverse,
    make_grid,
)

LAM = Wavelength(5e-6)

finite = st.floats(
    allow_nan=False, allow_infinity=False, min_value=-10.0, max_value=10.0
)


def _grid(count=17, half_width=1e-3, z=0.0):
    return make_grid(z=z, center=0.0, half_width=half_width, count=count)


def _amplitude(tensor, grid):
    return NPhotonAmplitude(
        grids=(grid,) * tensor.ndim,
        wavelengths=(LAM,) * tensor.ndim,
        tensor=tensor,
        temporal=TemporalModel.for_photons(tensor.ndim, 1e-12),
    )


class TestNormProperties:
    @given(scale_re=finite, scale_im=finite)
    @settings(max_examples=40, deadline=None)
    def test_norm_is_absolutely_homogeneous(self, scale_re, scale_im):
        grid = _grid()
        rng = np.random.default_rng(11)
        tensor = rng.normal(size=(17, 17)) + 1j * rng.normal(size=(17, 17))
        amp = _amplitude(tensor, grid)
        c = complex(scale_re, scale_im)
        scaled = _amplitude(c * tensor, grid)
        assert scaled.norm() == pytest.approx(abs(c) * amp.norm(), abs=1e-12)

    @given(fraction=st.floats(min_value=-0.999, max_value=0.999))
    @settings(max_examples=40, deadline=None)
    def test_delta_always_integrates_to_one(self, fraction):
        grid = _grid(count=33)
        position = fraction * 1e-3
        delta = delta_on_grid(grid, position)
        assert float(np.sum(delta).real * grid.spacing) == 1.0
        assert float(np.sum(delta).imag) == 0.0


class TestTemporalProperties:
    @given(
        d0=st.floats(min_value=0, max_value=1e-9),
        d1=st.floats(min_value=0, max_value=1e-9),
        d2=st.floats(min_value=0, max_value=1e-9),
    )
    @settings(max_examples=40, deadline=None)
    def test_pairwise_offsets_chain(self, d0, d1, d2):
        model = TemporalModel.for_photons(3, 1e-12)
        model = model.advance(0, d0).advance(1, d1).advance(2, d2)
        chained = model.offset_between(0, 1) + model.offset_between(1, 2)
        direct = model.offset_between(0, 2)
        assert chained == pytest.approx(direct, abs=1e-24)


class TestKernelProperties:
    @given(alpha_re=finite, alpha_im=finite)
    @settings(max_examples=25, deadline=None)
    def test_apply_is_linear(self, alpha_re, alpha_im):
        src = _grid(count=21)
        dst = _grid(count=19, half_width=1.5e-3, z=0.3)
        kernel = free_space_kernel(src, dst, LAM)
        rng = np.random.default_rng(5)
        u = rng.normal(size=21) + 1j * rng.normal(size=21)
        v = rng.normal(size=21) + 1j * rng.normal(size=21)
        alpha = complex(alpha_re, alpha_im)
        left = kernel.apply(u + alpha * v)
        right = kernel.apply(u) + alpha * kernel.apply(v)
        np.testing.assert_allclose(left, right, atol=1e-9, rtol=1e-9)

    def test_compose_is_associative(self):
        a = _grid(count=15)
        b = _grid(count=17, half_width=1.2e-3, z=0.2)
        c = _grid(count=13, half_width=1.5e-3, z=0.5)
        d = _grid(count=11, half_width=2e-3, z=0.9)
        ab = free_space_kernel(a, b, LAM)
        bc = free_space_kernel(b, c, LAM)
        cd = free_space_kernel(c, d, LAM)
        left = compose(compose(ab, bc), cd)
        right = compose(ab, compose(bc, cd))
        scale = np.abs(left.matrix).max()
        np.testing.assert_allclose(
            left.matrix, right.matrix, rtol=0, atol=1e-12 * scale
        )
        assert left.path_length == pytest.approx(right.path_length, rel=1e-15)


class TestMaskProperties:
    @given(
        separation=st.floats(min_value=2e-5, max_value=1e-3),
        ratio=st.floats(min_value=0.05, max_value=0.95),
        offset=st.floats(min_value=-1e-3, max_value=1e-3),
        phase=st.floats(min_value=-10, max_value=10),
    )
    @settings(max_examples=60, deadline=None)
    def test_double_slit_transmission_bounded(
        self, separation, ratio, offset, phase
    ):
        mask = DoubleSlitMask(
            separation=separation,
            slit_width=ratio * separation,
            offset=offset,
            phase=phase,
        )
        x = np.linspace(-2e-3, 2e-3, 257)
        assert np.all(np.abs(mask.transmission(x)) <= 1.0 + 1e-12)

    @given(
        sigma=st.floats(min_value=1e-5, max_value=1e-2),
        center=st.floats(min_value=-1e-3, max_value=1e-3),
    )
    @settings(max_examples=60, deadline=None)
    def test_gaussian_aperture_transmission_bounded(self, sigma, center):
        mask = GaussianApertureMask(sigma=sigma, center=center)
        x = np.linspace(-2e-3, 2e-3, 257)
        t = np.abs(mask.transmission(x))
        assert np.all(t <= 1.0)
        assert np.all(t >= 0.0)
        assert mask.transmission(np.array([center]))[0] == 1.0


class TestStateProperties:
    @given(phase=st.floats(min_value=-10, max_value=10))
    @settings(max_examples=40, deadline=None)
    def test_coincidence_density_global_phase_invariant(self, phase):
        grid = _grid()
        rng = np.random.default_rng(7)
        tensor = rng.normal(size=(17, 17)) + 1j * rng.normal(size=(17, 17))
        plain = _amplitude(tensor, grid)
        rotated = _amplitude(np.exp(1j * phase) * tensor, grid)
        position = (grid.samples[4], grid.samples[12])
        assert coincidence_density(rotated, position) == pytest.approx(
            coincidence_density(plain, position), rel=1e-12
        )

    def test_discrete_gaussian_norm_converges(self):
        # 8 rms of window keeps the truncated tails far below the
        # discretization error, so refinement actually helps.
        rms = 1e-3
        errors = []
        for count in (256, 512, 1024):
            grid = make_grid(z=0.0, center=0.0, half_width=8 * rms, count=count)
            values = gaussian_transverse(grid, rms)
            norm = float(np.sum(np.abs(values) ** 2) * grid.spacing)
            errors.append(abs(norm - 1.0))
        assert all(err < 1e-4 for err in errors)
        assert errors[2] <= errors[0] + 1e-12

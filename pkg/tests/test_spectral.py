import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from waveguide_nls import make_geometry, plane_wave, propagate, random_bandlimited
from waveguide_nls.spectral import (PhysicalField, SpectralField, fft_forward, forward_transform,
                                    gaussian, inverse_transform, pad_coefficients, resample,
                                    truncate_coefficients)
from conftest import random_values


def direct_dft(geometry, values):
    """O(P^2) Riemann sum of f(z) exp(-i z.xi) over the grid."""
    z = np.stack([c.ravel() for c in np.meshgrid(*geometry.coordinates, indexing="ij")], axis=1)
    xi = np.stack([c.ravel() for c in np.meshgrid(*geometry.frequencies, indexing="ij")], axis=1)
    kernel = np.exp(-1j * xi @ z.T)
    return (kernel @ values.ravel()).reshape(geometry.shape) * geometry.cell_volume


@pytest.mark.parametrize("dirs", [
    [("torus", 1, 16)],
    [("line", 3, 12), ("torus", 1, 8)],
    [("torus", math.sqrt(2), 6), ("line", 2, 4), ("torus", 1, 6)],
])
def test_forward_matches_direct_sum(dirs, rng):
    g = make_geometry(dirs)
    f = random_values(g, rng)
    got = fft_forward(g, f)
    want = direct_dft(g, f)
    assert np.linalg.norm(got - want) <= 1e-12 * np.linalg.norm(want)


def test_plane_wave_coefficient(t1):
    u = plane_wave(t1, 3)
    z = t1.coordinates[0]
    np.testing.assert_allclose(u.values, np.exp(3j * z), atol=1e-15)
    c = forward_transform(u).coefficients
    k = t1.directions[0].wavenumbers()
    np.testing.assert_allclose(c[k == 3], [2 * math.pi], rtol=1e-14)
    assert np.abs(c[k != 3]).max() < 1e-13


def test_inverse_of_single_coefficient(t1):
    k = t1.directions[0].wavenumbers()
    c = np.where(k == 3, 2 * math.pi, 0).astype(complex)
    u = inverse_transform(SpectralField(t1, c))
    np.testing.assert_allclose(u.values, np.exp(3j * t1.coordinates[0]), atol=1e-14)


def test_zero_field(t1):
    assert not forward_transform(PhysicalField(t1, np.zeros(16))).coefficients.any()


def test_plane_wave_constant_and_product(d3):
    c = plane_wave(d3, (0, 0, 0), amplitude=2 - 1j)
    assert np.all(c.values == 2 - 1j)
    u = plane_wave(d3, (1 / 8, 2, -1))
    x, y, w = d3.coordinates
    want = np.exp(1j * x / 8)[:, None, None] * np.exp(2j * y)[None, :, None] * np.exp(-1j * w)[None, None, :]
    np.testing.assert_allclose(u.values, want, atol=1e-14)


def test_plane_wave_off_lattice(t1):
    with pytest.raises(ValueError):
        plane_wave(t1, 0.5)
    with pytest.raises(ValueError):
        plane_wave(t1, 8)


def test_round_trip_and_parseval(d3_small, rng):
    f = PhysicalField(d3_small, random_values(d3_small, rng))
    c = forward_transform(f)
    back = inverse_transform(c)
    assert np.linalg.norm(back.values - f.values) <= 1e-12 * np.linalg.norm(f.values)
    lhs = np.sum(np.abs(f.values) ** 2) * d3_small.cell_volume
    rhs = d3_small.mu * np.sum(np.abs(c.coefficients) ** 2)
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_propagator_phase(t1):
    c = forward_transform(propagate(plane_wave(t1, 3), 0.5)).coefficients
    k = t1.directions[0].wavenumbers()
    np.testing.assert_allclose(c[k == 3], [2 * math.pi * np.exp(-4.5j)], rtol=1e-13)


def test_propagator_identity_and_group_law(d3_small, rng):
    f = PhysicalField(d3_small, random_values(d3_small, rng))
    np.testing.assert_allclose(propagate(f, 0.0).values, f.values, atol=1e-13)
    back = propagate(propagate(f, 0.37), -0.37)
    assert np.linalg.norm(back.values - f.values) <= 1e-12 * np.linalg.norm(f.values)
    with pytest.raises(ValueError):
        propagate(f, float("nan"))


def test_propagate_keeps_kind(t1, rng):
    f = PhysicalField(t1, random_values(t1, rng))
    assert isinstance(propagate(f, 1.0), PhysicalField)
    assert isinstance(propagate(forward_transform(f), 1.0), SpectralField)


def test_pad_truncate_and_resample(t1, rng):
    fine = t1.refined(2)
    u = random_bandlimited(t1, 4, seed=3)
    c = forward_transform(u).coefficients
    big = pad_coefficients(c, t1, fine)
    np.testing.assert_array_equal(truncate_coefficients(big, fine, t1), c)
    up = resample(u, fine)
    np.testing.assert_allclose(up.values[::2], u.values, atol=1e-13)
    np.testing.assert_allclose(resample(up, t1).values, u.values, atol=1e-13)


def test_random_bandlimited_deterministic_and_supported(t1):
    a = random_bandlimited(t1, 1, seed=7)
    b = random_bandlimited(t1, 1, seed=7)
    np.testing.assert_array_equal(a.values, b.values)
    c = forward_transform(a).coefficients
    xi = t1.frequencies[0]
    assert np.abs(c[np.abs(xi) > 1]).max() < 1e-13
    assert np.abs(c[np.abs(xi) <= 1]).min() > 0


def test_random_bandlimited_grid_independent():
    small = make_geometry([("torus", 1, 8), ("line", 2, 8)])
    big = small.resized([16, 12])
    a = forward_transform(random_bandlimited(small, 1.5, seed=[4, 2])).coefficients
    b = forward_transform(random_bandlimited(big, 1.5, seed=[4, 2])).coefficients
    np.testing.assert_allclose(truncate_coefficients(b, big, small), a, atol=1e-12)


def test_random_bandlimited_mean_mass(t1):
    # E|c|^2 = 2 per mode, and ||f||^2 = mu * sum |c|^2
    modes = 3
    mean = np.mean([np.sum(np.abs(random_bandlimited(t1, 1, seed=s).values) ** 2) * t1.cell_volume
                    for s in range(1000)])
    assert mean == pytest.approx(t1.mu * modes * 2, rel=0.1)


def test_gaussian_profile(d3_small):
    u = gaussian(d3_small, width=[1.5, 0.8, 0.8], amplitude=0.5)
    x = d3_small.coordinates[0]
    np.testing.assert_allclose(u.values[:, 4, 4], 0.5 * np.exp(-x ** 2 / (2 * 1.5 ** 2)))
    assert np.abs(u.values).max() == pytest.approx(0.5)


@settings(max_examples=25, deadline=None)
@given(t=st.floats(-10, 10), seed=st.integers(0, 2 ** 32 - 1))
def test_propagation_is_unitary(t, seed):
    g = make_geometry([("line", 2, 12), ("torus", 1, 6)])
    f = random_bandlimited(g, 2, seed)
    before = np.sum(np.abs(f.values) ** 2)
    after = np.sum(np.abs(propagate(f, t).values) ** 2)
    assert after == pytest.approx(before, rel=1e-12)

import math

import numpy as np
import pytest

from waveguide_nls import make_geometry
from waveguide_nls.geometry import Direction


def test_single_torus(t1):
    assert t1.d == 1 and t1.m == 0 and t1.n == 1
    assert t1.volume == pytest.approx(2 * math.pi)
    assert sorted(t1.frequencies[0]) == list(range(-8, 8))


def test_mixed_geometry_volume():
    g = make_geometry([("line", 8, 64), ("torus", 1, 16), ("torus", 1, 16)])
    assert (g.d, g.m, g.n) == (3, 1, 2)
    assert g.volume == pytest.approx(2 * math.pi * 8 * (2 * math.pi) ** 2)
    assert g.mu == pytest.approx(1 / g.volume)


def test_irrational_torus_accepted():
    g = make_geometry([("torus", math.sqrt(2), 16)])
    np.testing.assert_allclose(sorted(g.frequencies[0]), np.arange(-8, 8) / math.sqrt(2))


def test_grid_starts_at_minus_pi_L():
    x = Direction("line", 8, 64).coordinates()
    assert x[0] == pytest.approx(-8 * math.pi)
    assert np.diff(x) == pytest.approx(np.full(63, 2 * math.pi * 8 / 64))


@pytest.mark.parametrize("spec", [
    [("disk", 1, 16)], [("torus", 0, 16)], [("torus", -1, 16)],
    [("torus", 1, 15)], [("torus", 1, 2)], [], [("torus", 1, 8)] * 5,
])
def test_invalid_geometries(spec):
    with pytest.raises(ValueError):
        make_geometry(spec)


def test_parity_and_freq_sq(t1):
    k = t1.directions[0].wavenumbers()
    np.testing.assert_array_equal(t1.parity, (-1.0) ** k)
    np.testing.assert_array_equal(t1.freq_sq, k ** 2)


def test_resized_and_nyquist():
    g = make_geometry([("line", 8, 64), ("torus", 1, 16)])
    assert g.nyquist() == (4.0, 8.0)
    assert g.refined(2).shape == (128, 32)
    assert g.contains_band(3) and not g.contains_band(4)

"""Littlewood-Paley projectors and sharp frequency-cube projectors."""
from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp

from .geometry import WaveguideGeometry
from .spectral import apply_multiplier


def eta1(x):
    """Fixed cutoff profile: 1 on ``|x| <= 1``, 0 on ``|x| >= 2``.

    The transition is ``(1 + cos(pi (|x| - 1))) / 2``: even, C^1 and
    monotone on ``[1, 2]``.
    """
    a = np.abs(np.asarray(x, dtype=float))
    mid = 0.5 * (1 + np.cos(np.pi * (np.clip(a, 1, 2) - 1)))
    out = np.where(a <= 1, 1.0, np.where(a >= 2, 0.0, mid))
    return out if out.ndim else float(out)


def check_dyadic(N) -> int:
    if isinstance(N, (bool, np.bool_)):
        raise ValueError(f"N must be dyadic (a power of two >= 1), got {N!r}")
    try:
        n = int(N)
    except (TypeError, ValueError):
        raise ValueError(f"N must be dyadic (a power of two >= 1), got {N!r}") from None
    if n != N or n < 1 or n & (n - 1):
        raise ValueError(f"N must be dyadic (a power of two >= 1), got {N!r}")
    return n


def leq_multiplier(geometry: WaveguideGeometry, N) -> np.ndarray:
    """``eta^d(xi / N)`` on the lattice."""
    N = check_dyadic(N)
    out = np.ones(geometry.shape)
    for xi in geometry.freq_mesh:
        out = out * eta1(xi / N)
    return out


def band_multiplier(geometry: WaveguideGeometry, N) -> np.ndarray:
    """Symbol of ``P_N``; ``P_1`` is ``P_{<=1}``."""
    N = check_dyadic(N)
    if N == 1:
        return leq_multiplier(geometry, 1)
    out = np.ones(geometry.shape)
    half = np.ones(geometry.shape)
    for xi in geometry.freq_mesh:
        out = out * eta1(xi / N)
        half = half * eta1(2 * xi / N)
    return out - half


def largest_dyadic_leq(a: float) -> int:
    """Largest power of two ``<= a``; 0 when ``a < 1``."""
    if a < 1:
        return 0
    return 1 << int(math.floor(math.log2(a) + 1e-12))


def project_leq(field, N):
    return apply_multiplier(field, leq_multiplier(field.geometry, N))


def project_band(field, N):
    return apply_multiplier(field, band_multiplier(field.geometry, N))


def project_leq_any(field, a: float):
    """``P_{<=a} = sum_{N <= a} P_N`` over dyadic N, for any ``a > 0``."""
    N = largest_dyadic_leq(a)
    if N == 0:
        return apply_multiplier(field, np.zeros(field.geometry.shape))
    return project_leq(field, N)


def project_gt(field, a: float):
    """``P_{>a} = Id - P_{<=a}``."""
    N = largest_dyadic_leq(a)
    m = np.ones(field.geometry.shape)
    if N:
        m = m - leq_multiplier(field.geometry, N)
    return apply_multiplier(field, m)


# sharp cubes

def _tiling_axes(geometry: WaveguideGeometry, side: float):
    side = float(side)
    axes = []
    for x in geometry.directions:
        if side < 1.0 / x.scale - 1e-12:
            raise ValueError(f"cube side {side} is below the lattice spacing {1.0 / x.scale}")
        spacing = 1.0 / x.scale
        edge0 = -x.points / (2 * x.scale) - spacing / 2
        count = math.ceil(x.points * spacing / side - 1e-9)
        axes.append((edge0, count))
    return side, axes


def tile_cubes(geometry: WaveguideGeometry, side: float) -> np.ndarray:
    """Centres of a disjoint half-open tiling of the lattice by cubes of ``side``.

    Tiles start half a lattice spacing below the lowest frequency, so with
    unit scale and unit side the centres are the integer points.  Returned
    shape is ``(n_cubes, d)``, ordered consistently with :func:`cube_labels`.
    """
    side, axes = _tiling_axes(geometry, side)
    per_axis = [edge0 + side * (np.arange(count) + 0.5) for edge0, count in axes]
    grids = np.meshgrid(*per_axis, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)


def cube_labels(geometry: WaveguideGeometry, side: float) -> np.ndarray:
    """For each lattice point (FFT order) the flat index of its tile."""
    side, axes = _tiling_axes(geometry, side)
    label = np.zeros(geometry.shape, dtype=np.int64)
    for (edge0, count), xi in zip(axes, geometry.freq_mesh):
        idx = np.floor((xi - edge0) / side).astype(np.int64)
        label = label * count + idx
    return np.broadcast_to(label, geometry.shape).copy()


def cube_indicator(geometry: WaveguideGeometry, side: float):
    """Sparse ``(lattice size, n_cubes)`` 0/1 matrix grouping lattice points by tile."""
    labels = cube_labels(geometry, side).ravel()
    n = len(tile_cubes(geometry, side))
    return sp.csr_matrix((np.ones(labels.size), (np.arange(labels.size), labels)),
                         shape=(labels.size, n))


def cube_mask(geometry: WaveguideGeometry, center, side: float) -> np.ndarray:
    center = np.broadcast_to(np.asarray(center, dtype=float), (geometry.d,))
    mask = np.ones(geometry.shape, dtype=bool)
    for c, xi in zip(center, geometry.freq_mesh):
        mask = mask & (xi >= c - side / 2) & (xi < c + side / 2)
    return mask


def project_cube(field, center, side: float = 1.0):
    """Sharp projection onto ``center + side * [-1/2, 1/2)^d``."""
    if side <= 0:
        raise ValueError(f"cube side must be positive, got {side}")
    return apply_multiplier(field, cube_mask(field.geometry, center, side).astype(float))

"""Lebesgue, Sobolev and spacetime norms, conserved functionals and the
discrete variation norms V^p and Y^s."""
from __future__ import annotations

from dataclasses import dataclass, asdict
import json
import math

import numpy as np

from .geometry import WaveguideGeometry
from .projectors import cube_indicator, tile_cubes
from .spectral import (PhysicalField, SpectralField, fft_inverse, inverse_transform,
                       pad_coefficients, to_spectral)
from .trajectory import Trajectory


@dataclass(frozen=True)
class NormReport:
    name: str
    params: dict
    value: float

    def __post_init__(self):
        if not (math.isfinite(self.value) and self.value >= 0):
            raise ValueError(f"norm value must be finite and nonnegative, got {self.value}")

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "NormReport":
        return cls(**json.loads(text))


def _physical(field) -> PhysicalField:
    return inverse_transform(field) if isinstance(field, SpectralField) else field


def _spatial_norm(values: np.ndarray, q: float, cell_volume: float, axes) -> np.ndarray:
    a = np.abs(values)
    if q == np.inf:
        return a.max(axis=axes)
    return (np.sum(a ** q, axis=axes) * cell_volume) ** (1.0 / q)


def _check_exponent(q, name="q"):
    if not (q == np.inf or q >= 1):
        raise ValueError(f"{name} must be >= 1 or inf, got {q}")


def lebesgue_norm(field, q: float = 2.0) -> float:
    """Riemann-sum ``L^q`` norm on the grid; ``q = inf`` gives the sup."""
    _check_exponent(q)
    f = _physical(field)
    return float(_spatial_norm(f.values, q, f.geometry.cell_volume, None))


def trapezoid_weights(times: np.ndarray) -> np.ndarray:
    w = np.zeros(times.size)
    h = np.diff(times)
    w[:-1] += h / 2
    w[1:] += h / 2
    return w


def spacetime_norm(traj: Trajectory, p: float, q: float) -> float:
    """``L^p_t L^q_z`` over the sampled window, trapezoid rule in time."""
    _check_exponent(p, "p")
    _check_exponent(q)
    axes = tuple(range(1, traj.geometry.d + 1))
    inner = _spatial_norm(traj.values, q, traj.geometry.cell_volume, axes)
    if p == np.inf:
        return float(inner.max())
    if len(traj) < 2:
        raise ValueError("finite time exponent needs at least two samples")
    return float(np.dot(trapezoid_weights(traj.times), inner ** p) ** (1.0 / p))


def sobolev_weight(geometry: WaveguideGeometry, s: float) -> np.ndarray:
    """``<xi>^{2s} = (1 + |xi|^2)^s``."""
    return (1.0 + geometry.freq_sq) ** s


def sobolev_norm(field, s: float = 1.0) -> float:
    spec = to_spectral(field)
    g = spec.geometry
    w = sobolev_weight(g, s)
    return float(math.sqrt(g.mu * np.sum(w * np.abs(spec.coefficients) ** 2)))


def sobolev_norms(traj: Trajectory, s: float = 1.0) -> np.ndarray:
    """``||u(t_k)||_{H^s}`` for every sample."""
    g = traj.geometry
    axes = tuple(range(1, g.d + 1))
    c = traj.spectra()
    return np.sqrt(g.mu * np.sum(sobolev_weight(g, s) * np.abs(c) ** 2, axis=axes))


# conserved quantities

def mass(field) -> float:
    f = _physical(field)
    return float(np.sum(np.abs(f.values) ** 2) * f.geometry.cell_volume)


def potential_exponent(d: int) -> float:
    if d not in (3, 4):
        raise ValueError(f"energy needs total dimension 3 or 4, got {d}")
    return 2 * d / (d - 2)


def energy(field, kappa: int = 1, d: int | None = None, padding: int = 1) -> float:
    """``int |grad u|^2 / 2 + kappa (d-2)/(2d) |u|^{2d/(d-2)}``.

    The kinetic term uses the spectral gradient (via Parseval).  The
    potential term is a Riemann sum, on a grid refined by ``padding`` when
    that is greater than one.
    """
    spec = to_spectral(field)
    g = spec.geometry
    d = g.d if d is None else d
    if d != g.d:
        raise ValueError(f"dimension {d} does not match geometry dimension {g.d}")
    r = potential_exponent(d)
    kinetic = 0.5 * g.mu * np.sum(g.freq_sq * np.abs(spec.coefficients) ** 2)
    if padding > 1:
        fine = g.refined(padding)
        u = fft_inverse(fine, pad_coefficients(spec.coefficients, g, fine))
        pot = np.sum(np.abs(u) ** r) * fine.cell_volume
    else:
        u = _physical(field).values if isinstance(field, PhysicalField) else inverse_transform(spec).values
        pot = np.sum(np.abs(u) ** r) * g.cell_volume
    return float(kinetic + kappa * (d - 2) / (2 * d) * pot)


def momentum(field) -> np.ndarray:
    """``Im int conj(u) grad u``, one component per direction."""
    spec = to_spectral(field)
    g = spec.geometry
    w = np.abs(spec.coefficients) ** 2
    return np.array([g.mu * np.sum(xi * w) for xi in g.freq_mesh])


# variation norms

def vp_power_from_distances(dist: np.ndarray, p: float) -> np.ndarray:
    """Exact ``sup sum |increment|^p`` by dynamic programming.

    ``dist[..., j, k]`` is the distance between samples ``j < k``; only the
    strict upper triangle is read.  The sup runs over all increasing index
    subsequences; leading axes are batched.
    """
    K = dist.shape[-1]
    dp = dist ** p
    best = np.zeros(dist.shape[:-1])
    for k in range(1, K):
        best[..., k] = np.max(best[..., :k] + dp[..., :k, k], axis=-1)
    return best.max(axis=-1)


def _pairwise(samples, norm):
    n = len(samples)
    dist = np.zeros((n, n))
    for j in range(n):
        for k in range(j + 1, n):
            dist[j, k] = norm(samples[k] - samples[j])
    return dist


def vp_norm(samples, p: float = 2.0, norm=None) -> float:
    """Discrete ``V^p`` norm of sampled values with ``v(inf) = 0`` appended.

    ``samples`` may be scalars, arrays (Euclidean norm) or PhysicalFields
    (grid ``L^2`` norm); pass ``norm`` to override.
    """
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    samples = list(samples)
    if not samples:
        raise ValueError("vp_norm needs at least one sample")
    if norm is None:
        if isinstance(samples[0], PhysicalField):
            norm = lambda f: lebesgue_norm(f, 2)  # noqa: E731
        else:
            norm = lambda a: float(np.linalg.norm(np.ravel(a)))  # noqa: E731
    zero = samples[0] * 0
    dist = _pairwise(samples + [zero], norm)
    return float(vp_power_from_distances(dist, p) ** (1.0 / p))


def pullback_spectra(traj: Trajectory) -> np.ndarray:
    """Coefficients of ``e^{-i t_k Laplacian} u(t_k)``."""
    g = traj.geometry
    c = traj.spectra()
    phase = np.exp(1j * traj.times[:, None] * g.freq_sq.ravel()[None, :])
    return c.reshape(len(traj), -1) * phase


def cube_v2_squares(traj: Trajectory, side: float = 1.0):
    """Per-cube squared ``V^2`` norms of the free-flow pullback.

    Returns ``(centers, values)`` over the side-``side`` tiling.
    """
    g = traj.geometry
    w = pullback_spectra(traj)
    K = len(traj)
    S = cube_indicator(g, side)
    centers = tile_cubes(g, side)
    # dist[c, j, k] for j < k, with index K standing for the terminal zero
    dist = np.zeros((centers.shape[0], K + 1, K + 1))
    for j in range(K):
        diff = np.abs(w[j + 1:] - w[j]) ** 2 if j + 1 < K else np.zeros((0, w.shape[1]))
        rows = np.vstack([diff, np.abs(w[j]) ** 2])
        dist[:, j, j + 1:] = np.sqrt(g.mu * (S.T @ rows.T))
    return centers, vp_power_from_distances(dist, 2.0)


def discrete_ys_norm(traj: Trajectory, s: float = 0.0, side: float = 1.0) -> float:
    """``(sum_z <z>^{2s} ||P_{C_z} e^{-it Lap} u||_{V^2}^2)^{1/2}`` on the samples."""
    centers, v2 = cube_v2_squares(traj, side)
    weight = (1.0 + np.sum(centers ** 2, axis=1)) ** s
    return float(math.sqrt(np.sum(weight * v2)))


def weighted_cube_norm(field, s: float = 0.0, side: float = 1.0) -> float:
    """``(sum_z <z>^{2s} ||P_{C_z} f||^2)^{1/2}``, the fixed-time counterpart."""
    spec = to_spectral(field)
    g = spec.geometry
    S = cube_indicator(g, side)
    per_cube = g.mu * (S.T @ (np.abs(spec.coefficients.ravel()) ** 2))
    weight = (1.0 + np.sum(tile_cubes(g, side) ** 2, axis=1)) ** s
    return float(math.sqrt(np.sum(weight * per_cube)))

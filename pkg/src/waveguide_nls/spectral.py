"""Physical/spectral fields, the mixed Fourier pair and the free propagator.

Conventions
-----------
The forward transform is the Riemann sum of the continuum integral,

    F f(xi) = sum_z f(z) exp(-i z.xi) dz,

and the inverse carries the spectral weight ``mu = 1/volume``,

    f(z) = mu * sum_xi F f(xi) exp(i z.xi),

so Parseval reads ``||f||^2 = mu * sum |F f|^2`` and the coefficients of a
band-limited function do not depend on the grid it is sampled on.
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
import scipy.fft as sfft

from .geometry import WaveguideGeometry


def _as_complex(values, shape):
    arr = np.array(values, dtype=np.complex128)
    if arr.shape != tuple(shape):
        raise ValueError(f"array shape {arr.shape} does not match geometry shape {tuple(shape)}")
    if not np.isfinite(arr).all():
        raise ValueError("field values must be finite")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class PhysicalField:
    """Complex samples ``u(z_k)`` on the geometry grid (read-only)."""

    geometry: WaveguideGeometry
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _as_complex(self.values, self.geometry.shape))

    def _check(self, other):
        if not isinstance(other, PhysicalField) or other.geometry != self.geometry:
            raise ValueError("fields live on different geometries")

    def __add__(self, other):
        self._check(other)
        return PhysicalField(self.geometry, self.values + other.values)

    def __sub__(self, other):
        self._check(other)
        return PhysicalField(self.geometry, self.values - other.values)

    def __mul__(self, scalar):
        return PhysicalField(self.geometry, self.values * complex(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return PhysicalField(self.geometry, -self.values)


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Fourier coefficients on the frequency lattice, FFT storage order."""

    geometry: WaveguideGeometry
    coefficients: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coefficients",
                           _as_complex(self.coefficients, self.geometry.shape))

    def __add__(self, other):
        if other.geometry != self.geometry:
            raise ValueError("fields live on different geometries")
        return SpectralField(self.geometry, self.coefficients + other.coefficients)

    def __sub__(self, other):
        if other.geometry != self.geometry:
            raise ValueError("fields live on different geometries")
        return SpectralField(self.geometry, self.coefficients - other.coefficients)

    def __mul__(self, scalar):
        return SpectralField(self.geometry, self.coefficients * complex(scalar))

    __rmul__ = __mul__


# raw array kernels; the solver and the sweeps work on these directly

def fft_forward(geometry: WaveguideGeometry, values: np.ndarray, axes=None) -> np.ndarray:
    """Physical samples -> coefficients.  ``axes`` defaults to the trailing d axes."""
    axes = tuple(range(-geometry.d, 0)) if axes is None else axes
    out = sfft.fftn(values, axes=axes)
    out *= geometry.parity.astype(out.real.dtype) * geometry.cell_volume
    return out


def fft_inverse(geometry: WaveguideGeometry, coeffs: np.ndarray, axes=None) -> np.ndarray:
    axes = tuple(range(-geometry.d, 0)) if axes is None else axes
    work = coeffs * geometry.parity.astype(coeffs.real.dtype)
    out = sfft.ifftn(work, axes=axes, overwrite_x=True)
    out *= 1.0 / geometry.cell_volume
    return out


def propagator_phase(geometry: WaveguideGeometry, t: float) -> np.ndarray:
    """``exp(-i t |xi|^2)`` on the lattice."""
    return np.exp(-1j * t * geometry.freq_sq)


def forward_transform(field: PhysicalField) -> SpectralField:
    g = field.geometry
    return SpectralField(g, fft_forward(g, field.values))


def inverse_transform(spectrum: SpectralField) -> PhysicalField:
    g = spectrum.geometry
    return PhysicalField(g, fft_inverse(g, spectrum.coefficients))


def to_spectral(field) -> SpectralField:
    return field if isinstance(field, SpectralField) else forward_transform(field)


def apply_multiplier(field, multiplier: np.ndarray):
    """Multiply the Fourier coefficients by ``multiplier``; keeps the input's kind."""
    spec = to_spectral(field)
    out = SpectralField(spec.geometry, spec.coefficients * multiplier)
    return out if isinstance(field, SpectralField) else inverse_transform(out)


def propagate(field, t: float):
    """Free Schroedinger flow ``e^{it Laplacian}``.

    Accepts either field kind and returns the same kind.
    """
    t = float(t)
    if not math.isfinite(t):
        raise ValueError(f"propagation time must be finite, got {t}")
    return apply_multiplier(field, propagator_phase(field.geometry, t))


def gradient(field) -> list:
    """Spectral gradient, one PhysicalField per direction."""
    spec = to_spectral(field)
    g = spec.geometry
    return [PhysicalField(g, fft_inverse(g, 1j * xi * spec.coefficients)) for xi in g.freq_mesh]


def _index_map(src: WaveguideGeometry, dst: WaveguideGeometry):
    return np.ix_(*[np.mod(a.wavenumbers(), b.points)
                    for a, b in zip(src.directions, dst.directions)])


def pad_coefficients(coeffs: np.ndarray, src: WaveguideGeometry, dst: WaveguideGeometry) -> np.ndarray:
    """Embed coefficients of ``src`` into the larger lattice of ``dst`` (zero fill)."""
    out = np.zeros(dst.shape, dtype=coeffs.dtype)
    out[_index_map(src, dst)] = coeffs
    return out


def truncate_coefficients(coeffs: np.ndarray, src: WaveguideGeometry, dst: WaveguideGeometry) -> np.ndarray:
    """Restrict coefficients of the larger ``src`` lattice to the ``dst`` lattice."""
    return coeffs[_index_map(dst, src)]


def resample(field, geometry: WaveguideGeometry):
    """Move a field to a geometry with the same directions but other grid sizes.

    Exact (spectral interpolation) when the target lattice contains the
    field's spectral support.
    """
    spec = to_spectral(field)
    src = spec.geometry
    if src.scales != geometry.scales:
        raise ValueError("resampling requires identical direction scales")
    coeffs = spec.coefficients
    # pad or truncate axis by axis
    for j, (a, b) in enumerate(zip(src.directions, geometry.directions)):
        if a.points == b.points:
            continue
        ka = a.wavenumbers()
        kb = b.wavenumbers()
        shape = list(coeffs.shape)
        shape[j] = b.points
        new = np.zeros(shape, dtype=complex)
        if b.points > a.points:
            idx = [slice(None)] * len(shape)
            idx[j] = np.mod(ka, b.points)
            new[tuple(idx)] = coeffs
        else:
            idx = [slice(None)] * len(shape)
            idx[j] = np.mod(kb, a.points)
            new = coeffs[tuple(idx)]
        coeffs = new
    out = SpectralField(geometry, coeffs)
    return out if isinstance(field, SpectralField) else inverse_transform(out)


# test-data constructors

def _lattice_index(direction, xi: float) -> int:
    k = xi * direction.scale
    kr = round(k)
    if abs(k - kr) > 1e-9 * max(1.0, abs(k)) or not (-direction.points // 2 <= kr < direction.points // 2):
        raise ValueError(f"frequency {xi} is not on the lattice of {direction}")
    return int(kr)


def plane_wave(geometry: WaveguideGeometry, frequency, amplitude=1.0) -> PhysicalField:
    """``a * exp(i z.xi0)`` sampled on the grid; ``xi0`` must be a lattice point."""
    xi0 = np.atleast_1d(np.asarray(frequency, dtype=float))
    if xi0.size != geometry.d:
        raise ValueError(f"frequency needs {geometry.d} components")
    phase = 0.0
    for direction, x, z in zip(geometry.directions, xi0, geometry.coord_mesh):
        k = _lattice_index(direction, x)
        phase = phase + z * (k / direction.scale)
    return PhysicalField(geometry, complex(amplitude) * np.exp(1j * phase) * np.ones(geometry.shape))


def band_indices(geometry: WaveguideGeometry, cutoff: float) -> list:
    """Integer indices ``k`` with ``|k/L| <= cutoff`` per direction, increasing order."""
    out = []
    for x in geometry.directions:
        kmax = math.floor(cutoff * x.scale + 1e-9)
        if kmax >= x.points // 2:
            raise ValueError(f"cutoff {cutoff} exceeds the lattice of {x}")
        out.append(np.arange(-kmax, kmax + 1))
    return out


def box_coefficients(geometry: WaveguideGeometry, cutoff: float, box_values: np.ndarray) -> np.ndarray:
    """Place values given on the band box ``max_j |xi_j| <= cutoff`` into the lattice."""
    ks = band_indices(geometry, cutoff)
    coeffs = np.zeros(geometry.shape, dtype=complex)
    idx = np.ix_(*[np.mod(k, x.points) for k, x in zip(ks, geometry.directions)])
    coeffs[idx] = box_values
    return coeffs


def random_box_coefficients(geometry: WaveguideGeometry, cutoff: float, seed) -> np.ndarray:
    """Lattice coefficients behind :func:`random_bandlimited`."""
    if cutoff < 1:
        raise ValueError(f"cutoff must be >= 1, got {cutoff}")
    ks = band_indices(geometry, cutoff)
    rng = np.random.default_rng(seed)
    draw = rng.standard_normal(tuple(k.size for k in ks) + (2,))
    return box_coefficients(geometry, cutoff, draw[..., 0] + 1j * draw[..., 1])


def random_bandlimited(geometry: WaveguideGeometry, cutoff: float, seed) -> PhysicalField:
    """Standard complex Gaussian coefficients on ``max_j |xi_j| <= cutoff``.

    Coefficients are drawn in increasing lexicographic frequency order, so
    the same ``(cutoff, seed)`` gives the same function on any grid that
    holds the band.  ``seed`` may be an int or a sequence of ints.
    """
    coeffs = random_box_coefficients(geometry, cutoff, seed)
    return PhysicalField(geometry, fft_inverse(geometry, coeffs))


def gaussian(geometry: WaveguideGeometry, width=1.0, amplitude=1.0, frequency=None) -> PhysicalField:
    """Smooth bump centred at the origin, optionally modulated by a plane wave.

    Line directions get ``exp(-x^2 / 2w^2)``; torus directions get the
    periodic bump ``exp(-(1 - cos(y/L)) L^2 / w^2)``, which matches the
    Gaussian near the origin.
    """
    widths = np.broadcast_to(np.asarray(width, dtype=float), (geometry.d,))
    prof = np.ones(geometry.shape)
    for x, w, z in zip(geometry.directions, widths, geometry.coord_mesh):
        if x.kind == "line":
            prof = prof * np.exp(-z ** 2 / (2 * w ** 2))
        else:
            prof = prof * np.exp(-(1 - np.cos(z / x.scale)) * x.scale ** 2 / w ** 2)
    u = complex(amplitude) * prof
    if frequency is not None:
        u = u * plane_wave(geometry, frequency).values
    return PhysicalField(geometry, u)

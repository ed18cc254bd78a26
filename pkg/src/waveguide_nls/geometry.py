"""Discretized waveguide manifolds R^m x T^n.

Every direction is a periodic interval of circumference ``2*pi*L`` sampled
at ``P`` equispaced points starting at ``-pi*L``.  Torus directions with
``L = 1`` carry the integer frequency lattice; line directions are large
periodic boxes standing in for R.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
import math

import numpy as np

KINDS = ("line", "torus")
MAX_DIM = 4


@dataclass(frozen=True)
class Direction:
    kind: str
    scale: float
    points: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"direction kind must be one of {KINDS}, got {self.kind!r}")
        scale = float(self.scale)
        if not math.isfinite(scale) or scale <= 0:
            raise ValueError(f"direction scale must be positive, got {self.scale!r}")
        if int(self.points) != self.points or self.points < 4 or self.points % 2:
            raise ValueError(f"direction points must be an even integer >= 4, got {self.points!r}")
        object.__setattr__(self, "scale", scale)
        object.__setattr__(self, "points", int(self.points))

    @property
    def spacing(self) -> float:
        """Physical grid spacing ``2*pi*L/P``."""
        return 2 * math.pi * self.scale / self.points

    @property
    def length(self) -> float:
        return 2 * math.pi * self.scale

    def coordinates(self) -> np.ndarray:
        return -math.pi * self.scale + self.spacing * np.arange(self.points)

    def wavenumbers(self) -> np.ndarray:
        """Integer frequency indices ``k`` in FFT storage order."""
        return np.fft.fftfreq(self.points, 1.0 / self.points).astype(np.int64)

    def frequencies(self) -> np.ndarray:
        """Frequencies ``k/L`` in FFT storage order."""
        return self.wavenumbers() / self.scale

    def as_list(self) -> list:
        return [self.kind, self.scale, self.points]


@dataclass(frozen=True)
class WaveguideGeometry:
    """A product grid of line and torus directions.

    Spectral arrays are kept in FFT storage order along every axis, so
    ``frequencies[j][i]`` is the frequency of index ``i`` on axis ``j``.
    The frequency set per axis is ``{k/L : -P/2 <= k < P/2}``.
    """

    directions: tuple

    def __post_init__(self):
        dirs = tuple(d if isinstance(d, Direction) else Direction(*d) for d in self.directions)
        if not dirs:
            raise ValueError("geometry needs at least one direction")
        if len(dirs) > MAX_DIM:
            raise ValueError(f"total dimension must be <= {MAX_DIM}, got {len(dirs)}")
        object.__setattr__(self, "directions", dirs)

    @property
    def d(self) -> int:
        return len(self.directions)

    @property
    def m(self) -> int:
        """Number of line directions."""
        return sum(1 for x in self.directions if x.kind == "line")

    @property
    def n(self) -> int:
        """Number of torus directions."""
        return self.d - self.m

    @property
    def shape(self) -> tuple:
        return tuple(x.points for x in self.directions)

    @property
    def size(self) -> int:
        return math.prod(self.shape)

    @property
    def scales(self) -> tuple:
        return tuple(x.scale for x in self.directions)

    @property
    def cell_volume(self) -> float:
        return math.prod(x.spacing for x in self.directions)

    @property
    def volume(self) -> float:
        return math.prod(x.length for x in self.directions)

    @property
    def mu(self) -> float:
        """Spectral measure weight ``(2 pi)^-d prod 1/L_j``, equal to ``1/volume``."""
        return 1.0 / self.volume

    @cached_property
    def frequencies(self) -> tuple:
        return tuple(x.frequencies() for x in self.directions)

    @cached_property
    def coordinates(self) -> tuple:
        return tuple(x.coordinates() for x in self.directions)

    def _broadcast(self, axis_values):
        out = []
        for j, v in enumerate(axis_values):
            shape = [1] * self.d
            shape[j] = v.size
            out.append(v.reshape(shape))
        return out

    @cached_property
    def freq_mesh(self) -> tuple:
        """Sparse (broadcastable) frequency arrays, one per axis."""
        return tuple(self._broadcast(self.frequencies))

    @cached_property
    def coord_mesh(self) -> tuple:
        return tuple(self._broadcast(self.coordinates))

    @cached_property
    def freq_sq(self) -> np.ndarray:
        """``|xi|^2`` on the full lattice."""
        out = np.zeros(self.shape)
        for xi in self.freq_mesh:
            out = out + xi ** 2
        return out

    @cached_property
    def parity(self) -> np.ndarray:
        """``prod_j (-1)^{k_j}``, the phase from the grid origin at ``-pi L``."""
        out = np.ones(self.shape)
        for k in self._broadcast([x.wavenumbers() for x in self.directions]):
            out = out * np.where(k % 2, -1.0, 1.0)
        return out

    def nyquist(self) -> tuple:
        """Largest representable ``|xi_j|`` per direction, ``P_j / (2 L_j)``."""
        return tuple(x.points / (2 * x.scale) for x in self.directions)

    def resized(self, points) -> "WaveguideGeometry":
        """Same directions with a different number of grid points."""
        return WaveguideGeometry(tuple(
            Direction(x.kind, x.scale, int(p)) for x, p in zip(self.directions, points)))

    def refined(self, factor: int) -> "WaveguideGeometry":
        return self.resized([x.points * factor for x in self.directions])

    def contains_band(self, cutoff: float) -> bool:
        """Whether every lattice frequency with ``|xi_j| <= cutoff`` fits the grid."""
        return all(math.floor(cutoff * x.scale + 1e-9) < x.points // 2 for x in self.directions)

    def as_list(self) -> list:
        return [x.as_list() for x in self.directions]

    def __repr__(self):
        body = ", ".join(f"{x.kind}(L={x.scale:g}, P={x.points})" for x in self.directions)
        return f"WaveguideGeometry({body})"


def make_geometry(directions) -> WaveguideGeometry:
    """Build a validated geometry from ``(kind, L, P)`` triples.

    >>> g = make_geometry([("torus", 1, 16)])
    >>> g.d, g.shape
    (1, (16,))
    """
    return WaveguideGeometry(tuple(directions))

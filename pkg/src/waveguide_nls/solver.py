"""Time evolution of the energy-critical NLS

    (i d_t + Laplacian) u = kappa |u|^{4/(d-2)} u

by Strang splitting, plus the numerical Duhamel map and its Picard iteration.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

from .geometry import WaveguideGeometry
from .norms import discrete_ys_norm, sobolev_norm, sobolev_norms
from .projectors import project_gt
from .spectral import (PhysicalField, fft_forward, fft_inverse, pad_coefficients,
                       to_spectral, truncate_coefficients)
from .trajectory import Trajectory

BLOWUP_FACTOR = 1e6


@dataclass(frozen=True)
class EquationSpec:
    """Total dimension and sign of the nonlinearity.

    ``kappa = +1`` is defocusing, ``-1`` focusing; ``0`` switches the
    nonlinearity off (free flow), which the consistency checks use.
    """

    d: int
    kappa: int = 1

    def __post_init__(self):
        if self.d not in (3, 4):
            raise ValueError(f"energy-critical equation needs d in (3, 4), got {self.d}")
        if self.kappa not in (-1, 0, 1):
            raise ValueError(f"kappa must be +1, -1 (or 0 for free flow), got {self.kappa}")

    @property
    def power(self) -> float:
        """``4/(d-2)``: quintic (4) at d=3, cubic (2) at d=4."""
        return 4 / (self.d - 2)

    @classmethod
    def for_geometry(cls, geometry: WaveguideGeometry, kappa: int = 1) -> "EquationSpec":
        return cls(geometry.d, kappa)


@dataclass(frozen=True)
class SolverConfig:
    dt: float
    t_final: float
    stride: int = 1
    padding: int = 1

    def __post_init__(self):
        if not (self.dt > 0 and self.t_final > 0):
            raise ValueError("dt and t_final must be positive")
        ratio = self.t_final / self.dt
        if abs(ratio - round(ratio)) > 1e-8 * ratio:
            raise ValueError(f"t_final/dt must be an integer, got {ratio}")
        if self.stride < 1 or int(self.stride) != self.stride:
            raise ValueError("stride must be a positive integer")
        if self.padding not in (1, 2):
            raise ValueError("padding factor must be 1 or 2")

    @property
    def steps(self) -> int:
        return int(round(self.t_final / self.dt))


def _abs2(u):
    return u.real ** 2 + u.imag ** 2


def _pointwise(u: np.ndarray, spec: EquationSpec) -> np.ndarray:
    return spec.kappa * _abs2(u) ** (spec.power / 2) * u


class _Grids:
    """Coarse/padded grid pair used by the nonlinear substeps."""

    def __init__(self, geometry, padding):
        self.coarse = geometry
        self.fine = geometry.refined(padding) if padding > 1 else geometry
        self.padded = padding > 1

    def to_physical(self, coeffs):
        if self.padded:
            coeffs = pad_coefficients(coeffs, self.coarse, self.fine)
        return fft_inverse(self.fine, coeffs)

    def to_spectral(self, values):
        c = fft_forward(self.fine, values)
        return truncate_coefficients(c, self.fine, self.coarse) if self.padded else c


def nonlinearity(field, spec: EquationSpec, padding: int = 1) -> PhysicalField:
    """``F(u) = kappa |u|^p u``; with ``padding=2`` the product is formed on a
    doubled grid and truncated back to the original lattice."""
    g = field.geometry
    if padding == 1:
        u = field.values if isinstance(field, PhysicalField) else fft_inverse(g, field.coefficients)
        return PhysicalField(g, _pointwise(u, spec))
    grids = _Grids(g, padding)
    c = to_spectral(field).coefficients
    return PhysicalField(g, fft_inverse(g, grids.to_spectral(_pointwise(grids.to_physical(c), spec))))


def splitstep_evolve(u0: PhysicalField, spec: EquationSpec, config: SolverConfig) -> Trajectory:
    """Strang split-step: half free step, exact nonlinear phase, half free step.

    The nonlinear substep ``u -> u exp(-i kappa |u|^p dt)`` is evaluated on
    the padded grid when ``config.padding == 2``.  Samples are stored every
    ``config.stride`` steps (and at t=0).  On a non-finite value or when
    ``max|u|`` exceeds ``1e6`` times its initial value the run stops; the
    returned trajectory ends at the last stored finite sample and carries
    ``blowup_time`` (the last time at which the state was finite).
    ``meta["peak_history"]`` holds ``max|u|`` seen at every nonlinear
    substep, so growth between stored samples is not missed.
    """
    g = u0.geometry
    if spec.d != g.d:
        raise ValueError("equation dimension does not match geometry")
    grids = _Grids(g, config.padding)
    dt = config.dt
    half = np.exp(-0.5j * dt * g.freq_sq)
    c = fft_forward(g, u0.values)
    peak0 = float(np.abs(u0.values).max())
    limit = BLOWUP_FACTOR * peak0 if peak0 > 0 else np.inf
    times, samples = [0.0], [u0.values.copy()]
    blowup = None
    nonlinear = spec.kappa != 0
    peaks = []
    for step in range(1, config.steps + 1):
        c = c * half
        if nonlinear:
            u = grids.to_physical(c)
            a2 = _abs2(u)
            top = a2.max()
            if not np.isfinite(top) or top > limit ** 2:
                blowup = (step - 1) * dt
                break
            peaks.append(math.sqrt(top))
            with np.errstate(over="ignore", invalid="ignore"):  # caught on the next step
                u *= np.exp(-1j * spec.kappa * dt * a2 ** (spec.power / 2))
            c = grids.to_spectral(u)
        c = c * half
        if step % config.stride == 0:
            v = fft_inverse(g, c)
            if not np.isfinite(v).all():
                blowup = (step - 1) * dt
                break
            times.append(step * dt)
            samples.append(v)
    return Trajectory(g, np.array(times), np.stack(samples), blowup_time=blowup,
                      meta={"dt": dt, "kappa": spec.kappa, "padding": config.padding,
                            "peak_history": peaks})


def free_trajectory(u0: PhysicalField, times) -> Trajectory:
    """``e^{i t Laplacian} u0`` at the given times."""
    g = u0.geometry
    times = np.asarray(times, dtype=float)
    c0 = fft_forward(g, u0.values)
    vals = np.stack([fft_inverse(g, c0 * np.exp(-1j * t * g.freq_sq)) for t in times])
    return Trajectory(g, times, vals)


def duhamel_map(traj: Trajectory, u0: PhysicalField, spec: EquationSpec, padding: int = 1) -> Trajectory:
    """``Phi(u)(t) = e^{it Lap} u0 - i int_0^t e^{i(t-s) Lap} F(u(s)) ds``.

    The integral is the composite trapezoid rule on the trajectory's own
    samples, applied to the pulled-back integrand ``e^{-is Lap} F(u(s))``.
    """
    g = traj.geometry
    if u0.geometry != g:
        raise ValueError("initial data and trajectory live on different geometries")
    if spec.d != g.d:
        raise ValueError("equation dimension does not match geometry")
    times = traj.times
    if abs(times[0]) > 1e-14:
        raise ValueError("Duhamel map needs samples starting at t=0")
    c0 = fft_forward(g, u0.values)
    out = np.empty_like(traj.values)
    out[0] = u0.values
    if spec.kappa == 0 or len(traj) == 1:
        for k in range(1, len(traj)):
            out[k] = fft_inverse(g, c0 * np.exp(-1j * times[k] * g.freq_sq))
        return Trajectory(g, times, out)
    grids = _Grids(g, padding)
    pulled = []
    for k in range(len(traj)):
        fc = grids.to_spectral(_pointwise(grids.to_physical(fft_forward(g, traj.values[k])), spec))
        pulled.append(fc * np.exp(1j * times[k] * g.freq_sq))
    acc = np.zeros(g.shape, dtype=complex)
    for k in range(1, len(traj)):
        h = times[k] - times[k - 1]
        acc = acc + 0.5 * h * (pulled[k - 1] + pulled[k])
        out[k] = fft_inverse(g, np.exp(-1j * times[k] * g.freq_sq) * (c0 - 1j * acc))
    return Trajectory(g, times, out)


def h1_distance(a: Trajectory, b: Trajectory) -> float:
    """``max_k ||a(t_k) - b(t_k)||_{H^1}``, the contraction metric."""
    return float(sobolev_norms(a - b, 1.0).max())


@dataclass
class PicardLedger:
    """Iterate-by-iterate record of a Picard run."""

    distances: list = field(default_factory=list)
    y1_distances: list = field(default_factory=list)
    converged: bool = False
    tol: float = 0.0

    @property
    def iterations(self) -> int:
        return len(self.distances)

    @property
    def factors(self) -> list:
        d = self.distances
        return [d[j] / d[j - 1] if d[j - 1] > 0 else 0.0 for j in range(1, len(d))]

    def rows(self) -> list:
        f = [None] + self.factors
        return [{"iter": j + 1, "distance": self.distances[j], "y1_distance": self.y1_distances[j],
                 "factor": f[j]} for j in range(self.iterations)]


def picard_iterate(u0: PhysicalField, spec: EquationSpec, T: float, samples: int,
                   max_iters: int = 20, tol: float = 1e-12, padding: int = 1,
                   track_y1: bool = True):
    """Iterate ``u <- Phi(u)`` from the free evolution on ``samples`` points of ``[0, T]``.

    Stops once ``max_k ||u_{j+1} - u_j||_{H^1} <= tol``.  The ledger also
    carries the discrete Y^1 distance of consecutive iterates when
    ``track_y1`` is set.  Returns ``(trajectory, ledger)``.
    """
    if not 0 < T <= 1:
        raise ValueError(f"Picard window must satisfy 0 < T <= 1, got {T}")
    if samples < 2:
        raise ValueError("need at least two quadrature samples")
    times = np.linspace(0.0, T, samples)
    u = free_trajectory(u0, times)
    ledger = PicardLedger(tol=tol)
    for _ in range(max_iters):
        nxt = duhamel_map(u, u0, spec, padding)
        diff = nxt - u
        dist = float(sobolev_norms(diff, 1.0).max())
        ledger.distances.append(dist)
        ledger.y1_distances.append(discrete_ys_norm(diff, 1.0) if track_y1 else float("nan"))
        u = nxt
        if dist <= tol:
            ledger.converged = True
            break
    return u, ledger


def tail_tracker(traj: Trajectory, N) -> np.ndarray:
    """``||P_{>N} u(t_k)||_{H^1}`` for every sample."""
    return np.array([sobolev_norm(project_gt(f, N), 1.0) for f in traj.fields])


def scale_to_h1(field: PhysicalField, target: float) -> PhysicalField:
    norm = sobolev_norm(field, 1.0)
    if norm == 0:
        return field
    return field * (target / norm)

"""Time-sampled fields and their on-disk format.

Field files are CSV with one row per grid point: the grid multi-index
(``i0, ..., i{d-1}``), then ``re, im``.  Spectral files use the signed
frequency index ``k`` instead of the grid index.  A trajectory checkpoint
is a directory holding ``manifest.json`` (geometry, times, extra metadata)
and ``values.npy`` with the stacked samples.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import csv
import json
import os

import numpy as np

from .geometry import WaveguideGeometry, make_geometry
from .spectral import PhysicalField, SpectralField, fft_forward


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Samples ``u(t_k)`` on a uniform, strictly increasing time grid.

    ``values`` has shape ``(K,) + geometry.shape``.  ``blowup_time`` is set
    when the producing run aborted; it is the last time with finite data.
    """

    geometry: WaveguideGeometry
    times: np.ndarray
    values: np.ndarray
    blowup_time: float | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        times = np.array(self.times, dtype=float).ravel()
        values = np.array(self.values, dtype=np.complex128)
        if times.size < 1:
            raise ValueError("trajectory needs at least one sample")
        if values.shape != (times.size,) + self.geometry.shape:
            raise ValueError(f"values shape {values.shape} does not match "
                             f"{(times.size,) + self.geometry.shape}")
        if times.size > 1:
            steps = np.diff(times)
            if (steps <= 0).any():
                raise ValueError("trajectory times must be strictly increasing")
            if np.ptp(steps) > 1e-8 * max(abs(steps.mean()), 1e-300):
                raise ValueError("trajectory times must be uniformly spaced")
        if not np.isfinite(values).all():
            raise ValueError("trajectory values must be finite")
        times.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.times.size

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self) > 1 else 0.0

    def field(self, k: int) -> PhysicalField:
        return PhysicalField(self.geometry, self.values[k])

    @property
    def fields(self) -> list:
        return [self.field(k) for k in range(len(self))]

    def spectra(self) -> np.ndarray:
        """Stacked Fourier coefficients, shape ``(K,) + geometry.shape``."""
        return fft_forward(self.geometry, self.values)

    def __sub__(self, other):
        if other.geometry != self.geometry or not np.allclose(other.times, self.times, rtol=0, atol=1e-12):
            raise ValueError("trajectories differ in geometry or time grid")
        return Trajectory(self.geometry, self.times, self.values - other.values)

    @classmethod
    def from_fields(cls, times, fields, **kwargs):
        fields = list(fields)
        return cls(fields[0].geometry, times, np.stack([f.values for f in fields]), **kwargs)


# serialization

def save_field_csv(path, field) -> None:
    g = field.geometry
    if isinstance(field, SpectralField):
        data = field.coefficients
        index = np.meshgrid(*[x.wavenumbers() for x in g.directions], indexing="ij")
        names = [f"k{j}" for j in range(g.d)]
    else:
        data = field.values
        index = np.meshgrid(*[np.arange(p) for p in g.shape], indexing="ij")
        names = [f"i{j}" for j in range(g.d)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["# geometry", json.dumps(g.as_list())])
        w.writerow(names + ["re", "im"])
        flat = [ix.ravel() for ix in index]
        for row, v in enumerate(data.ravel()):
            w.writerow([int(ix[row]) for ix in flat] + [repr(float(v.real)), repr(float(v.imag))])


def load_field_csv(path):
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        g = make_geometry(json.loads(next(r)[1]))
        header = next(r)
        spectral = header[0].startswith("k")
        data = np.zeros(g.shape, dtype=complex)
        for row in r:
            idx = tuple(int(v) % p for v, p in zip(row[:g.d], g.shape))
            data[idx] = float(row[g.d]) + 1j * float(row[g.d + 1])
    return SpectralField(g, data) if spectral else PhysicalField(g, data)


def save_trajectory(directory, traj: Trajectory, extra=None) -> None:
    os.makedirs(directory, exist_ok=True)
    manifest = {
        "geometry": traj.geometry.as_list(),
        "times": traj.times.tolist(),
        "blowup_time": traj.blowup_time,
        "meta": traj.meta,
    }
    if extra:
        manifest.update(extra)
    with open(os.path.join(directory, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    np.save(os.path.join(directory, "values.npy"), traj.values)


def load_trajectory(directory) -> Trajectory:
    with open(os.path.join(directory, "manifest.json")) as fh:
        manifest = json.load(fh)
    values = np.load(os.path.join(directory, "values.npy"))
    return Trajectory(make_geometry(manifest["geometry"]), manifest["times"], values,
                      blowup_time=manifest.get("blowup_time"), meta=manifest.get("meta", {}))

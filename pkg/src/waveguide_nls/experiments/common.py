"""Shared helpers for the experiment runners."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
import math
import os

import numpy as np
import scipy.fft as sfft

from ..geometry import WaveguideGeometry

THREADS_ENV = "WAVEGUIDE_NLS_THREADS"


def default_threads() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        n = int(env)
        if n < 1:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {env!r}")
        return n
    return os.cpu_count() or 1


def run_tasks(fn, tasks, threads: int | None = None) -> list:
    """Apply ``fn`` to every task; results come back in task order.

    Tasks must be independent and deterministic, so the output does not
    depend on ``threads``.
    """
    tasks = list(tasks)
    threads = default_threads() if threads is None else int(threads)
    if threads <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, tasks))


def even_fast_len(n: int) -> int:
    """Smallest even FFT-friendly length ``>= n``."""
    p = sfft.next_fast_len(max(int(n), 4))
    while p % 2:
        p = sfft.next_fast_len(p + 1)
    return p


def max_index(direction, cutoff: float, strict: bool = False) -> int:
    """Largest ``k`` with ``k/L <= cutoff`` (or ``< cutoff`` when strict)."""
    x = cutoff * direction.scale
    return math.ceil(x - 1e-9) - 1 if strict else math.floor(x + 1e-9)


def exact_geometry(base: WaveguideGeometry, spans) -> WaveguideGeometry:
    """Resize ``base`` so each axis has more than ``spans[j]`` points.

    A product of trigonometric polynomials whose combined index range along
    axis ``j`` has width ``spans[j]`` is then integrated exactly by the grid
    Riemann sum.
    """
    return base.resized([even_fast_len(s + 1) for s in spans])


def precision_dtype(name: str):
    if name == "single":
        return np.complex64
    if name == "double":
        return np.complex128
    raise ValueError(f"precision must be 'single' or 'double', got {name!r}")


def time_samples(window: float, n_max: float, dt_factor: float) -> int:
    """Number of trapezoid intervals with ``dt <= dt_factor / n_max^2``."""
    return max(1, math.ceil(window * n_max ** 2 / dt_factor - 1e-9))


def trapezoid_weight(k: int, steps: int, dt: float) -> float:
    return 0.5 * dt if k in (0, steps) else dt

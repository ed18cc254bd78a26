"""Tour of the discretization conventions on a mixed waveguide grid.

Run with ``python demos/spectral_conventions.py``.  Prints a handful of
numbers that should look familiar once the conventions are clear.
"""
import math

import numpy as np

from waveguide_nls import (energy, forward_transform, make_geometry, mass, plane_wave, propagate,
                           random_bandlimited)
from waveguide_nls.projectors import project_band, project_leq

# One line direction (a periodic box of length 2*pi*8 standing in for R)
# and two unit circles.
g = make_geometry([("line", 8, 64), ("torus", 1, 16), ("torus", 1, 16)])
print(g)
print(f"volume {g.volume:.4f}, spectral weight mu = 1/volume = {g.mu:.3e}")
print(f"line frequencies step by 1/8: {sorted(g.frequencies[0].tolist())[:5]} ...")

# A plane wave has a single coefficient equal to the volume.
u = plane_wave(g, (0.25, 1, -2), amplitude=0.5)
c = forward_transform(u).coefficients
peak = np.unravel_index(np.argmax(np.abs(c)), c.shape)
print(f"plane-wave coefficient {abs(c[peak]):.4f}, 0.5 * volume = {0.5 * g.volume:.4f}")

# The free flow multiplies coefficients by exp(-i t |xi|^2); plane waves
# only pick up a phase.
ut = propagate(u, 0.3)
print(f"phase after t=0.3: {np.angle(ut.values.flat[0] / u.values.flat[0]):+.4f}, "
      f"expected {math.remainder(-0.3 * (0.25 ** 2 + 1 + 4), 2 * math.pi):+.4f}")

# Conserved quantities of constant-modulus data have closed forms.
print(f"mass {mass(u):.4f} = |a|^2 V = {0.25 * g.volume:.4f}")
print(f"energy (defocusing) {energy(u, 1):.4f}")

# Littlewood-Paley pieces of a random band-limited field add back up.
f = random_bandlimited(g, 3, seed=1)
pieces = sum(project_band(f, N).values for N in (1, 2))
print(f"|P_1 f + P_2 f - P_<=2 f| = {np.abs(pieces - project_leq(f, 2).values).max():.1e}")

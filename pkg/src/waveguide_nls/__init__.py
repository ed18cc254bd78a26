"""Spectral toolkit for the energy-critical NLS on waveguides R^m x T^n."""
from .geometry import Direction, WaveguideGeometry, make_geometry
from .spectral import (PhysicalField, SpectralField, forward_transform, gaussian,
                       inverse_transform, plane_wave, propagate, random_bandlimited)
from .projectors import (eta1, project_band, project_cube, project_gt, project_leq,
                         project_leq_any, tile_cubes)
from .norms import (discrete_ys_norm, energy, lebesgue_norm, mass, momentum,
                    sobolev_norm, spacetime_norm, vp_norm)
from .trajectory import Trajectory
from .solver import (EquationSpec, PicardLedger, SolverConfig, duhamel_map, nonlinearity,
                     picard_iterate, splitstep_evolve, tail_tracker)

__version__ = "0.1.0"

__all__ = [
    "Direction", "WaveguideGeometry", "make_geometry",
    "PhysicalField", "SpectralField", "forward_transform", "inverse_transform", "gaussian",
    "plane_wave", "propagate", "random_bandlimited",
    "eta1", "project_band", "project_cube", "project_gt", "project_leq", "project_leq_any",
    "tile_cubes",
    "discrete_ys_norm", "energy", "lebesgue_norm", "mass", "momentum", "sobolev_norm",
    "spacetime_norm", "vp_norm",
    "Trajectory",
    "EquationSpec", "PicardLedger", "SolverConfig", "duhamel_map", "nonlinearity",
    "picard_iterate", "splitstep_evolve", "tail_tracker",
]

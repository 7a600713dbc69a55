"""Aggregation-diffusion with immigration: potentials, grid solvers, bounds and particles."""
from . import analysis, field, particles, potential, solver
from .kernels import BACKEND
from .potential import compute_indices, morse, newtonian, power_law, tabulated, zero

__all__ = ["analysis", "field", "particles", "potential", "solver", "BACKEND",
           "compute_indices", "morse", "newtonian", "power_law", "tabulated", "zero"]
__version__ = "0.1.0"

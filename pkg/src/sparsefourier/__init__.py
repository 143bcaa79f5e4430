"""Sparse generalized Fourier series by collocation and the Dantzig selector,
with Gaussian-Hermite moment invariants for rotated-image classification."""

from .basis import BasisFamily, Kind
from .collocation import CollocationSystem, NodeGrid, assemble, map_pixels_to_grid, tensor_hermite_grid
from .dantzig import MultiplicationCounter, SolveResult, SolverConfig, solve, solve_many
from .indexsets import IndexSet, Shape, build
from .moments import InvariantVector, MomentVector, invariants, moments_from_coefficients
from .series import SparseSeries, TestFunction

__version__ = "0.1.0"

__all__ = [
    "BasisFamily", "Kind", "CollocationSystem", "NodeGrid", "assemble", "map_pixels_to_grid",
    "tensor_hermite_grid", "MultiplicationCounter", "SolveResult", "SolverConfig", "solve",
    "solve_many", "IndexSet", "Shape", "build", "InvariantVector", "MomentVector", "invariants",
    "moments_from_coefficients", "SparseSeries", "TestFunction",
]

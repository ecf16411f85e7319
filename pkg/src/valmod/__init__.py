"""Valuation Hilbert modules at finite truncation degree."""

from .poly import INFINITY, Polynomial, ord
from .spaces import SpaceModel, make_space
from .subspace import Ambient, Subspace, Tolerances, orthonormalize

__version__ = "0.1.0"
__all__ = ["INFINITY", "Polynomial", "ord", "SpaceModel", "make_space", "Ambient", "Subspace",
           "Tolerances", "orthonormalize"]

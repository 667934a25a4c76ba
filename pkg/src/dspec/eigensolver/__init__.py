"""Eigenvalue engines for truncated problems: shooting, Galerkin, dense oracle."""

from .galerkin import counting_function, galerkin_spectrum
from .problem import DIRICHLET, NEUMANN, Block, SpectralResult, TruncatedProblem
from .shooting import eigenvalues_shooting, interface_matrix, secular, transfer_matrix

__all__ = [
    "Block", "DIRICHLET", "NEUMANN", "SpectralResult", "TruncatedProblem",
    "counting_function", "eigenvalues_shooting", "galerkin_spectrum",
    "interface_matrix", "secular", "transfer_matrix",
]

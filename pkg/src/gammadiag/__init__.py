"""Sparse Jacobi diagonalization of Hamiltonians in the gamma (Pauli product) basis."""
from gammadiag.algebra import GammaIndex, commutes, from_pauli_string, multiply, structure_constant
from gammadiag.diagonalizer import (
    DiagonalizeConfig,
    DiagonalizeOutcome,
    RotationStep,
    Status,
    apply_rotation,
    diagonalize,
    optimal_angle,
    select_candidate,
    xy_for_candidate,
)
from gammadiag.models import ModelSpec, build_random, build_tfim, read_elements, table1_fixture, write_elements
from gammadiag.oracle import (
    dense_to_gamma,
    diagonal_row_to_eigenvalues,
    eigen_hermitian,
    gamma_to_dense,
    rdm,
)
from gammadiag.sparse import SparseGammaOperator

__version__ = "0.1.0"

__all__ = [
    "DiagonalizeConfig",
    "DiagonalizeOutcome",
    "GammaIndex",
    "ModelSpec",
    "RotationStep",
    "SparseGammaOperator",
    "Status",
    "apply_rotation",
    "build_random",
    "build_tfim",
    "commutes",
    "dense_to_gamma",
    "diagonal_row_to_eigenvalues",
    "diagonalize",
    "eigen_hermitian",
    "from_pauli_string",
    "gamma_to_dense",
    "multiply",
    "optimal_angle",
    "rdm",
    "read_elements",
    "select_candidate",
    "structure_constant",
    "table1_fixture",
    "write_elements",
    "xy_for_candidate",
]

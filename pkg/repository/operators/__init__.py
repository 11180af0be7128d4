"""
Núcleo de operadores: tipos del espacio de Hilbert y primitivas espectrales.
"""

from .hilbert import Effect, HilbertSpace, Operator, StateVector, canonical_phase
from .linalg import (
    as_matrix,
    commutator_norm,
    maximizing_state,
    min_eigenvalue,
    operator_norm,
    rank_one_difference_norm,
    spectral_norm,
    tree_sum,
)

__all__ = [
    "Effect",
    "HilbertSpace",
    "Operator",
    "StateVector",
    "canonical_phase",
    "as_matrix",
    "commutator_norm",
    "maximizing_state",
    "min_eigenvalue",
    "operator_norm",
    "rank_one_difference_norm",
    "spectral_norm",
    "tree_sum",
]

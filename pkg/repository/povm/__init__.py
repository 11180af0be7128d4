"""
Núcleo de POVMs: espacios de resultados, eventos, POVMs discretos y
verificaciones de clasificación.
"""

from .checks import (
    PairWitness,
    ValidationReport,
    is_commutative,
    is_projective,
    outcome_probability,
    spectrum_support,
    validate_povm,
)
from .discrete_povm import DiscretePOVM, pvm_from_basis, sharp_position_pvm, uniform_povm
from .outcome_space import Atom, EventSet, MeasureSpec, OutcomeSpace
from .serialization import load_povm, povm_from_dict, povm_to_dict, save_povm

__all__ = [
    "Atom",
    "DiscretePOVM",
    "EventSet",
    "MeasureSpec",
    "OutcomeSpace",
    "PairWitness",
    "ValidationReport",
    "is_commutative",
    "is_projective",
    "load_povm",
    "outcome_probability",
    "povm_from_dict",
    "povm_to_dict",
    "pvm_from_basis",
    "save_povm",
    "sharp_position_pvm",
    "spectrum_support",
    "uniform_povm",
    "validate_povm",
]

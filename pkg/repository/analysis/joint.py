"""
Cota de localización conjunta ‖A(Δq × Δp)‖.
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Optional

from repository.covariant.checks import absolute_continuity_constant
from repository.operators.hilbert import StateVector
from repository.operators.linalg import maximizing_state, spectral_norm
from repository.povm.discrete_povm import DiscretePOVM
from repository.povm.outcome_space import EventSet
from utils.exceptions import NonProductSpaceError, RejectedInputError
from utils.logger import get_logger

logger = get_logger(__name__)


@dataclass
class JointBound:
    """Supremo de ⟨ψ, A(Δq × Δp) ψ⟩ y su certificado c·μ(Δq × Δp) ∧ 1."""

    norm: float
    bound: Optional[float]
    measure: float
    state: Optional[StateVector]
    expectation: Optional[float]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "norm": self.norm,
            "bound": self.bound,
            "measure": self.measure,
            "expectation": self.expectation,
            "state": self.state.to_pairs() if self.state is not None else None,
        }


def joint_localization_bound(povm: DiscretePOVM, q_event: EventSet, p_event: EventSet) -> JointBound:
    """
    Norma de A(Δq × Δp), cota certificada y estado maximizante.

    Args:
        povm: POVM sobre un espacio producto
        q_event: Evento sobre el eje q (índices de columna)
        p_event: Evento sobre el eje p (índices de fila)

    Raises:
        NonProductSpaceError: Si el espacio no es un producto
    """
    space = povm.space
    if not space.is_product:
        raise NonProductSpaceError(space.kind)
    n_q, n_p = space.axis_sizes
    if q_event.space_size != n_q or p_event.space_size != n_p:
        raise RejectedInputError(
            f"Eventos de ejes de tamaño ({q_event.space_size}, {p_event.space_size}); se esperaba ({n_q}, {n_p})",
            reason="dimension_mismatch",
        )
    event = space.product_event(q_event.atom_indices, p_event.atom_indices)
    effect = povm.effect_of(event)
    tolerances = povm.tolerances
    norm = spectral_norm(effect, tolerances)
    measure = space.measure_of(event)
    constant = absolute_continuity_constant(povm, tolerances).constant
    bound = None if constant is None else min(1.0, constant * measure)

    state, expectation = None, None
    if norm > tolerances.support:
        state, expectation = maximizing_state(effect, tolerances)
    logger.info(
        f"Localización conjunta: ‖A(Δq×Δp)‖ = {norm:.6g}, cota {bound}",
        extra={"component": "analysis", "operation": "joint_bound"},
    )
    return JointBound(norm=norm, bound=bound, measure=measure, state=state, expectation=expectation)


def axis_event(size: int, indices: List[int]) -> EventSet:
    """Evento sobre un eje de tamaño dado."""
    return EventSet.of(indices, size)

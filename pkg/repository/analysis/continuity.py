"""
Sucesiones de refinamiento y continuidad uniforme.

Una sucesión creciente Δ_i ↑ Δ debe cumplir ‖F(Δ) − F(Δ_i)‖ → 0 y una
decreciente Δ_i ↓ ∅ debe cumplir ‖F(Δ_i)‖ → 0. Con una constante de
continuidad absoluta c, cada término queda dominado por c·ν del
conjunto que falta. En una familia de rejillas anidadas, el evento de
cada nivel vive en su propia rejilla.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from config.settings import DEFAULT_TOLERANCES, Tolerances
from repository.covariant.checks import absolute_continuity_constant
from repository.operators.linalg import operator_norm, spectral_norm
from repository.povm.discrete_povm import DiscretePOVM
from repository.povm.outcome_space import EventSet, OutcomeSpace
from utils.exceptions import InvalidRefinementError, RejectedInputError
from utils.logger import get_logger

logger = get_logger(__name__)

DIRECTIONS = ("increasing", "decreasing-to-empty", "decreasing-to-atom")

# Número máximo de pasos de las sucesiones por defecto
DEFAULT_SEQUENCE_STEPS = 32


@dataclass
class RefinementSequence:
    """
    Sucesión monótona de eventos.

    Con `spaces` vacío todos los eventos son del mismo espacio; si no, el
    evento i vive en spaces[i] y las rejillas deben estar anidadas.
    """

    events: List[EventSet]
    direction: str
    spaces: List[OutcomeSpace] = field(default_factory=list)

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise InvalidRefinementError(
                f"Dirección no soportada: {self.direction}. Soportadas: {', '.join(DIRECTIONS)}"
            )
        if not self.events:
            raise InvalidRefinementError("La sucesión de refinamiento está vacía")
        if self.spaces:
            self._validate_family()
        else:
            self._validate_single()

    @property
    def is_family(self) -> bool:
        return bool(self.spaces)

    def _validate_single(self) -> None:
        size = self.events[0].space_size
        for step in range(1, len(self.events)):
            previous, current = self.events[step - 1], self.events[step]
            if current.space_size != size:
                raise InvalidRefinementError("Los eventos pertenecen a espacios distintos", step=step)
            nested = previous.issubset(current) if self.direction == "increasing" else current.issubset(previous)
            if not nested:
                raise InvalidRefinementError(
                    f"La sucesión no es monótona ({self.direction}) en el paso {step}",
                    step=step,
                )
        last = self.events[-1]
        if self.direction == "decreasing-to-empty" and len(last) != 0:
            raise InvalidRefinementError("Una sucesión decreciente a ∅ debe terminar en el evento vacío")
        if self.direction == "decreasing-to-atom" and len(last) != 1:
            raise InvalidRefinementError("Una sucesión decreciente a un átomo debe terminar en un singleton")

    def _validate_family(self) -> None:
        if len(self.spaces) != len(self.events):
            raise InvalidRefinementError("Se requiere un espacio por evento en una familia anidada")
        if self.direction == "increasing":
            raise InvalidRefinementError("Las familias de rejillas solo admiten sucesiones decrecientes")
        for step in range(1, len(self.events)):
            parent, child = self.spaces[step - 1], self.spaces[step]
            if self.events[step].space_size != child.size:
                raise InvalidRefinementError("El evento no pertenece a su rejilla", step=step)
            try:
                refined = parent.refine_event(self.events[step - 1], child)
            except RejectedInputError as e:
                raise InvalidRefinementError(f"Rejillas no anidadas: {e.message}", step=step)
            if not self.events[step].issubset(refined):
                raise InvalidRefinementError(
                    f"El evento del nivel {step} no está contenido en el del nivel anterior",
                    step=step,
                )


@dataclass
class ContinuityReport:
    """Sucesiones de normas y medidas con la comprobación de dominación."""

    direction: str
    deviations: List[float]
    measures: List[float]
    constants: List[Optional[float]]
    bounds: List[Optional[float]]
    dominated: bool
    final_deviation: float
    identity_deviation: Optional[float] = None

    @property
    def passed(self) -> bool:
        return self.dominated

    def to_dict(self) -> Dict[str, Any]:
        return {
            "direction": self.direction,
            "deviations": self.deviations,
            "measures": self.measures,
            "constants": self.constants,
            "bounds": self.bounds,
            "dominated": self.dominated,
            "final_deviation": self.final_deviation,
            "identity_deviation": self.identity_deviation,
        }


def refinement_check(
    povms: Union[DiscretePOVM, Sequence[DiscretePOVM]],
    sequence: RefinementSequence,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> ContinuityReport:
    """
    Evalúa una sucesión de refinamiento.

    creciente:         ‖F(Δ) − F(Δ_i)‖ frente a ν(Δ ∖ Δ_i), con Δ el último evento
    decreciente a ∅:   ‖F(Δ_i)‖ frente a ν(Δ_i)
    decreciente a {x}: ‖F(Δ_i) − F({x})‖ frente a ν(Δ_i ∖ {x}); en una familia
                       de rejillas, ‖F_i(Δ_i)‖ frente a ν_i(Δ_i)

    Raises:
        InvalidRefinementError: Si la familia no corresponde a la sucesión
    """
    family = list(povms) if isinstance(povms, (list, tuple)) else [povms]
    if sequence.is_family:
        if len(family) != len(sequence.events):
            raise InvalidRefinementError("Se requiere un POVM por nivel de la familia")
        for povm, space in zip(family, sequence.spaces):
            if povm.space.size != space.size:
                raise InvalidRefinementError("El POVM no está definido sobre la rejilla del nivel")
    elif len(family) != 1:
        raise InvalidRefinementError("Una sucesión sobre un solo espacio requiere un único POVM")

    deviations: List[float] = []
    measures: List[float] = []
    constants: List[Optional[float]] = []
    identity_deviation = None

    if sequence.is_family:
        for povm, event in zip(family, sequence.events):
            deviations.append(spectral_norm(povm.effect_of(event), tolerances))
            measures.append(povm.space.measure_of(event))
            constants.append(absolute_continuity_constant(povm, tolerances).constant)
    else:
        povm = family[0]
        space = povm.space
        constant = absolute_continuity_constant(povm, tolerances).constant
        last = sequence.events[-1]
        target = povm.effect_matrix(last)
        for event in sequence.events:
            if sequence.direction == "decreasing-to-empty":
                deviations.append(spectral_norm(povm.effect_of(event), tolerances))
                measures.append(space.measure_of(event))
            else:
                deviations.append(operator_norm(target - povm.effect_matrix(event)))
                missing = last.difference(event) if sequence.direction == "increasing" else event.difference(last)
                measures.append(space.measure_of(missing))
            constants.append(constant)
        if sequence.direction == "increasing" and len(last) == space.size:
            identity_deviation = operator_norm(np.eye(povm.dim) - target)

    bounds = [None if c is None else c * m for c, m in zip(constants, measures)]
    dominated = all(b is None or d <= b + 1e-10 for d, b in zip(deviations, bounds))
    report = ContinuityReport(
        direction=sequence.direction,
        deviations=deviations,
        measures=measures,
        constants=constants,
        bounds=bounds,
        dominated=dominated,
        final_deviation=identity_deviation if identity_deviation is not None else deviations[-1],
        identity_deviation=identity_deviation,
    )
    logger.info(
        f"Refinamiento {sequence.direction}: {len(deviations)} pasos, dominada={dominated}, "
        f"desviación final {report.final_deviation:.3e}",
        extra={"component": "analysis", "operation": "refinement"},
    )
    return report


def _step_sizes(count: int, steps: int) -> List[int]:
    return sorted({int(round(v)) for v in np.linspace(0, count, min(count, steps) + 1)})


def _center_index(space: OutcomeSpace) -> int:
    if space.is_product:
        n_q, n_p = space.axis_sizes
        return space.product_index(n_q // 2, n_p // 2)
    return space.size // 2


def _square(space: OutcomeSpace, center: int, radius: int) -> EventSet:
    n_q, n_p = space.axis_sizes
    i, j = space.axis_indices(center)
    return space.product_event(
        range(max(0, i - radius), min(n_q, i + radius + 1)),
        range(max(0, j - radius), min(n_p, j + radius + 1)),
    )


def default_refinement_sequences(
    space: OutcomeSpace, steps: int = DEFAULT_SEQUENCE_STEPS
) -> List[RefinementSequence]:
    """
    Sucesiones por defecto sobre un espacio.

    Rejillas: cuadrados concéntricos crecientes hasta el espacio total y
    decrecientes hasta el átomo central. Otros espacios: prefijos
    crecientes y sufijos decrecientes en orden de índice.
    """
    n = space.size
    sizes = _step_sizes(n, steps)
    increasing = [space.event(range(k)) for k in sizes]
    to_empty = [space.event(range(n - k, n)) for k in reversed(sizes)]

    if space.kind == "grid":
        center = _center_index(space)
        n_q, n_p = space.axis_sizes
        max_radius = max(n_q, n_p)
        radii = _step_sizes(max_radius, steps)
        increasing = [_square(space, center, r) for r in radii] + [space.full_event()]
        to_atom = [_square(space, center, r) for r in reversed(radii)]
    else:
        to_atom = [space.event(range(k)) for k in reversed(sizes) if k > 0] + [space.singleton(0)]

    return [
        RefinementSequence(_dedupe(increasing), "increasing"),
        RefinementSequence(_dedupe(to_empty), "decreasing-to-empty"),
        RefinementSequence(_dedupe(to_atom), "decreasing-to-atom"),
    ]


def _dedupe(events: List[EventSet]) -> List[EventSet]:
    result: List[EventSet] = []
    for event in events:
        if not result or result[-1].atom_indices != event.atom_indices:
            result.append(event)
    return result


def point_shrinking_sequence(povms: Sequence[DiscretePOVM], point: Sequence[float]) -> RefinementSequence:
    """
    Celdas que contienen un punto a lo largo de rejillas anidadas.

    Raises:
        InvalidRefinementError: Si el punto cae fuera de alguna rejilla
    """
    events, spaces = [], []
    for level, povm in enumerate(povms):
        index = povm.space.locate(point)
        if index is None:
            raise InvalidRefinementError(f"El punto {tuple(point)} está fuera de la rejilla", step=level)
        events.append(povm.space.singleton(index))
        spaces.append(povm.space)
    return RefinementSequence(events, "decreasing-to-atom", spaces)


@dataclass
class AbsoluteContinuityAudit:
    """Comprobación ‖F(Δ)‖ ≤ c·μ(Δ) + 1e-10 sobre una lista de eventos."""

    constant: Optional[float]
    checked: int
    violations: List[int]
    max_excess: float
    passed: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "constant": self.constant,
            "checked": self.checked,
            "violations": self.violations,
            "max_excess": self.max_excess,
            "passed": self.passed,
        }


def absolute_continuity_audit(
    povm: DiscretePOVM,
    events: Sequence[EventSet],
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> AbsoluteContinuityAudit:
    """Verifica la cota de continuidad absoluta en cada evento dado."""
    result = absolute_continuity_constant(povm, tolerances)
    if not result.finite:
        return AbsoluteContinuityAudit(
            constant=None, checked=0, violations=[], max_excess=float("inf"), passed=False
        )
    violations, max_excess = [], -np.inf
    for position, event in enumerate(events):
        excess = spectral_norm(povm.effect_of(event), tolerances) - result.constant * povm.space.measure_of(event)
        max_excess = max(max_excess, excess)
        if excess > 1e-10:
            violations.append(position)
    return AbsoluteContinuityAudit(
        constant=result.constant,
        checked=len(events),
        violations=violations,
        max_excess=float(max_excess) if events else 0.0,
        passed=not violations,
    )

"""
Propiedad de norma 1 y su condición necesaria.

Un POVM tiene la propiedad de norma 1 si ‖F(Δ)‖ = 1 para todo evento con
efecto no nulo. La condición necesaria exige ‖F({x})‖ ≠ 0 en cada punto
del espectro; aquí se evalúa sobre la clausura discreta del soporte.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from config.settings import SCALING_SLOPE_RANGE, STATE_EXPORT_LIMIT, Tolerances
from repository.analysis.events import TaggedEvent
from repository.operators.linalg import maximizing_state, spectral_norm
from repository.povm.discrete_povm import DiscretePOVM
from repository.povm.outcome_space import EventSet
from utils.exceptions import InsufficientLevelsError
from utils.logger import get_logger

logger = get_logger(__name__)

VERDICT_HAS_NORM1 = "has-norm-1"
VERDICT_FAILS = "fails"
VERDICT_EXCLUDED = "excluded-by-necessary-condition"
NECESSARY_EXCLUDED = "norm-1-excluded"
NECESSARY_INCONCLUSIVE = "inconclusive"


@dataclass
class EventRecord:
    """Registro de un evento: norma, brecha 1 − norma y estado maximizante."""

    atoms: List[int]
    kind: str
    norm: float
    gap: float
    zero: bool
    expectation: Optional[float] = None
    state_ref: Optional[str] = None
    # ‖F(Δ)‖ > 1 + tol: solo posible con un defecto de normalización admitido
    exceeds_identity: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "atoms": self.atoms,
            "kind": self.kind,
            "norm": self.norm,
            "gap": self.gap,
            "zero": self.zero,
            "expectation": self.expectation,
            "state_ref": self.state_ref,
            "exceeds_identity": self.exceeds_identity,
        }


@dataclass
class Norm1Report:
    """Informe de la propiedad de norma 1 sobre una lista de eventos."""

    verdict: str
    tolerance: float
    zero_threshold: float
    records: List[EventRecord] = field(default_factory=list)
    witnesses: List[int] = field(default_factory=list)
    above_identity: List[int] = field(default_factory=list)
    states: Dict[str, List[List[float]]] = field(default_factory=dict)

    @property
    def has_norm1(self) -> bool:
        return self.verdict == VERDICT_HAS_NORM1

    @property
    def min_gap(self) -> float:
        return min((r.gap for r in self.records if not r.zero), default=0.0)

    @property
    def max_gap(self) -> float:
        return max((r.gap for r in self.records if not r.zero), default=0.0)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "verdict": self.verdict,
            "tolerance": self.tolerance,
            "zero_threshold": self.zero_threshold,
            "events": len(self.records),
            "nonzero_events": sum(1 for r in self.records if not r.zero),
            "min_gap": self.min_gap,
            "max_gap": self.max_gap,
            "witnesses": self.witnesses[:STATE_EXPORT_LIMIT],
            "above_identity": self.above_identity[:STATE_EXPORT_LIMIT],
            "records": [r.to_dict() for r in self.records],
            "states": self.states,
        }


def _as_tagged(events: Sequence[Union[EventSet, TaggedEvent]]) -> List[TaggedEvent]:
    return [e if isinstance(e, TaggedEvent) else TaggedEvent(e, "given") for e in events]


def norm1_report(
    povm: DiscretePOVM,
    events: Sequence[Union[EventSet, TaggedEvent]],
    tol: Optional[float] = None,
    tolerances: Optional[Tolerances] = None,
    necessary: Optional["NecessaryConditionVerdict"] = None,
) -> Norm1Report:
    """
    Evalúa ‖F(Δ)‖ y el estado maximizante para cada evento.

    Args:
        povm: POVM a analizar
        events: Eventos (o eventos etiquetados) sobre el espacio del POVM
        tol: Tolerancia de la brecha (por defecto la de igualdad)
        tolerances: Tolerancias (el umbral de efecto nulo es `support`)
        necessary: Veredicto de la condición necesaria, si ya se calculó

    Returns:
        Informe con el veredicto agregado
    """
    tolerances = tolerances or povm.tolerances
    tol = tolerances.equality if tol is None else tol
    report = Norm1Report(verdict=VERDICT_HAS_NORM1, tolerance=tol, zero_threshold=tolerances.support)

    for position, tagged in enumerate(_as_tagged(events)):
        effect = povm.effect_of(tagged.event)
        norm = spectral_norm(effect, tolerances)
        record = EventRecord(
            atoms=list(tagged.event.atom_indices),
            kind=tagged.kind,
            norm=norm,
            gap=1.0 - norm,
            zero=norm <= tolerances.support,
            exceeds_identity=norm > 1.0 + tol,
        )
        if record.exceeds_identity:
            report.above_identity.append(position)
        if not record.zero:
            state, value = maximizing_state(effect, tolerances)
            record.expectation = value
            if len(report.states) < STATE_EXPORT_LIMIT:
                record.state_ref = f"s{len(report.states)}"
                report.states[record.state_ref] = state.to_pairs()
            if record.gap > tol:
                report.witnesses.append(position)
        report.records.append(record)

    if report.witnesses:
        excluded = necessary is not None and necessary.verdict == NECESSARY_EXCLUDED
        report.verdict = VERDICT_EXCLUDED if excluded else VERDICT_FAILS
    if report.above_identity:
        logger.warning(
            f"{len(report.above_identity)} eventos con ‖F(Δ)‖ > 1 en {povm.label} "
            f"(máximo {1.0 - report.min_gap:.12g}, defecto {povm.normalization_defect:.3e})",
            extra={"component": "analysis", "operation": "norm1"},
        )

    logger.info(
        f"Norma 1 para {povm.label}: {report.verdict} ({len(report.records)} eventos, "
        f"{len(report.witnesses)} testigos)",
        extra={"component": "analysis", "operation": "norm1"},
    )
    return report


@dataclass
class NecessaryConditionVerdict:
    """Veredicto de la condición necesaria ‖F({x})‖ ≠ 0 en el espectro."""

    verdict: str
    tolerance: float
    witnesses: List[int] = field(default_factory=list)
    atom_norm_ceiling: float = 0.0
    min_support_norm: Optional[float] = None
    max_cell_measure: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "verdict": self.verdict,
            "tolerance": self.tolerance,
            "witnesses": self.witnesses,
            "atom_norm_ceiling": self.atom_norm_ceiling,
            "min_support_norm": self.min_support_norm,
            "max_cell_measure": self.max_cell_measure,
        }


def necessary_condition_verdict(povm: DiscretePOVM, tol: Optional[float] = None) -> NecessaryConditionVerdict:
    """
    Busca átomos de efecto nulo en la clausura del soporte.

    Un átomo con ‖F({x})‖ ≤ tol adyacente a un átomo del soporte excluye la
    propiedad de norma 1; si no existe, el resultado es inconcluso (la
    condición es solo necesaria). Se informa además la cota por átomo
    max_x ‖F({x})‖.
    """
    tol = povm.tolerances.support if tol is None else tol
    space = povm.space
    norms = povm.atom_norms()
    support = norms > tol
    witnesses = []
    for index in np.flatnonzero(~support):
        if any(support[j] for j in space.neighbors(int(index))):
            witnesses.append(int(index))

    verdict = NecessaryConditionVerdict(
        verdict=NECESSARY_EXCLUDED if witnesses else NECESSARY_INCONCLUSIVE,
        tolerance=tol,
        witnesses=witnesses,
        atom_norm_ceiling=float(norms.max()) if norms.size else 0.0,
        min_support_norm=float(norms[support].min()) if np.any(support) else None,
        max_cell_measure=float(space.weights.max()),
    )
    logger.info(
        f"Condición necesaria para {povm.label}: {verdict.verdict} (cota por átomo {verdict.atom_norm_ceiling:.3e})",
        extra={"component": "analysis", "operation": "necessary_condition"},
    )
    return verdict


@dataclass
class NecessaryConditionTrend:
    """Tendencia de la cota por átomo a lo largo de rejillas anidadas."""

    levels: List[Dict[str, float]]
    slope: float
    intercept: float
    verdict: str

    def to_dict(self) -> Dict[str, Any]:
        return {"levels": self.levels, "slope": self.slope, "intercept": self.intercept, "verdict": self.verdict}


def necessary_condition_family(povms: Sequence[DiscretePOVM]) -> NecessaryConditionTrend:
    """
    Ajusta log(cota por átomo) frente a log(medida de celda) en una familia.

    Si la pendiente cae en el rango de escala, las cotas se anulan con la
    medida de la celda y la propiedad de norma 1 queda excluida en el límite.

    Raises:
        InsufficientLevelsError: Con menos de dos niveles
    """
    if len(povms) < 2:
        raise InsufficientLevelsError(len(povms), 2)
    levels = []
    for povm in povms:
        verdict = necessary_condition_verdict(povm)
        levels.append({
            "cell_measure": verdict.max_cell_measure,
            "atom_norm_ceiling": verdict.atom_norm_ceiling,
        })
    x = np.log([lvl["cell_measure"] for lvl in levels])
    y = np.log([max(lvl["atom_norm_ceiling"], np.finfo(float).tiny) for lvl in levels])
    slope, intercept = np.polyfit(x, y, 1)
    low, high = SCALING_SLOPE_RANGE
    return NecessaryConditionTrend(
        levels=levels,
        slope=float(slope),
        intercept=float(intercept),
        verdict=NECESSARY_EXCLUDED if low <= slope <= high else NECESSARY_INCONCLUSIVE,
    )

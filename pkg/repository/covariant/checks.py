"""
Verificaciones de las construcciones covariantes.

Covarianza bajo desplazamientos, constante de continuidad absoluta y
barrido de la resolución de la identidad.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config.settings import (
    DEFAULT_TOLERANCES,
    EXHAUSTIVE_SHIFT_LIMIT,
    RANDOM_SHIFT_COUNT,
    Tolerances,
)
from repository.covariant.fiducials import build_fiducial
from repository.covariant.weyl import WeylSystem, build_wh_povm
from repository.operators.linalg import operator_norm, rank_one_difference_norm
from repository.povm.discrete_povm import DiscretePOVM
from utils.exceptions import RejectedInputError
from utils.logger import get_logger

logger = get_logger(__name__)

Shift = Tuple[int, int]


def _check_system(povm: DiscretePOVM, system: WeylSystem) -> None:
    if povm.space.kind != "lattice" or povm.dim != system.dim or povm.space.shape != (system.dim, system.dim):
        raise RejectedInputError(
            f"El POVM ({povm.space.kind}, d={povm.dim}) no corresponde al sistema de Weyl d={system.dim}",
            reason="system_mismatch",
        )


def _shifted_indices(dim: int, shift: Shift) -> np.ndarray:
    a, b = shift
    q, p = np.divmod(np.arange(dim * dim), dim)
    return ((q + a) % dim) * dim + (p + b) % dim


def covariance_check(povm: DiscretePOVM, system: WeylSystem, shift: Shift) -> float:
    """
    Desviación máxima ‖D A({x}) D† − A({x + (a, b)})‖ sobre los átomos.

    Para átomos factorizados se usa la norma exacta de la diferencia de
    dos operadores de rango uno.

    Raises:
        RejectedInputError: Si el POVM no está construido sobre el sistema
    """
    _check_system(povm, system)
    a, b = int(shift[0]), int(shift[1])
    targets = _shifted_indices(system.dim, (a, b))

    if povm.is_factored:
        moved = np.roll(povm.vectors * system.displace(0, b, np.ones(system.dim))[None, :], a % system.dim, axis=1)
        deviations = rank_one_difference_norm(
            povm.weights, moved, povm.weights[targets], povm.vectors[targets]
        )
        return float(np.max(deviations))

    unitary = system.displacement(a, b)
    stack = povm.dense_stack
    conjugated = unitary @ stack @ unitary.conj().T
    return max(operator_norm(conjugated[i] - stack[targets[i]]) for i in range(stack.shape[0]))


@dataclass
class CovarianceSweep:
    """Resultado de la covarianza sobre una lista de desplazamientos."""

    max_deviation: float
    worst_shift: Optional[Shift]
    shifts_checked: int
    exhaustive: bool
    tolerance: float
    passed: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "max_deviation": self.max_deviation,
            "worst_shift": list(self.worst_shift) if self.worst_shift is not None else None,
            "shifts_checked": self.shifts_checked,
            "exhaustive": self.exhaustive,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def covariance_sweep(
    povm: DiscretePOVM,
    system: WeylSystem,
    shifts: Optional[Sequence[Shift]] = None,
    rng: Optional[np.random.Generator] = None,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> CovarianceSweep:
    """
    Covarianza sobre todos los desplazamientos (d ≤ 8) o una muestra aleatoria.

    Raises:
        RejectedInputError: Si se necesita muestreo aleatorio y no hay generador
    """
    d = system.dim
    exhaustive = shifts is None and d <= EXHAUSTIVE_SHIFT_LIMIT
    if shifts is None:
        if exhaustive:
            shifts = [(a, b) for a in range(d) for b in range(d)]
        else:
            if rng is None:
                raise RejectedInputError(
                    "El muestreo aleatorio de desplazamientos requiere una semilla",
                    reason="seed_required",
                )
            drawn = rng.integers(0, d, size=(RANDOM_SHIFT_COUNT, 2))
            shifts = [(int(a), int(b)) for a, b in drawn]

    worst, worst_shift = 0.0, None
    for shift in shifts:
        deviation = covariance_check(povm, system, shift)
        if worst_shift is None or deviation > worst:
            worst, worst_shift = deviation, (int(shift[0]), int(shift[1]))

    return CovarianceSweep(
        max_deviation=worst,
        worst_shift=worst_shift,
        shifts_checked=len(shifts),
        exhaustive=exhaustive,
        tolerance=tolerances.equality,
        passed=worst <= tolerances.equality,
    )


@dataclass
class AbsoluteContinuityResult:
    """Constante c con ‖F(Δ)‖ ≤ c·μ(Δ), o el átomo que impide su existencia."""

    constant: Optional[float]
    finite: bool
    witness_atom: Optional[int] = None
    witness_norm: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "constant": self.constant,
            "finite": self.finite,
            "witness_atom": self.witness_atom,
            "witness_norm": self.witness_norm,
        }


def absolute_continuity_constant(
    povm: DiscretePOVM, tolerances: Optional[Tolerances] = None
) -> AbsoluteContinuityResult:
    """
    c = max_x ‖F({x})‖ / μ({x}).

    Por la desigualdad triangular esta c certifica ‖F(Δ)‖ ≤ c·μ(Δ) para
    todo evento. Un átomo de medida nula con efecto no nulo impide una c
    finita; se informa como resultado, no como excepción.
    """
    tolerances = tolerances or povm.tolerances
    norms = povm.atom_norms()
    weights = povm.space.weights
    null = (weights <= 0.0) & (norms > tolerances.support)
    if np.any(null):
        witness = int(np.flatnonzero(null)[0])
        return AbsoluteContinuityResult(
            constant=None,
            finite=False,
            witness_atom=witness,
            witness_norm=float(norms[witness]),
        )
    positive = weights > 0.0
    if not np.any(positive):
        return AbsoluteContinuityResult(constant=0.0, finite=True)
    ratios = norms[positive] / weights[positive]
    best = int(np.argmax(ratios))
    return AbsoluteContinuityResult(
        constant=float(ratios[best]),
        finite=True,
        witness_atom=int(np.flatnonzero(positive)[best]),
        witness_norm=float(norms[positive][best]),
    )


@dataclass
class ResolutionSweep:
    """Defectos de normalización de construcciones WH con fiduciales aleatorios."""

    rows: List[Dict[str, Any]] = field(default_factory=list)
    max_defect: float = 0.0
    tolerance: float = 0.0
    passed: bool = True

    def to_dict(self) -> Dict[str, Any]:
        return {
            "max_defect": self.max_defect,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "samples": len(self.rows),
        }


def resolution_sweep(
    d_values: Sequence[int],
    fiducials_per_d: int,
    rng: np.random.Generator,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> ResolutionSweep:
    """
    Construye WH(d, η) con η aleatorios y registra el defecto de cada uno.

    Pasa si todos los defectos son ≤ tolerancia de igualdad y ningún peso
    de átomo es negativo.
    """
    sweep = ResolutionSweep(tolerance=tolerances.equality)
    for d in d_values:
        for sample in range(fiducials_per_d):
            fiducial = build_fiducial({"label": "random"}, d, rng=rng)
            povm = build_wh_povm(d, fiducial, tolerances)
            norms = povm.atom_norms()
            sweep.rows.append({
                "d": int(d),
                "sample": sample,
                "normalization_defect": povm.normalization_defect,
                "min_atom_weight": float(povm.weights.min()),
                "max_atom_norm_deviation": float(np.max(np.abs(norms - 1.0 / d))),
            })
    sweep.max_defect = max((r["normalization_defect"] for r in sweep.rows), default=0.0)
    sweep.passed = all(
        r["normalization_defect"] <= tolerances.equality and r["min_atom_weight"] >= 0.0
        for r in sweep.rows
    )
    logger.info(
        f"Barrido de resolución: {len(sweep.rows)} construcciones, defecto máximo {sweep.max_defect:.3e}",
        extra={"component": "covariant", "operation": "resolution_sweep"},
    )
    return sweep

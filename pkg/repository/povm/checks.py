"""
Verificaciones de clasificación de un POVM discreto.

Normalización, conmutatividad, ortogonalidad/proyectividad, espectro y
probabilidades de resultado. Los fallos se devuelven como resultados,
nunca como excepciones.
"""

from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Iterator, List, Optional, Tuple

import numpy as np
from scipy.linalg import eigvalsh

from config.settings import DEFAULT_TOLERANCES, Tolerances
from repository.operators.hilbert import StateVector, hermiticity_defect
from repository.povm.discrete_povm import DiscretePOVM
from repository.povm.outcome_space import EventSet
from utils.exceptions import RejectedInputError
from utils.logger import get_logger

logger = get_logger(__name__)

# Filas por bloque al recorrer pares de átomos
PAIR_BLOCK = 256


@dataclass
class AtomCheck:
    """Resultado de la verificación de un átomo."""

    index: int
    hermiticity_defect: float
    min_eigenvalue: float
    max_eigenvalue: float
    hermitian: bool
    positive: bool
    bounded: bool


@dataclass
class ValidationReport:
    """Resultado de validate_povm."""

    passed: bool
    normalization_defect: float
    threshold: float
    normalized: bool
    atoms: List[AtomCheck] = field(default_factory=list)
    failures: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "normalization_defect": self.normalization_defect,
            "threshold": self.threshold,
            "normalized": self.normalized,
            "min_eigenvalue": min((a.min_eigenvalue for a in self.atoms), default=0.0),
            "max_eigenvalue": max((a.max_eigenvalue for a in self.atoms), default=0.0),
            "failures": list(self.failures),
        }


@dataclass
class PairWitness:
    """Resultado de una verificación sobre pares de átomos con el peor par."""

    holds: bool
    tolerance: float
    max_norm: float
    witness: Optional[Tuple[int, int]] = None

    def __bool__(self) -> bool:
        return self.holds

    def to_dict(self) -> Dict[str, Any]:
        payload = asdict(self)
        payload["witness"] = list(self.witness) if self.witness is not None else None
        return payload


def _atom_spectrum(povm: DiscretePOVM, index: int) -> Tuple[float, float, float]:
    """Defecto de hermiticidad, λ_min y λ_max de un átomo, sin certificarlo."""
    if povm.is_factored:
        top = float(povm.weights[index] * np.real(np.vdot(povm.vectors[index], povm.vectors[index])))
        if povm.dim == 1:
            return 0.0, top, top
        return 0.0, min(top, 0.0), max(top, 0.0)
    matrix = povm.dense_stack[index]
    eigenvalues = eigvalsh(0.5 * (matrix + matrix.conj().T))
    return hermiticity_defect(matrix), float(eigenvalues[0]), float(eigenvalues[-1])


def validate_povm(
    povm: DiscretePOVM,
    tolerances: Optional[Tolerances] = None,
    threshold: Optional[float] = None,
) -> ValidationReport:
    """
    Verifica positividad, cota superior por átomo y normalización.

    Args:
        povm: POVM a validar
        tolerances: Tolerancias (por defecto las del POVM)
        threshold: Umbral de admisibilidad del defecto (por defecto el del
            POVM o la tolerancia de normalización exacta)

    Returns:
        Informe de validación; pasa si todas las condiciones se cumplen
    """
    tolerances = tolerances or povm.tolerances
    limit = threshold if threshold is not None else (
        povm.threshold if povm.threshold is not None else tolerances.exact_normalization
    )
    report = ValidationReport(
        passed=True,
        normalization_defect=povm.normalization_defect,
        threshold=limit,
        normalized=povm.normalization_defect <= limit,
    )

    for index in range(povm.space.size):
        defect, low, high = _atom_spectrum(povm, index)
        check = AtomCheck(
            index=index,
            hermiticity_defect=defect,
            min_eigenvalue=low,
            max_eigenvalue=high,
            hermitian=defect <= tolerances.hermiticity,
            positive=low >= -tolerances.positivity,
            bounded=high <= 1.0 + tolerances.equality,
        )
        report.atoms.append(check)
        if not check.hermitian:
            report.failures.append(f"átomo {index}: defecto de hermiticidad {defect:.3e}")
        if not check.positive:
            report.failures.append(f"átomo {index}: autovalor mínimo {low:.3e}")
        if not check.bounded:
            report.failures.append(f"átomo {index}: autovalor máximo {high:.12g} > 1")

    if not report.normalized:
        report.failures.append(
            f"defecto de normalización {povm.normalization_defect:.3e} > {limit:.3e}"
        )
    report.passed = not report.failures

    logger.info(
        f"Validación de POVM {povm.label}: {'aprobada' if report.passed else 'fallida'} "
        f"(defecto {povm.normalization_defect:.3e})",
        extra={"component": "povm", "operation": "validate"},
    )
    return report


def _row_blocks(size: int) -> Iterator[slice]:
    for start in range(0, size, PAIR_BLOCK):
        yield slice(start, min(start + PAIR_BLOCK, size))


def _rank_one_commutator_exact(w1: float, u: np.ndarray, w2: float, v: np.ndarray) -> float:
    """‖[w1 uu†, w2 vv†]‖ = w1 w2 |⟨u,v⟩| ‖u‖ ‖v_⊥‖ con v_⊥ ortogonal a u."""
    uu = float(np.real(np.vdot(u, u)))
    if uu == 0.0:
        return 0.0
    overlap = np.vdot(u, v)
    perpendicular = v - (overlap / uu) * u
    return float(w1 * w2 * abs(overlap) * np.sqrt(uu) * np.linalg.norm(perpendicular))


def is_commutative(povm: DiscretePOVM, tol: Optional[float] = None) -> PairWitness:
    """
    Decide si todos los pares de átomos conmutan dentro de tol.

    La conmutatividad por pares de átomos equivale a la de todas las
    uniones finitas (bilinealidad del conmutador).

    Returns:
        Resultado con el peor par y la norma de su conmutador
    """
    tol = povm.tolerances.equality if tol is None else tol
    size = povm.space.size
    worst_norm, worst_pair = 0.0, None

    if povm.is_factored:
        weights, vectors = povm.weights, povm.vectors
        squared = np.real(np.sum(vectors.conj() * vectors, axis=1))
        for rows in _row_blocks(size):
            gram = vectors[rows].conj() @ vectors.T
            modulus = np.abs(gram)
            gap = np.maximum(squared[rows, None] * squared[None, :] - modulus ** 2, 0.0)
            # Estimación por Gram; sobreestima pares casi paralelos
            estimate = weights[rows, None] * weights[None, :] * modulus * np.sqrt(gap)
            if float(estimate.max()) <= tol:
                continue
            candidates = np.argwhere(estimate > tol)
            for a, b in candidates[np.argsort(-estimate[candidates[:, 0], candidates[:, 1]])]:
                a = int(a) + rows.start
                exact = _rank_one_commutator_exact(weights[a], vectors[a], weights[b], vectors[b])
                if exact > worst_norm:
                    worst_norm, worst_pair = exact, (min(a, int(b)), max(a, int(b)))
                if exact > tol:
                    break
    else:
        stack = povm.dense_stack
        for i in range(size):
            others = stack[i + 1:]
            if others.shape[0] == 0:
                continue
            commutators = stack[i] @ others - others @ stack[i]
            norms = np.linalg.norm(commutators, ord=2, axis=(1, 2))
            j = int(np.argmax(norms))
            if norms[j] > worst_norm:
                worst_norm, worst_pair = float(norms[j]), (i, i + 1 + j)

    return PairWitness(
        holds=worst_norm <= tol,
        tolerance=tol,
        max_norm=worst_norm,
        witness=worst_pair if worst_norm > tol else None,
    )


def is_projective(povm: DiscretePOVM, tol: Optional[float] = None) -> PairWitness:
    """
    Decide si el POVM es un PVM: F({x})F({y}) = 0 para x ≠ y y F({x})² = F({x}).

    Returns:
        Resultado con el peor defecto; el testigo (x, x) indica idempotencia fallida
    """
    tol = povm.tolerances.equality if tol is None else tol
    size = povm.space.size
    worst_norm, worst_pair = 0.0, None

    if povm.is_factored:
        weights, vectors = povm.weights, povm.vectors
        squared = np.real(np.sum(vectors.conj() * vectors, axis=1))
        idempotency = np.abs(weights ** 2 * squared - weights) * squared
        k = int(np.argmax(idempotency)) if size else 0
        if size and idempotency[k] > worst_norm:
            worst_norm, worst_pair = float(idempotency[k]), (k, k)
        lengths = np.sqrt(squared)
        for rows in _row_blocks(size):
            gram = np.abs(vectors[rows].conj() @ vectors.T)
            products = weights[rows, None] * weights[None, :] * gram * lengths[rows, None] * lengths[None, :]
            local = np.arange(rows.stop - rows.start)
            products[local, local + rows.start] = 0.0
            flat = int(np.argmax(products))
            if products.flat[flat] > worst_norm:
                i, j = divmod(flat, size)
                worst_norm, worst_pair = float(products.flat[flat]), (i + rows.start, j)
    else:
        stack = povm.dense_stack
        for i in range(size):
            products = stack[i] @ stack
            products[i] = products[i] - stack[i]
            norms = np.linalg.norm(products, ord=2, axis=(1, 2))
            j = int(np.argmax(norms))
            if norms[j] > worst_norm:
                worst_norm, worst_pair = float(norms[j]), (i, j)

    if worst_pair is not None:
        worst_pair = (min(worst_pair), max(worst_pair))
    return PairWitness(
        holds=worst_norm <= tol,
        tolerance=tol,
        max_norm=worst_norm,
        witness=worst_pair if worst_norm > tol else None,
    )


def spectrum_support(povm: DiscretePOVM, tol: Optional[float] = None) -> EventSet:
    """Átomos con ‖F({x})‖ > tol (espectro en la topología discreta)."""
    tol = povm.tolerances.support if tol is None else tol
    norms = povm.atom_norms()
    return povm.space.event(np.flatnonzero(norms > tol).tolist())


def outcome_probability(
    povm: DiscretePOVM,
    state: StateVector,
    event: EventSet,
    tolerances: Optional[Tolerances] = None,
) -> float:
    """
    Probabilidad ⟨ψ, F(Δ) ψ⟩ de que el resultado caiga en Δ.

    Se recorta a [0, 1 + 1e-10] registrando una advertencia si hizo falta.

    Raises:
        RejectedInputError: Si la dimensión del estado no coincide
    """
    tolerances = tolerances or povm.tolerances or DEFAULT_TOLERANCES
    if state.dim != povm.dim:
        raise RejectedInputError(
            f"Dimensión del estado {state.dim} distinta de la del POVM {povm.dim}",
            reason="dimension_mismatch",
        )
    value = state.expectation(povm.effect_matrix(event))
    ceiling = 1.0 + 1e-10
    if value < 0.0 or value > ceiling:
        if value < -tolerances.positivity or value > ceiling:
            logger.warning(
                f"Probabilidad fuera de [0, 1]: {value!r}; se recorta",
                extra={"component": "povm", "operation": "outcome_probability"},
            )
        value = min(max(value, 0.0), ceiling)
    return value

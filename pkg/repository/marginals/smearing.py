"""
Suavizado de PVMs con núcleos de Markov y extracción de núcleos.

F(Δ) = Σ_x ω_Δ(x)|b_x⟩⟨b_x| es diagonal en la base de referencia, por lo
que todo observable suavizado es conmutativo.
"""

from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np

from config.settings import DEFAULT_TOLERANCES, Tolerances
from repository.marginals.kernel import MarkovKernel
from repository.povm.checks import is_projective
from repository.povm.discrete_povm import DiscretePOVM, pvm_from_basis
from repository.povm.outcome_space import OutcomeSpace
from utils.exceptions import KernelError
from utils.logger import get_logger

logger = get_logger(__name__)


def position_basis(dim: int) -> np.ndarray:
    """Base canónica {|j⟩} por columnas."""
    return np.eye(dim, dtype=np.complex128)


def fourier_basis(dim: int) -> np.ndarray:
    """Base de Fourier f_k = d^{-1/2} Σ_j ω^{jk}|j⟩ por columnas (autobase del reloj desplazado)."""
    exponents = np.outer(np.arange(dim), np.arange(dim)) % dim
    return np.exp(2j * np.pi * exponents / dim) / np.sqrt(dim)


BASES = {"position": position_basis, "fourier": fourier_basis}


@dataclass(eq=False)
class SmearedObservable:
    """Observable suavizado: PVM de referencia + núcleo + POVM resultante."""

    base_basis: str
    basis: np.ndarray
    kernel: MarkovKernel
    povm: DiscretePOVM


def _basis_of(pvm: DiscretePOVM, tolerances: Tolerances) -> np.ndarray:
    """Columnas |b_x⟩ de un PVM de rango uno con átomos unitarios."""
    if not pvm.is_factored:
        raise KernelError("El PVM base debe estar factorizado en proyectores de rango uno")
    lengths = pvm.weights * np.real(np.sum(pvm.vectors.conj() * pvm.vectors, axis=1))
    if np.any(np.abs(lengths - 1.0) > tolerances.equality):
        raise KernelError("El PVM base debe tener un proyector de rango uno por punto espectral")
    return (pvm.vectors * np.sqrt(pvm.weights)[:, None]).T


def smear_pvm(
    basis_pvm: DiscretePOVM,
    kernel: MarkovKernel,
    space: Optional[OutcomeSpace] = None,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> SmearedObservable:
    """
    Suaviza un PVM con un núcleo: F({a}) = Σ_x ω[x][a]|b_x⟩⟨b_x|.

    Args:
        basis_pvm: PVM proyectivo diagonal (un punto espectral por átomo)
        kernel: Núcleo con una fila por punto espectral
        space: Espacio de resultados (por defecto puntos con medida de conteo)
        tolerances: Tolerancias numéricas

    Returns:
        Observable suavizado

    Raises:
        KernelError: Si la base no es proyectiva o las filas no corresponden
    """
    if not is_projective(basis_pvm, tolerances.equality):
        raise KernelError("El POVM base no es proyectivo")
    if kernel.rows != basis_pvm.space.size:
        raise KernelError(
            f"El núcleo tiene {kernel.rows} filas; el PVM base tiene {basis_pvm.space.size} puntos espectrales"
        )
    basis = _basis_of(basis_pvm, tolerances)
    outcome_space = space or OutcomeSpace.points(kernel.cols, weight=1.0)
    if outcome_space.size != kernel.cols:
        raise KernelError(f"El espacio tiene {outcome_space.size} átomos; el núcleo {kernel.cols} columnas")

    stack = np.stack([(basis * kernel.matrix[:, a]) @ basis.conj().T for a in range(kernel.cols)])
    povm = DiscretePOVM(
        outcome_space,
        basis_pvm.dim,
        dense=stack,
        threshold=tolerances.exact_normalization,
        label="smeared",
        metadata={"kernel": kernel.name, "basis": basis_pvm.metadata.get("basis", "custom")},
        tolerances=tolerances,
    )
    return SmearedObservable(
        base_basis=basis_pvm.metadata.get("basis", "custom"),
        basis=basis,
        kernel=kernel,
        povm=povm,
    )


def smear_in_basis(
    basis_name: str,
    kernel: MarkovKernel,
    space: Optional[OutcomeSpace] = None,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> SmearedObservable:
    """Suaviza el PVM de la base nombrada ("position" o "fourier")."""
    if basis_name not in BASES:
        raise KernelError(f"Base no soportada: {basis_name}. Soportadas: {', '.join(BASES)}")
    basis_pvm = pvm_from_basis(BASES[basis_name](kernel.rows), basis_name=basis_name, tolerances=tolerances)
    return smear_pvm(basis_pvm, kernel, space, tolerances)


@dataclass
class KernelExtraction:
    """Resultado de extraer un núcleo en una base dada."""

    diagonalizable: bool
    worst_off_diagonal: float
    worst_atom: Optional[int]
    row_sum_deviation: Optional[float] = None
    kernel: Optional[MarkovKernel] = None
    failure: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.kernel is not None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "diagonalizable": self.diagonalizable,
            "worst_off_diagonal": self.worst_off_diagonal,
            "worst_atom": self.worst_atom,
            "row_sum_deviation": self.row_sum_deviation,
            "failure": self.failure,
        }


def extract_kernel(
    povm: DiscretePOVM,
    basis: np.ndarray,
    name: str = "kernel",
    tolerances: Optional[Tolerances] = None,
) -> KernelExtraction:
    """
    Extrae ω[x][a] = ⟨b_x|F({a})|b_x⟩ si todos los efectos son diagonales en la base.

    Args:
        povm: POVM a analizar
        basis: Base ortonormal de referencia por columnas
        name: Nombre del núcleo extraído
        tolerances: Tolerancias numéricas

    Returns:
        Extracción con el núcleo o el testigo fuera de la diagonal
    """
    tolerances = tolerances or povm.tolerances
    basis = np.asarray(basis, dtype=np.complex128)
    rotated = basis.conj().T @ povm.dense_stack @ basis
    diagonals = np.real(np.diagonal(rotated, axis1=1, axis2=2))
    off = np.abs(rotated - np.einsum("aj,jk->ajk", diagonals, np.eye(povm.dim)))
    per_atom = off.reshape(off.shape[0], -1).max(axis=1)
    worst_atom = int(np.argmax(per_atom))
    worst = float(per_atom[worst_atom])

    if worst > tolerances.diagonal:
        logger.info(
            f"El POVM {povm.label} no es diagonal en la base dada (máximo fuera de diagonal {worst:.3e})",
            extra={"component": "marginals", "operation": "extract_kernel"},
        )
        return KernelExtraction(
            diagonalizable=False,
            worst_off_diagonal=worst,
            worst_atom=worst_atom,
            failure="not-diagonalizable-in-basis",
        )

    matrix = diagonals.T
    deviation = float(np.max(np.abs(matrix.sum(axis=1) - 1.0)))
    try:
        kernel = MarkovKernel(np.clip(matrix, 0.0, None), name=name, tolerances=tolerances)
    except KernelError as e:
        return KernelExtraction(
            diagonalizable=True,
            worst_off_diagonal=worst,
            worst_atom=worst_atom,
            row_sum_deviation=deviation,
            failure=e.message,
        )
    return KernelExtraction(
        diagonalizable=True,
        worst_off_diagonal=worst,
        worst_atom=worst_atom,
        row_sum_deviation=deviation,
        kernel=kernel,
    )

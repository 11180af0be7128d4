"""
Primitivas de álgebra lineal densa especializadas en efectos hermíticos.

Normas espectrales, estados maximizantes, conmutadores y autovalores
mínimos. Todas las funciones son puras y aceptan Effect, Operator o
matrices numpy.
"""

from typing import Tuple, Union

import numpy as np
from scipy.linalg import eigh, eigvalsh

from config.settings import DEFAULT_TOLERANCES, Tolerances
from repository.operators.hilbert import (
    Effect,
    Operator,
    StateVector,
    canonical_phase,
    hermiticity_defect,
)
from utils.exceptions import NoMaximizerError, RejectedInputError

MatrixLike = Union[Effect, Operator, np.ndarray]


def as_matrix(value: MatrixLike) -> np.ndarray:
    """Obtiene la matriz densa de un efecto, operador o arreglo."""
    if isinstance(value, Effect):
        return value.matrix
    if isinstance(value, Operator):
        return value.entries
    matrix = np.asarray(value, dtype=np.complex128)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise RejectedInputError(
            f"Se esperaba una matriz cuadrada, forma recibida: {matrix.shape}",
            reason="not_square",
        )
    return matrix


def hermitian_part(value: MatrixLike, tolerances: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """
    Parte hermítica de una matriz que ya es hermítica dentro de la tolerancia.

    Nunca simetriza silenciosamente: una entrada no hermítica es un error.
    """
    matrix = as_matrix(value)
    defect = hermiticity_defect(matrix)
    if defect > tolerances.hermiticity:
        raise RejectedInputError(
            f"Operador no hermítico: defecto {defect:.3e} > {tolerances.hermiticity:.1e}",
            reason="non_hermitian",
            details={"hermiticity_defect": defect},
        )
    return 0.5 * (matrix + matrix.conj().T)


def spectral_norm(effect: MatrixLike, tolerances: Tolerances = DEFAULT_TOLERANCES) -> float:
    """
    Norma espectral de un efecto: mayor autovalor de su parte hermítica.

    Para efectos factorizados c|v⟩⟨v| se calcula c·⟨v,v⟩ sin densificar.

    Args:
        effect: Efecto (o matriz hermítica positiva)
        tolerances: Tolerancias numéricas

    Returns:
        sup_{‖ψ‖=1} ⟨ψ, Eψ⟩ (no negativo)
    """
    if isinstance(effect, Effect) and effect.is_rank_one:
        return effect.weight * float(np.real(np.vdot(effect.vector, effect.vector)))
    hermitian = hermitian_part(effect, tolerances)
    if hermitian.shape[0] == 0:
        return 0.0
    top = float(eigvalsh(hermitian, subset_by_index=[hermitian.shape[0] - 1, hermitian.shape[0] - 1])[0])
    return max(top, 0.0)


def min_eigenvalue(operator: MatrixLike, tolerances: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Menor autovalor de un operador hermítico; certifica E ≥ 0."""
    if isinstance(operator, Effect) and operator.is_rank_one:
        return operator.eigen_range[0]
    hermitian = hermitian_part(operator, tolerances)
    return float(eigvalsh(hermitian, subset_by_index=[0, 0])[0])


def operator_norm(value: MatrixLike) -> float:
    """Norma de operador general (mayor valor singular)."""
    matrix = as_matrix(value)
    if matrix.shape[0] == 0:
        return 0.0
    return float(np.linalg.norm(matrix, ord=2))


def commutator_norm(a: MatrixLike, b: MatrixLike) -> float:
    """
    Norma espectral del conmutador AB − BA.

    Raises:
        RejectedInputError: Si las dimensiones no coinciden
    """
    left, right = as_matrix(a), as_matrix(b)
    if left.shape != right.shape:
        raise RejectedInputError(
            f"Dimensiones incompatibles: {left.shape} vs {right.shape}",
            reason="dimension_mismatch",
        )
    return operator_norm(left @ right - right @ left)


def maximizing_state(
    effect: MatrixLike, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> Tuple[StateVector, float]:
    """
    Vector unitario que alcanza el supremo ⟨ψ, Eψ⟩ = ‖E‖.

    En dimensión finita el supremo se alcanza en el autoespacio superior.
    Desempate determinista: se proyecta sobre ese autoespacio el vector de
    base e_k de mayor peso (menor k en empate) y se fija la fase de la
    primera componente no nula real positiva.

    Returns:
        (ψ, ⟨ψ, Eψ⟩)

    Raises:
        NoMaximizerError: Si el operador es nulo
    """
    if isinstance(effect, Effect) and effect.is_rank_one:
        value = spectral_norm(effect, tolerances)
        if value <= tolerances.support:
            raise NoMaximizerError("El operador nulo no tiene vector maximizante")
        state = StateVector.from_amplitudes(canonical_phase(effect.vector / np.linalg.norm(effect.vector)))
        return state, value

    hermitian = hermitian_part(effect, tolerances)
    eigenvalues, eigenvectors = eigh(hermitian)
    top = float(eigenvalues[-1])
    if top <= tolerances.support:
        raise NoMaximizerError("El operador nulo no tiene vector maximizante")

    cluster = eigenvectors[:, eigenvalues >= top - tolerances.equality]
    # Peso de cada vector de base dentro del autoespacio superior
    weights = np.sum(np.abs(cluster) ** 2, axis=1)
    chosen = int(np.flatnonzero(weights >= weights.max() - 1e-12)[0])
    candidate = cluster @ cluster[chosen, :].conj()
    state = StateVector.from_amplitudes(canonical_phase(candidate / np.linalg.norm(candidate)))
    return state, state.expectation(hermitian)


def tree_sum(stack: np.ndarray) -> np.ndarray:
    """
    Suma una pila de operadores (n, d, d) por reducción en árbol por pares.

    El orden es fijo (índice ascendente) para que los defectos sean
    reproducibles entre ejecuciones.
    """
    if stack.shape[0] == 0:
        return np.zeros(stack.shape[1:], dtype=np.complex128)
    level = stack
    while level.shape[0] > 1:
        paired = level[0: level.shape[0] - level.shape[0] % 2: 2] + level[1::2]
        if level.shape[0] % 2:
            paired = np.concatenate([paired, level[-1:]], axis=0)
        level = paired
    return np.array(level[0])


def rank_one_difference_norm(
    w1: np.ndarray, u: np.ndarray, w2: np.ndarray, v: np.ndarray
) -> np.ndarray:
    """
    Norma espectral exacta de w1|u⟩⟨u| − w2|v⟩⟨v|, vectorizada por filas.

    Reduce el problema a la matriz de Gram 2×2; el término ab − |s|² se
    obtiene con la componente ortogonal de v para que rayos iguales den
    desviación del orden del redondeo.

    Args:
        w1, w2: Pesos (n,)
        u, v: Vectores (n, d)

    Returns:
        Normas (n,)
    """
    w1 = np.asarray(w1, dtype=np.float64)
    w2 = np.asarray(w2, dtype=np.float64)
    uu = np.real(np.sum(u.conj() * u, axis=-1))
    vv = np.real(np.sum(v.conj() * v, axis=-1))
    a = w1 * uu
    b = w2 * vv
    overlap = np.sum(u.conj() * v, axis=-1)
    safe_uu = np.where(uu > 0.0, uu, 1.0)
    perpendicular = v - (overlap / safe_uu)[..., None] * u
    perp_sq = np.real(np.sum(perpendicular.conj() * perpendicular, axis=-1))
    # ab − w1 w2 |⟨u,v⟩|² = w1 w2 ‖u‖² ‖v_⊥‖²
    gram_gap = np.where(uu > 0.0, w1 * w2 * uu * perp_sq, 0.0)
    discriminant = np.sqrt((a - b) ** 2 + 4.0 * gram_gap)
    return 0.5 * (np.abs(a - b) + discriminant)

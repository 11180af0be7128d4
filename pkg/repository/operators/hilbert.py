"""
Tipos básicos del espacio de Hilbert de dimensión finita.

Define el espacio, los vectores de estado, los operadores densos y los
efectos (operadores hermíticos con 0 ≤ E ≤ 1). Todos los valores son
inmutables después de su construcción.
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import eigvalsh

from config.settings import DEFAULT_TOLERANCES, MAX_HILBERT_DIM, Tolerances
from utils.exceptions import RejectedInputError

ArrayLike = Union[np.ndarray, Sequence[complex]]

# Umbral para considerar nula una componente al fijar la fase global
PHASE_THRESHOLD = 1e-12


def canonical_phase(vector: np.ndarray) -> np.ndarray:
    """Rota la primera componente no nula para que sea real positiva."""
    magnitudes = np.abs(vector)
    nonzero = np.flatnonzero(magnitudes > PHASE_THRESHOLD)
    if nonzero.size == 0:
        return vector
    first = vector[nonzero[0]]
    rotated = vector * (np.conj(first) / abs(first))
    rotated[nonzero[0]] = abs(first)
    return rotated


def hermiticity_defect(matrix: np.ndarray) -> float:
    """Máximo módulo entrada a entrada de M − M†."""
    if matrix.size == 0:
        return 0.0
    return float(np.max(np.abs(matrix - matrix.conj().T)))


@dataclass(frozen=True)
class HilbertSpace:
    """Espacio de Hilbert complejo de dimensión d."""

    dim: int

    def __post_init__(self):
        if not isinstance(self.dim, (int, np.integer)) or self.dim < 1:
            raise RejectedInputError(
                f"La dimensión debe ser un entero positivo, se recibió: {self.dim!r}",
                reason="invalid_dimension",
            )
        if self.dim > MAX_HILBERT_DIM:
            raise RejectedInputError(
                f"La dimensión {self.dim} supera el máximo soportado ({MAX_HILBERT_DIM})",
                reason="dimension_too_large",
            )

    def basis_vector(self, index: int) -> "StateVector":
        if not 0 <= index < self.dim:
            raise RejectedInputError(
                f"Índice de base {index} fuera de rango para dimensión {self.dim}",
                reason="index_out_of_range",
            )
        amplitudes = np.zeros(self.dim, dtype=np.complex128)
        amplitudes[index] = 1.0
        return StateVector(amplitudes)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Vector unitario de amplitudes complejas (componentes float64)."""

    amplitudes: np.ndarray

    def __post_init__(self):
        norm = float(np.linalg.norm(self.amplitudes))
        if abs(norm - 1.0) > 1e-12:
            raise RejectedInputError(
                f"El vector de estado no es unitario (norma {norm!r})",
                reason="not_normalized",
            )
        self.amplitudes.setflags(write=False)

    @classmethod
    def from_amplitudes(cls, values: ArrayLike, normalize: bool = True) -> "StateVector":
        """
        Construye un vector de estado a partir de amplitudes.

        Args:
            values: Amplitudes complejas
            normalize: Si se normaliza el vector antes de validarlo

        Returns:
            Vector de estado unitario

        Raises:
            RejectedInputError: Si el vector es nulo o no es unidimensional
        """
        amplitudes = np.array(values, dtype=np.complex128).reshape(-1)
        if amplitudes.size == 0:
            raise RejectedInputError("El vector de estado está vacío", reason="empty_vector")
        norm = float(np.linalg.norm(amplitudes))
        if norm == 0.0 or not np.isfinite(norm):
            raise RejectedInputError("El vector de estado es nulo o no finito", reason="zero_vector")
        if normalize:
            amplitudes = amplitudes / norm
        return cls(amplitudes)

    @property
    def dim(self) -> int:
        return int(self.amplitudes.shape[0])

    def inner(self, other: "StateVector") -> complex:
        """Producto interno ⟨self, other⟩ (antilineal en el primer argumento)."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def expectation(self, matrix: np.ndarray) -> float:
        """Valor esperado ⟨ψ, Mψ⟩ (parte real)."""
        return float(np.real(np.vdot(self.amplitudes, matrix @ self.amplitudes)))

    def to_pairs(self):
        return [[float(z.real), float(z.imag)] for z in self.amplitudes]


@dataclass(frozen=True, eq=False)
class Operator:
    """Matriz compleja cuadrada d×d."""

    entries: np.ndarray

    def __post_init__(self):
        if self.entries.ndim != 2 or self.entries.shape[0] != self.entries.shape[1]:
            raise RejectedInputError(
                f"El operador debe ser cuadrado, forma recibida: {self.entries.shape}",
                reason="not_square",
            )
        self.entries.setflags(write=False)

    @classmethod
    def from_matrix(cls, values: ArrayLike) -> "Operator":
        return cls(np.array(values, dtype=np.complex128))

    @classmethod
    def zeros(cls, dim: int) -> "Operator":
        return cls(np.zeros((dim, dim), dtype=np.complex128))

    @classmethod
    def identity(cls, dim: int) -> "Operator":
        return cls(np.eye(dim, dtype=np.complex128))

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])

    def adjoint(self) -> "Operator":
        return Operator(np.ascontiguousarray(self.entries.conj().T))

    def hermiticity_defect(self) -> float:
        return hermiticity_defect(self.entries)


@dataclass(frozen=True, eq=False)
class Effect:
    """
    Efecto: operador hermítico con 0 ≤ E ≤ 1.

    Puede almacenarse factorizado como c|v⟩⟨v| (peso + vector); la matriz
    densa se construye solo cuando se pide.
    """

    dim: int
    hermiticity_defect: float
    eigen_range: Tuple[float, float]
    weight: Optional[float] = None
    vector: Optional[np.ndarray] = field(default=None, repr=False)
    dense: Optional[np.ndarray] = field(default=None, repr=False)

    @classmethod
    def from_matrix(
        cls,
        values: Union[ArrayLike, Operator],
        tolerances: Tolerances = DEFAULT_TOLERANCES,
        upper_slack: float = 0.0,
    ) -> "Effect":
        """
        Construye y certifica un efecto denso.

        Args:
            values: Matriz u operador
            tolerances: Tolerancias numéricas
            upper_slack: Holgura adicional para λ_max (defecto de normalización del POVM)

        Returns:
            Efecto validado

        Raises:
            RejectedInputError: Si no es hermítico o su espectro sale de [0, 1]
        """
        matrix = values.entries if isinstance(values, Operator) else np.array(values, dtype=np.complex128)
        operator = Operator(np.array(matrix, dtype=np.complex128))
        defect = operator.hermiticity_defect()
        if defect > tolerances.hermiticity:
            raise RejectedInputError(
                f"Operador no hermítico: defecto {defect:.3e} > {tolerances.hermiticity:.1e}",
                reason="non_hermitian",
                details={"hermiticity_defect": defect},
            )
        hermitian = 0.5 * (operator.entries + operator.entries.conj().T)
        eigenvalues = eigvalsh(hermitian)
        low, high = float(eigenvalues[0]), float(eigenvalues[-1])
        if low < -tolerances.positivity:
            raise RejectedInputError(
                f"El efecto no es positivo: λ_min = {low:.3e}",
                reason="not_positive",
                details={"min_eigenvalue": low},
            )
        if high > 1.0 + tolerances.equality + upper_slack:
            raise RejectedInputError(
                f"El efecto supera la identidad: λ_max = {high:.12g}",
                reason="exceeds_identity",
                details={"max_eigenvalue": high},
            )
        return cls(
            dim=operator.dim,
            hermiticity_defect=defect,
            eigen_range=(low, high),
            dense=operator.entries,
        )

    @classmethod
    def rank_one(
        cls,
        weight: float,
        vector: ArrayLike,
        tolerances: Tolerances = DEFAULT_TOLERANCES,
    ) -> "Effect":
        """
        Construye el efecto factorizado c|v⟩⟨v| sin densificar.

        Args:
            weight: Peso c ≥ 0
            vector: Vector v (no necesariamente unitario)
            tolerances: Tolerancias numéricas

        Returns:
            Efecto de rango uno
        """
        amplitudes = np.array(vector, dtype=np.complex128).reshape(-1)
        weight = float(weight)
        if weight < 0.0 or not np.isfinite(weight):
            raise RejectedInputError(
                f"El peso de un efecto de rango uno debe ser no negativo, se recibió: {weight!r}",
                reason="negative_weight",
            )
        top = weight * float(np.real(np.vdot(amplitudes, amplitudes)))
        if top > 1.0 + tolerances.equality:
            raise RejectedInputError(
                f"El efecto de rango uno supera la identidad: c·⟨v,v⟩ = {top:.12g}",
                reason="exceeds_identity",
                details={"max_eigenvalue": top},
            )
        amplitudes.setflags(write=False)
        low = top if amplitudes.shape[0] == 1 else 0.0
        return cls(
            dim=int(amplitudes.shape[0]),
            hermiticity_defect=0.0,
            eigen_range=(low, top),
            weight=weight,
            vector=amplitudes,
        )

    @classmethod
    def zero(cls, dim: int) -> "Effect":
        return cls.rank_one(0.0, np.zeros(dim, dtype=np.complex128))

    @property
    def is_rank_one(self) -> bool:
        return self.vector is not None

    @cached_property
    def matrix(self) -> np.ndarray:
        """Matriz densa del efecto (se construye perezosamente para rango uno)."""
        if self.dense is not None:
            return self.dense
        dense = self.weight * np.outer(self.vector, self.vector.conj())
        dense.setflags(write=False)
        return dense

    @property
    def operator(self) -> Operator:
        return Operator(self.matrix)

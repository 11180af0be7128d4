"""
POVM discreto: asignación átomo → efecto sobre un espacio de resultados finito.

Los efectos de rango uno (construcciones covariantes) se almacenan
factorizados como pesos y vectores; los demás como una pila densa.
El efecto de un evento es la suma de los efectos de sus átomos en orden
ascendente de índice.
"""

from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
from scipy.linalg import eigvalsh

from config.settings import DEFAULT_TOLERANCES, Tolerances
from repository.operators.hilbert import Effect, HilbertSpace
from repository.operators.linalg import operator_norm, tree_sum
from repository.povm.outcome_space import EventSet, OutcomeSpace
from utils.exceptions import NormalizationDefectError, RejectedInputError
from utils.logger import get_logger

logger = get_logger(__name__)

EffectLike = Union[Effect, np.ndarray]


class DiscretePOVM:
    """
    POVM sobre un espacio de resultados discreto.

    El defecto de normalización ‖Σ_x F({x}) − 1‖ se calcula al construir y
    queda registrado; este tipo no rechaza defectos grandes por sí mismo
    (validate_povm los reporta), salvo que se indique un umbral.
    """

    def __init__(
        self,
        space: OutcomeSpace,
        dim: int,
        weights: Optional[np.ndarray] = None,
        vectors: Optional[np.ndarray] = None,
        dense: Optional[np.ndarray] = None,
        normalization_defect: Optional[float] = None,
        threshold: Optional[float] = None,
        label: str = "custom",
        metadata: Optional[Dict[str, Any]] = None,
        tolerances: Tolerances = DEFAULT_TOLERANCES,
    ):
        HilbertSpace(dim)
        if (dense is None) == (weights is None or vectors is None):
            raise RejectedInputError(
                "Se requiere exactamente una representación: factorizada (pesos, vectores) o densa",
                reason="invalid_representation",
            )
        self.space = space
        self.dim = int(dim)
        self.threshold = threshold
        self.label = label
        self.metadata = dict(metadata or {})
        self.tolerances = tolerances

        if dense is not None:
            if dense.shape != (space.size, dim, dim):
                raise RejectedInputError(
                    f"Pila de efectos con forma {dense.shape}, se esperaba {(space.size, dim, dim)}",
                    reason="dimension_mismatch",
                )
            self._dense: Optional[np.ndarray] = np.ascontiguousarray(dense, dtype=np.complex128)
            self._dense.setflags(write=False)
            self._weights: Optional[np.ndarray] = None
            self._vectors: Optional[np.ndarray] = None
        else:
            if weights.shape != (space.size,) or vectors.shape != (space.size, dim):
                raise RejectedInputError(
                    f"Pesos {weights.shape} / vectores {vectors.shape} incompatibles con "
                    f"{space.size} átomos y dimensión {dim}",
                    reason="dimension_mismatch",
                )
            self._weights = np.ascontiguousarray(weights, dtype=np.float64)
            self._vectors = np.ascontiguousarray(vectors, dtype=np.complex128)
            self._weights.setflags(write=False)
            self._vectors.setflags(write=False)
            self._dense = None

        self._effect_cache: Dict[int, Effect] = {}
        if normalization_defect is None:
            normalization_defect = operator_norm(self._sum_matrix(np.arange(space.size)) - np.eye(dim))
        self.normalization_defect = float(normalization_defect)

        if threshold is not None and self.normalization_defect > threshold:
            raise NormalizationDefectError(
                f"Defecto de normalización {self.normalization_defect:.3e} supera el umbral {threshold:.3e}",
                defect=self.normalization_defect,
                threshold=threshold,
            )

    # Constructores

    @classmethod
    def from_rank_one(
        cls,
        space: OutcomeSpace,
        weights: Sequence[float],
        vectors: np.ndarray,
        threshold: Optional[float] = None,
        label: str = "custom",
        metadata: Optional[Dict[str, Any]] = None,
        tolerances: Tolerances = DEFAULT_TOLERANCES,
    ) -> "DiscretePOVM":
        """
        Construye un POVM de átomos c_x|v_x⟩⟨v_x|.

        Raises:
            RejectedInputError: Si algún átomo no es un efecto
            NormalizationDefectError: Si se indica umbral y el defecto lo supera
        """
        weight_array = np.asarray(weights, dtype=np.float64).reshape(-1)
        vector_array = np.asarray(vectors, dtype=np.complex128)
        if vector_array.ndim != 2:
            raise RejectedInputError("Los vectores deben formar una matriz (átomos, d)", reason="dimension_mismatch")
        if np.any(weight_array < 0.0) or not np.all(np.isfinite(weight_array)):
            raise RejectedInputError("Los pesos de los átomos deben ser no negativos", reason="negative_weight")
        tops = weight_array * np.real(np.sum(vector_array.conj() * vector_array, axis=1))
        if tops.size and float(tops.max()) > 1.0 + tolerances.equality:
            worst = int(np.argmax(tops))
            raise RejectedInputError(
                f"El átomo {worst} supera la identidad: c·⟨v,v⟩ = {tops[worst]:.12g}",
                reason="exceeds_identity",
                details={"atom": worst, "max_eigenvalue": float(tops[worst])},
            )
        return cls(
            space,
            vector_array.shape[1],
            weights=weight_array,
            vectors=vector_array,
            threshold=threshold,
            label=label,
            metadata=metadata,
            tolerances=tolerances,
        )

    @classmethod
    def from_effects(
        cls,
        space: OutcomeSpace,
        effects: Sequence[EffectLike],
        threshold: Optional[float] = None,
        label: str = "custom",
        metadata: Optional[Dict[str, Any]] = None,
        tolerances: Tolerances = DEFAULT_TOLERANCES,
    ) -> "DiscretePOVM":
        """
        Construye un POVM a partir de un efecto por átomo.

        Si todos los efectos están factorizados se conserva la forma de rango uno.

        Raises:
            RejectedInputError: Si el número de efectos no coincide o alguno no es un efecto
            NormalizationDefectError: Si se indica umbral y el defecto lo supera
        """
        if len(effects) != space.size:
            raise RejectedInputError(
                f"Se recibieron {len(effects)} efectos para {space.size} átomos",
                reason="dimension_mismatch",
            )
        certified = [e if isinstance(e, Effect) else Effect.from_matrix(e, tolerances) for e in effects]
        dims = {e.dim for e in certified}
        if len(dims) != 1:
            raise RejectedInputError(f"Efectos de dimensiones distintas: {sorted(dims)}", reason="dimension_mismatch")
        dim = dims.pop()
        if all(e.is_rank_one for e in certified):
            return cls.from_rank_one(
                space,
                [e.weight for e in certified],
                np.stack([e.vector for e in certified]),
                threshold=threshold,
                label=label,
                metadata=metadata,
                tolerances=tolerances,
            )
        return cls(
            space,
            dim,
            dense=np.stack([e.matrix for e in certified]),
            threshold=threshold,
            label=label,
            metadata=metadata,
            tolerances=tolerances,
        )

    # Acceso

    @property
    def is_factored(self) -> bool:
        return self._dense is None

    @property
    def weights(self) -> Optional[np.ndarray]:
        return self._weights

    @property
    def vectors(self) -> Optional[np.ndarray]:
        return self._vectors

    @property
    def dense_stack(self) -> np.ndarray:
        """Pila (átomos, d, d) con la matriz de cada átomo."""
        if self._dense is not None:
            return self._dense
        return self._weights[:, None, None] * (self._vectors[:, :, None] * self._vectors.conj()[:, None, :])

    @property
    def atom_effects(self) -> Dict[int, Effect]:
        return {i: self.atom_effect(i) for i in range(self.space.size)}

    def atom_effect(self, index: int) -> Effect:
        """Efecto F({x}) del átomo indicado."""
        if not 0 <= index < self.space.size:
            raise RejectedInputError(
                f"Índice de átomo {index} fuera de rango [0, {self.space.size})",
                reason="index_out_of_range",
            )
        if index not in self._effect_cache:
            if self._dense is not None:
                effect = Effect.from_matrix(self._dense[index], self.tolerances, upper_slack=self.normalization_defect)
            else:
                effect = Effect.rank_one(self._weights[index], self._vectors[index], self.tolerances)
            self._effect_cache[index] = effect
        return self._effect_cache[index]

    def atom_norms(self) -> np.ndarray:
        """Norma espectral de cada átomo."""
        if self._dense is None:
            return self._weights * np.real(np.sum(self._vectors.conj() * self._vectors, axis=1))
        tops = [float(eigvalsh(0.5 * (m + m.conj().T), subset_by_index=[self.dim - 1, self.dim - 1])[0])
                for m in self._dense]
        return np.maximum(np.array(tops), 0.0)

    def _sum_matrix(self, indices: np.ndarray) -> np.ndarray:
        if indices.size == 0:
            return np.zeros((self.dim, self.dim), dtype=np.complex128)
        if self._dense is not None:
            return tree_sum(self._dense[indices])
        vectors = self._vectors[indices]
        return (vectors.T * self._weights[indices]) @ vectors.conj()

    def effect_matrix(self, event: EventSet) -> np.ndarray:
        """Matriz Σ_{x∈Δ} F({x}) sin certificar."""
        self._check_event(event)
        return self._sum_matrix(event.as_array())

    def effect_of(self, event: EventSet) -> Effect:
        """
        Efecto F(Δ) = Σ_{x∈Δ} F({x}).

        El evento vacío da el operador nulo; el evento total da la identidad
        dentro del defecto de normalización.

        Raises:
            RejectedInputError: Si el evento no pertenece al espacio del POVM
        """
        self._check_event(event)
        if len(event) == 0:
            return Effect.zero(self.dim)
        if len(event) == 1:
            return self.atom_effect(event.atom_indices[0])
        return Effect.from_matrix(
            self._sum_matrix(event.as_array()),
            self.tolerances,
            upper_slack=self.normalization_defect,
        )

    def total_effect(self) -> Effect:
        return self.effect_of(self.space.full_event())

    def _check_event(self, event: EventSet) -> None:
        if event.space_size != self.space.size:
            raise RejectedInputError(
                f"El evento pertenece a un espacio de {event.space_size} átomos, el POVM tiene {self.space.size}",
                reason="index_out_of_range",
            )

    def describe(self) -> Dict[str, Any]:
        return {
            "label": self.label,
            "dim": self.dim,
            "atoms": self.space.size,
            "space_kind": self.space.kind,
            "representation": "rank1" if self.is_factored else "dense",
            "normalization_defect": self.normalization_defect,
            "threshold": self.threshold,
            **self.metadata,
        }

    def __repr__(self) -> str:
        return (
            f"DiscretePOVM(label={self.label!r}, dim={self.dim}, atoms={self.space.size}, "
            f"defect={self.normalization_defect:.3e})"
        )


def sharp_position_pvm(dim: int, tolerances: Tolerances = DEFAULT_TOLERANCES) -> DiscretePOVM:
    """PVM de posición {|j⟩⟨j|} sobre d puntos con medida de conteo 1."""
    HilbertSpace(dim)
    return DiscretePOVM.from_rank_one(
        OutcomeSpace.points(dim, weight=1.0),
        np.ones(dim),
        np.eye(dim, dtype=np.complex128),
        threshold=tolerances.exact_normalization,
        label="pvm",
        metadata={"basis": "position"},
        tolerances=tolerances,
    )


def pvm_from_basis(
    basis: np.ndarray,
    label: str = "pvm",
    basis_name: str = "custom",
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> DiscretePOVM:
    """
    PVM {|b_k⟩⟨b_k|} de una base ortonormal dada por columnas.

    Raises:
        RejectedInputError: Si las columnas no son ortonormales
    """
    matrix = np.asarray(basis, dtype=np.complex128)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise RejectedInputError("La base debe ser una matriz cuadrada de columnas", reason="not_square")
    deviation = float(np.max(np.abs(matrix.conj().T @ matrix - np.eye(matrix.shape[0]))))
    if deviation > tolerances.equality:
        raise RejectedInputError(
            f"La base no es ortonormal (desviación {deviation:.3e})",
            reason="not_orthonormal",
        )
    dim = matrix.shape[0]
    return DiscretePOVM.from_rank_one(
        OutcomeSpace.points(dim, weight=1.0),
        np.ones(dim),
        matrix.T,
        threshold=tolerances.exact_normalization,
        label=label,
        metadata={"basis": basis_name},
        tolerances=tolerances,
    )


def uniform_povm(dim: int, count: int, tolerances: Tolerances = DEFAULT_TOLERANCES) -> DiscretePOVM:
    """POVM trivial {1/n, ..., 1/n} sobre n puntos."""
    effects: List[np.ndarray] = [np.eye(dim, dtype=np.complex128) / count for _ in range(count)]
    return DiscretePOVM.from_effects(
        OutcomeSpace.points(count, weight=1.0),
        effects,
        threshold=tolerances.exact_normalization,
        label="uniform",
        tolerances=tolerances,
    )

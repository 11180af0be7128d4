"""
Sistema de Weyl–Heisenberg finito y POVM covariante sobre ℤ_d × ℤ_d.

Convención de fase: D(q, p) = X^q Z^p, con X|j⟩ = |j+1⟩ y Z|j⟩ = ω^j|j⟩.
Los efectos no ven la fase, así que la covarianza de efectos es exacta.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Optional

import numpy as np

from config.settings import DEFAULT_TOLERANCES, Tolerances
from repository.covariant.fiducials import FiducialVector
from repository.operators.hilbert import HilbertSpace
from repository.povm.discrete_povm import DiscretePOVM
from repository.povm.outcome_space import OutcomeSpace
from utils.exceptions import RejectedInputError
from utils.logger import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class WeylSystem:
    """Operadores de traslación X y de reloj Z en dimensión d."""

    dim: int

    def __post_init__(self):
        HilbertSpace(self.dim)

    @property
    def omega(self) -> complex:
        return complex(np.exp(2j * np.pi / self.dim))

    def _phases(self, p: int) -> np.ndarray:
        # ω^{pj} con exponente reducido módulo d
        exponents = (p * np.arange(self.dim)) % self.dim
        return np.exp(2j * np.pi * exponents / self.dim)

    @cached_property
    def shift(self) -> np.ndarray:
        matrix = np.roll(np.eye(self.dim, dtype=np.complex128), 1, axis=0)
        matrix.setflags(write=False)
        return matrix

    @cached_property
    def clock(self) -> np.ndarray:
        matrix = np.diag(self._phases(1))
        matrix.setflags(write=False)
        return matrix

    def displacement(self, q: int, p: int) -> np.ndarray:
        """Matriz X^q Z^p."""
        return np.roll(np.diag(self._phases(p % self.dim)), q % self.dim, axis=0)

    def displace(self, q: int, p: int, vector: np.ndarray) -> np.ndarray:
        """Aplica X^q Z^p a un vector sin formar la matriz."""
        return np.roll(self._phases(p % self.dim) * vector, q % self.dim)

    def orbit(self, vector: np.ndarray) -> np.ndarray:
        """
        Órbita {D(q, p) η} ordenada por índice q·d + p.

        Returns:
            Arreglo (d², d)
        """
        d = self.dim
        exponents = np.outer(np.arange(d), np.arange(d)) % d
        phased = np.exp(2j * np.pi * exponents / d) * vector[None, :]
        return np.stack([np.roll(phased, q, axis=1) for q in range(d)]).reshape(d * d, d)

    def check_relations(self) -> Dict[str, float]:
        """Desviaciones de unitariedad y de la relación de Weyl ZX = ωXZ."""
        identity = np.eye(self.dim)
        x, z = self.shift, self.clock
        return {
            "shift_unitarity": float(np.max(np.abs(x.conj().T @ x - identity))),
            "clock_unitarity": float(np.max(np.abs(z.conj().T @ z - identity))),
            "weyl_relation": float(np.max(np.abs(z @ x - self.omega * (x @ z)))),
        }


def build_wh_povm(
    dim: int,
    fiducial: FiducialVector,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    threshold: Optional[float] = None,
) -> DiscretePOVM:
    """
    POVM covariante A({(q, p)}) = (1/d)|D(q,p)η⟩⟨D(q,p)η| sobre el retículo.

    La medida de cada punto es 1/d (μ(X) = d) y la resolución de la
    identidad es exacta por irreducibilidad.

    Args:
        dim: Dimensión d ≥ 2
        fiducial: Vector fiducial de dimensión d
        tolerances: Tolerancias numéricas
        threshold: Umbral de admisibilidad (por defecto normalización exacta)

    Returns:
        POVM factorizado de d² átomos

    Raises:
        RejectedInputError: Si d < 2 o la dimensión del fiducial no coincide
    """
    if dim < 2:
        raise RejectedInputError(f"La construcción de Weyl–Heisenberg requiere d ≥ 2, se recibió {dim}",
                                 reason="invalid_dimension")
    if fiducial.dim != dim:
        raise RejectedInputError(
            f"El fiducial tiene dimensión {fiducial.dim}, se esperaba {dim}",
            reason="dimension_mismatch",
        )
    system = WeylSystem(dim)
    povm = DiscretePOVM.from_rank_one(
        OutcomeSpace.lattice(dim),
        np.full(dim * dim, 1.0 / dim),
        system.orbit(np.asarray(fiducial.amplitudes)),
        threshold=tolerances.exact_normalization if threshold is None else threshold,
        label="wh",
        metadata={"d": dim, "fiducial": fiducial.name},
        tolerances=tolerances,
    )
    logger.info(
        f"POVM de Weyl–Heisenberg construido: d={dim}, fiducial={fiducial.name}, "
        f"defecto={povm.normalization_defect:.3e}",
        extra={"component": "covariant", "operation": "build_wh"},
    )
    return povm

"""
Marginales F^Q y F^P de un POVM de espacio de fase.

F^Q({q}) suma los átomos de la columna q; F^P({p}) los de la fila p.
Para construcciones de Weyl–Heisenberg las marginales son suavizados de
los PVM de posición y de Fourier con núcleos explícitos.
"""

from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np

from config.settings import DEFAULT_TOLERANCES, Tolerances
from repository.covariant.fiducials import FiducialVector
from repository.covariant.weyl import build_wh_povm
from repository.marginals.kernel import MarkovKernel
from repository.marginals.smearing import extract_kernel, fourier_basis, position_basis, smear_in_basis
from repository.operators.linalg import operator_norm
from repository.povm.discrete_povm import DiscretePOVM
from repository.povm.outcome_space import OutcomeSpace
from utils.exceptions import NonProductSpaceError, RejectedInputError
from utils.logger import get_logger

logger = get_logger(__name__)

AXES = ("q", "p")


def _marginal(povm: DiscretePOVM, axis: str) -> DiscretePOVM:
    if axis not in AXES:
        raise RejectedInputError(f"Eje no soportado: {axis}", reason="invalid_axis")
    space = povm.space
    if not space.is_product:
        raise NonProductSpaceError(space.kind)
    n_q, n_p = space.axis_sizes
    count = n_q if axis == "q" else n_p
    groups = [
        (space.column_event(k) if axis == "q" else space.row_event(k)).as_array()
        for k in range(count)
    ]
    weights = np.array([float(np.sum(space.weights[g])) for g in groups])

    if space.kind == "lattice":
        marginal_space = OutcomeSpace.points(count, weight=float(weights[0]))
    else:
        marginal_space = OutcomeSpace.line(space.origin[0 if axis == "q" else 1], space.step, count, float(weights[0]))

    stack = np.stack([povm.effect_matrix(space.event(g.tolist())) for g in groups])
    threshold = None if povm.threshold is None else povm.threshold + 1e-12
    return DiscretePOVM(
        marginal_space,
        povm.dim,
        dense=stack,
        threshold=threshold,
        label=f"{povm.label}-marginal-{axis}",
        metadata={**povm.metadata, "axis": axis, "parent_defect": povm.normalization_defect},
        tolerances=povm.tolerances,
    )


def marginal_q(povm: DiscretePOVM) -> DiscretePOVM:
    """
    Marginal de posición F^Q({q}) = Σ_p F({(q, p)}).

    Raises:
        NonProductSpaceError: Si el espacio no es un producto (q, p)
    """
    return _marginal(povm, "q")


def marginal_p(povm: DiscretePOVM) -> DiscretePOVM:
    """Marginal de momento F^P({p}) = Σ_q F({(q, p)})."""
    return _marginal(povm, "p")


def wh_marginal_kernel(fiducial: FiducialVector, axis: str = "q") -> MarkovKernel:
    """
    Núcleo de la marginal de WH(d, η).

    Posición: ω[x][q] = |η_{x−q}|². Momento: ν[k][p] = |η̂_{k−p}|² con
    η̂_k = ⟨f_k|η⟩ en la base de Fourier.
    """
    if axis not in AXES:
        raise RejectedInputError(f"Eje no soportado: {axis}", reason="invalid_axis")
    amplitudes = np.asarray(fiducial.amplitudes)
    d = amplitudes.shape[0]
    if axis == "q":
        profile = np.abs(amplitudes) ** 2
        name = "position"
    else:
        profile = np.abs(np.fft.fft(amplitudes) / np.sqrt(d)) ** 2
        name = "momentum"
    x, k = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    return MarkovKernel(profile[(x - k) % d], name=name)


@dataclass
class KernelIdentityCheck:
    """Comparación entre la marginal de WH y el PVM suavizado con su núcleo."""

    axis: str
    max_deviation: float
    spectral_deviation: float
    tolerance: float
    extraction_row_deviation: Optional[float]
    passed: bool
    kernel: Optional[MarkovKernel] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "axis": self.axis,
            "max_deviation": self.max_deviation,
            "spectral_deviation": self.spectral_deviation,
            "tolerance": self.tolerance,
            "extraction_row_deviation": self.extraction_row_deviation,
            "passed": self.passed,
        }


def marginal_kernel_identity_check(
    dim: int,
    fiducial: FiducialVector,
    axis: str = "q",
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> KernelIdentityCheck:
    """
    Construye por separado la marginal de A^η y el PVM suavizado con el
    núcleo explícito, y compara entrada a entrada.

    Returns:
        Desviación máxima entrada a entrada (criterio) y espectral (informativa)
    """
    povm = build_wh_povm(dim, fiducial, tolerances)
    marginal = marginal_q(povm) if axis == "q" else marginal_p(povm)
    kernel = wh_marginal_kernel(fiducial, axis)
    smeared = smear_in_basis("position" if axis == "q" else "fourier", kernel, tolerances=tolerances)

    difference = marginal.dense_stack - smeared.povm.dense_stack
    entrywise = float(np.max(np.abs(difference)))
    spectral = max(operator_norm(m) for m in difference)

    basis = position_basis(dim) if axis == "q" else fourier_basis(dim)
    extraction = extract_kernel(marginal, basis, name=kernel.name, tolerances=tolerances)
    passed = entrywise <= tolerances.equality and extraction.passed
    logger.info(
        f"Identidad marginal/núcleo d={dim}, eje {axis}: desviación {entrywise:.3e}",
        extra={"component": "marginals", "operation": "kernel_identity"},
    )
    return KernelIdentityCheck(
        axis=axis,
        max_deviation=entrywise,
        spectral_deviation=spectral,
        tolerance=tolerances.equality,
        extraction_row_deviation=extraction.row_sum_deviation,
        passed=passed,
        kernel=extraction.kernel,
    )

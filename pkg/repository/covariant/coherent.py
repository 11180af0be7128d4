"""
POVM de estados coherentes sobre una rejilla de fase truncada.

Cada celda de lado h centrada en α aporta (h²/π)|D(α)η⟩⟨D(α)η| (regla
del punto medio). Los vectores desplazados se obtienen de la forma
cerrada de los elementos de matriz ⟨m|D(α)|n⟩ con polinomios de Laguerre
generalizados, truncados a la dimensión de Fock N.
"""

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

from config.settings import DEFAULT_TOLERANCES, MAX_HILBERT_DIM, Tolerances
from repository.covariant.fiducials import FiducialVector, build_fiducial
from repository.povm.discrete_povm import DiscretePOVM
from repository.povm.outcome_space import OutcomeSpace
from utils.exceptions import NormalizationDefectError, RejectedInputError, TruncationInadequateError
from utils.logger import get_logger

logger = get_logger(__name__)

TRUNCATION_MODES = ("renormalize", "project")


@dataclass(frozen=True)
class CoherentGrid:
    """
    Rejilla de celdas cuadradas de lado h que tesela [−L, L]².

    2L/h debe ser entero para que las celdas teselen la ventana y para
    que reducir h a la mitad produzca una rejilla anidada.
    """

    fock_dim: int
    half_width: float
    cell_size: float

    def __post_init__(self):
        if not 2 <= self.fock_dim <= MAX_HILBERT_DIM:
            raise RejectedInputError(
                f"La dimensión de Fock debe estar en [2, {MAX_HILBERT_DIM}], se recibió {self.fock_dim}",
                reason="invalid_dimension",
            )
        if not self.half_width > 0.0:
            raise RejectedInputError("La semianchura L debe ser positiva", reason="invalid_grid")
        if not 0.0 < self.cell_size <= self.half_width:
            raise RejectedInputError("El lado de celda debe cumplir 0 < h ≤ L", reason="invalid_grid")
        ratio = 2.0 * self.half_width / self.cell_size
        if abs(ratio - round(ratio)) > 1e-9:
            raise RejectedInputError(
                f"2L/h = {ratio:.12g} no es entero; las celdas no teselan la ventana",
                reason="invalid_grid",
            )

    @property
    def cells_per_axis(self) -> int:
        return int(round(2.0 * self.half_width / self.cell_size))

    @property
    def cell_weight(self) -> float:
        """Medida μ(celda) = h²/π."""
        return self.cell_size ** 2 / math.pi

    def space(self) -> OutcomeSpace:
        return OutcomeSpace.grid(self.half_width, self.cell_size)

    def centers(self) -> np.ndarray:
        """Centros α = x + iy en el orden de átomos del espacio."""
        coords = self.space().coords
        return coords[:, 0] + 1j * coords[:, 1]

    def halved(self) -> "CoherentGrid":
        return CoherentGrid(self.fock_dim, self.half_width, self.cell_size / 2.0)

    def to_dict(self):
        return {"N": self.fock_dim, "L": self.half_width, "h": self.cell_size}


def displacement_element(m: int, n: int, alphas: np.ndarray) -> np.ndarray:
    """
    Elemento ⟨m|D(α)|n⟩ para un arreglo de α.

    m ≥ n: √(n!/m!) α^{m−n} e^{−|α|²/2} L_n^{(m−n)}(|α|²)
    m < n: √(m!/n!) (−ᾱ)^{n−m} e^{−|α|²/2} L_m^{(n−m)}(|α|²)
    """
    r2 = np.abs(alphas) ** 2
    low, high = min(m, n), max(m, n)
    prefactor = np.exp(0.5 * (gammaln(low + 1.0) - gammaln(high + 1.0)) - 0.5 * r2)
    base = alphas if m >= n else -np.conj(alphas)
    return prefactor * base ** (high - low) * eval_genlaguerre(low, high - low, r2)


def displaced_fiducials(alphas: np.ndarray, fiducial: np.ndarray, fock_dim: int) -> np.ndarray:
    """
    Vectores P_N D(α) η para cada α (sin renormalizar).

    Returns:
        Arreglo (len(alphas), N)
    """
    alphas = np.asarray(alphas, dtype=np.complex128).reshape(-1)
    vectors = np.zeros((alphas.shape[0], fock_dim), dtype=np.complex128)
    support = np.flatnonzero(np.abs(fiducial) > 0.0)
    for m in range(fock_dim):
        for n in support:
            vectors[:, m] += displacement_element(m, int(n), alphas) * fiducial[n]
    return vectors


def suggest_truncation(grid: CoherentGrid, truncation: str) -> Tuple[Optional[float], Optional[int]]:
    """
    Sugiere una semianchura L o una dimensión N mayores.

    En modo renormalize la traza de la construcción es exactamente 4L²/π,
    por lo que se busca 4L²/π ≈ N; en modo project se ensancha la ventana
    más allá de la bola de Fock ocupada.
    """
    step = grid.cell_size / 2.0
    if truncation == "renormalize":
        target = math.sqrt(math.pi * grid.fock_dim) / 2.0
        suggested_l = max(step, math.ceil(target / step - 1e-9) * step)
        suggested_n = int(min(MAX_HILBERT_DIM, max(2, round(4.0 * grid.half_width ** 2 / math.pi))))
        return suggested_l, suggested_n
    target = max(1.5 * grid.half_width, math.sqrt(grid.fock_dim) + 4.0)
    return math.ceil(target / step - 1e-9) * step, None


def build_coherent_povm(
    grid: CoherentGrid,
    fiducial: Optional[FiducialVector] = None,
    truncation: str = "renormalize",
    threshold: Optional[float] = None,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> DiscretePOVM:
    """
    Construye el POVM de estados coherentes discretizado.

    Args:
        grid: Rejilla (N, L, h)
        fiducial: Fiducial en la base de Fock (por defecto el vacío)
        truncation: "renormalize" (estados truncados y renormalizados) o
            "project" (P_N D(α)η sin renormalizar)
        threshold: Umbral del defecto (por defecto la tolerancia truncada)
        tolerances: Tolerancias numéricas

    Returns:
        POVM factorizado con el defecto de normalización registrado

    Raises:
        TruncationInadequateError: Si el defecto supera el umbral
    """
    if truncation not in TRUNCATION_MODES:
        raise RejectedInputError(
            f"Modo de truncación no soportado: {truncation}. Soportados: {', '.join(TRUNCATION_MODES)}",
            reason="invalid_truncation",
        )
    if fiducial is None:
        fiducial = build_fiducial({"label": "vacuum"}, grid.fock_dim, basis="fock")
    if fiducial.dim != grid.fock_dim:
        raise RejectedInputError(
            f"El fiducial tiene dimensión {fiducial.dim}, la rejilla usa N = {grid.fock_dim}",
            reason="dimension_mismatch",
        )
    limit = tolerances.truncated_normalization if threshold is None else threshold

    space = grid.space()
    vectors = displaced_fiducials(grid.centers(), np.asarray(fiducial.amplitudes), grid.fock_dim)
    retained = np.real(np.sum(vectors.conj() * vectors, axis=1))
    dropped = 0
    if truncation == "renormalize":
        keep = retained >= tolerances.coherent_drop_weight
        dropped = int(np.count_nonzero(~keep))
        scale = np.where(keep, 1.0 / np.sqrt(np.where(keep, retained, 1.0)), 0.0)
        vectors = vectors * scale[:, None]

    try:
        povm = DiscretePOVM.from_rank_one(
            space,
            np.full(space.size, grid.cell_weight),
            vectors,
            threshold=limit,
            label="coherent",
            metadata={
                **grid.to_dict(),
                "truncation": truncation,
                "fiducial": fiducial.name,
                "dropped_cells": dropped,
                "min_retained_weight": float(retained.min()),
            },
            tolerances=tolerances,
        )
    except NormalizationDefectError as e:
        suggested_l, suggested_n = suggest_truncation(grid, truncation)
        logger.warning(
            f"Truncación inadecuada (N={grid.fock_dim}, L={grid.half_width}, h={grid.cell_size}): "
            f"defecto {e.defect:.3e} > {limit:.3e}",
            extra={"component": "covariant", "operation": "build_coherent"},
        )
        raise TruncationInadequateError(
            e.defect,
            limit,
            suggested_half_width=suggested_l,
            suggested_fock_dim=suggested_n,
        )

    logger.info(
        f"POVM coherente construido: N={grid.fock_dim}, L={grid.half_width}, h={grid.cell_size}, "
        f"{space.size} celdas, defecto={povm.normalization_defect:.3e}",
        extra={"component": "covariant", "operation": "build_coherent"},
    )
    return povm

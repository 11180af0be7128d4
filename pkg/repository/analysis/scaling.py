"""
Ley de escala de la norma de celda frente a la medida de celda.
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from config.settings import SCALING_SLOPE_RANGE
from repository.povm.discrete_povm import DiscretePOVM
from utils.exceptions import InsufficientLevelsError, RejectedInputError
from utils.logger import get_logger

logger = get_logger(__name__)

MIN_LEVELS = 2
RECOMMENDED_LEVELS = 4


@dataclass
class ScalingFit:
    """Ajuste log‖A(celda)‖ = pendiente·log μ(celda) + intercepto."""

    levels: List[Dict[str, Any]]
    slope: float
    intercept: float
    slope_range: Sequence[float]

    @property
    def in_range(self) -> bool:
        low, high = self.slope_range
        return low <= self.slope <= high

    def to_dict(self) -> Dict[str, Any]:
        return {
            "levels": self.levels,
            "slope": self.slope,
            "intercept": self.intercept,
            "slope_range": list(self.slope_range),
            "in_range": self.in_range,
        }


def cell_shrink_scaling(
    povms: Sequence[DiscretePOVM],
    point: Optional[Sequence[float]] = None,
) -> ScalingFit:
    """
    Ajuste por mínimos cuadrados sobre la peor celda de cada nivel.

    Args:
        povms: Familia de POVMs coherentes con h decreciente
        point: Si se indica, se sigue la celda que contiene este punto en
            lugar de la peor celda

    Returns:
        Pendiente e intercepto del ajuste log-log

    Raises:
        InsufficientLevelsError: Con menos de dos niveles
    """
    if len(povms) < MIN_LEVELS:
        raise InsufficientLevelsError(len(povms), MIN_LEVELS)
    if len(povms) < RECOMMENDED_LEVELS:
        logger.warning(
            f"Solo {len(povms)} niveles de rejilla; se recomiendan al menos {RECOMMENDED_LEVELS}",
            extra={"component": "analysis", "operation": "scaling"},
        )

    levels = []
    for povm in povms:
        norms = povm.atom_norms()
        if point is None:
            cell = int(np.argmax(norms))
        else:
            located = povm.space.locate(point)
            if located is None:
                raise RejectedInputError(f"El punto {tuple(point)} está fuera de la rejilla", reason="out_of_grid")
            cell = located
        if norms[cell] <= 0.0:
            raise RejectedInputError(f"La celda {cell} tiene efecto nulo; no hay escala logarítmica",
                                     reason="zero_cell")
        levels.append({
            "cell_size": povm.space.step,
            "cell_measure": float(povm.space.weights[cell]),
            "cell": cell,
            "cell_norm": float(norms[cell]),
        })

    x = np.log([lvl["cell_measure"] for lvl in levels])
    y = np.log([lvl["cell_norm"] for lvl in levels])
    slope, intercept = np.polyfit(x, y, 1)
    fit = ScalingFit(levels=levels, slope=float(slope), intercept=float(intercept), slope_range=SCALING_SLOPE_RANGE)
    logger.info(
        f"Escala de celda: pendiente {fit.slope:.6f} sobre {len(levels)} niveles",
        extra={"component": "analysis", "operation": "scaling"},
    )
    return fit

"""
Núcleos de Markov ω[x][átomo] y su persistencia en CSV.
"""

from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd

from config.settings import (
    CSV_DELIMITER,
    CSV_LINE_TERMINATOR,
    DEFAULT_TOLERANCES,
    FLOAT_FORMAT,
    Tolerances,
)
from repository.povm.outcome_space import EventSet
from utils.exceptions import ArtifactError, KernelError
from utils.logger import get_logger

logger = get_logger(__name__)


class MarkovKernel:
    """
    Núcleo de Markov denso: filas = puntos espectrales x, columnas = átomos.

    Cada fila es una medida de probabilidad sobre los átomos.
    """

    def __init__(self, matrix: np.ndarray, name: str = "kernel", tolerances: Tolerances = DEFAULT_TOLERANCES):
        values = np.array(matrix, dtype=np.float64)
        if values.ndim != 2 or values.size == 0:
            raise KernelError(f"El núcleo debe ser una matriz no vacía, forma recibida: {values.shape}")
        if not np.all(np.isfinite(values)):
            raise KernelError("El núcleo contiene valores no finitos")
        low = float(values.min())
        high = float(values.max())
        if low < -tolerances.kernel_row or high > 1.0 + tolerances.kernel_row:
            raise KernelError(f"Entradas del núcleo fuera de [0, 1]: rango [{low:.3e}, {high:.3e}]")
        deviations = np.abs(values.sum(axis=1) - 1.0)
        worst = int(np.argmax(deviations))
        if deviations[worst] > tolerances.kernel_row:
            raise KernelError(
                f"La fila {worst} del núcleo suma {values[worst].sum()!r}, no 1",
                row=worst,
            )
        values = values + 0.0
        values.setflags(write=False)
        self.matrix = values
        self.name = name
        self.row_sum_deviation = float(deviations[worst])

    @classmethod
    def identity(cls, size: int, name: str = "identity") -> "MarkovKernel":
        return cls(np.eye(size), name=name)

    @classmethod
    def uniform(cls, rows: int, cols: int, name: str = "uniform") -> "MarkovKernel":
        return cls(np.full((rows, cols), 1.0 / cols), name=name)

    @property
    def rows(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def cols(self) -> int:
        return int(self.matrix.shape[1])

    def event_weights(self, event: EventSet) -> np.ndarray:
        """ω_Δ(x) para todos los puntos x."""
        if event.space_size != self.cols:
            raise KernelError(f"El evento tiene {event.space_size} átomos; el núcleo {self.cols}")
        if len(event) == 0:
            return np.zeros(self.rows)
        return self.matrix[:, event.as_array()].sum(axis=1)

    def omega(self, event: EventSet, point: int) -> float:
        """ω_Δ(x) para un punto espectral."""
        if not 0 <= point < self.rows:
            raise KernelError(f"Punto espectral {point} fuera de rango [0, {self.rows})", row=point)
        return float(self.event_weights(event)[point])

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame(self.matrix, columns=[str(a) for a in range(self.cols)])

    def save_csv(self, path: Union[str, Path]) -> Path:
        """
        Escribe el núcleo como CSV: cabecera con los índices de átomo y una
        fila por punto espectral, 17 cifras significativas.
        """
        target = Path(path)
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
            self.to_dataframe().to_csv(
                target,
                sep=CSV_DELIMITER,
                float_format=FLOAT_FORMAT,
                lineterminator=CSV_LINE_TERMINATOR,
                index=False,
                encoding="utf-8",
            )
        except OSError as e:
            raise ArtifactError(f"No se pudo escribir el núcleo: {e}", file_path=str(target))
        logger.info(
            f"Núcleo {self.name} ({self.rows}×{self.cols}) guardado en {target}",
            extra={"component": "marginals", "operation": "save_kernel"},
        )
        return target

    @classmethod
    def load_csv(
        cls,
        path: Union[str, Path],
        name: Optional[str] = None,
        tolerances: Tolerances = DEFAULT_TOLERANCES,
    ) -> "MarkovKernel":
        """Lee un núcleo escrito por save_csv."""
        source = Path(path)
        try:
            frame = pd.read_csv(source, sep=CSV_DELIMITER, dtype=np.float64, float_precision="round_trip")
        except (OSError, ValueError, pd.errors.ParserError) as e:
            raise ArtifactError(f"No se pudo leer el núcleo: {e}", file_path=str(source))
        return cls(frame.to_numpy(), name=name or source.stem, tolerances=tolerances)

    def __repr__(self) -> str:
        return f"MarkovKernel(name={self.name!r}, shape=({self.rows}, {self.cols}))"

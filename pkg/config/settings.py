"""
Configuración centralizada para NormOne Toolkit.

Este módulo contiene todas las configuraciones del proyecto,
incluyendo constantes, tolerancias numéricas y límites de análisis.
"""

import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple

# Configuración de la aplicación
APP_NAME = "NormOne Toolkit"
APP_VERSION = "1.0.0"
APP_DESCRIPTION = (
    "Herramientas numéricas para POVMs de localización covariante "
    "y verificación de la propiedad de norma 1"
)

# Versión del esquema de configuración de experimentos
CONFIG_SCHEMA_VERSION = 1

# Configuración de salida
OUTPUT_DIR = Path(os.getenv("NORMONE_OUTPUT_DIR", "normone-output"))
FLOAT_FORMAT = "%.17g"
CSV_DELIMITER = ","
CSV_LINE_TERMINATOR = "\n"

# Configuración de logging
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - [%(component)s:%(operation)s] - %(message)s"

# Límites de análisis
EXHAUSTIVE_EVENT_LIMIT = 12
RANDOM_EVENT_COUNT = 200
EXHAUSTIVE_SHIFT_LIMIT = 8
RANDOM_SHIFT_COUNT = 50
STATE_EXPORT_LIMIT = 256
MAX_HILBERT_DIM = 256

# Rango admitido para fiduciales gaussianos (compresión de cuadraturas)
GAUSSIAN_WIDTH_RANGE: Tuple[float, float] = (0.25, 4.0)

# Rango esperado de la pendiente log-log norma vs. medida de celda
SCALING_SLOPE_RANGE: Tuple[float, float] = (0.9, 1.1)


@dataclass(frozen=True)
class Tolerances:
    """Tolerancias absolutas usadas por todas las operaciones numéricas."""

    hermiticity: float = 1e-10
    positivity: float = 1e-10
    equality: float = 1e-10
    support: float = 1e-12
    exact_normalization: float = 1e-8
    truncated_normalization: float = 1e-3
    kernel_row: float = 1e-10
    diagonal: float = 1e-10
    coherent_drop_weight: float = 1e-12

    def with_overrides(self, overrides: Mapping[str, Any]) -> "Tolerances":
        """
        Retorna una copia con los valores indicados reemplazados.

        Args:
            overrides: Mapa nombre -> valor

        Returns:
            Nueva instancia de tolerancias

        Raises:
            ConfigurationError: Si alguna clave no existe o el valor no es válido
        """
        from utils.exceptions import ConfigurationError

        known = {f.name for f in fields(self)}
        values: Dict[str, float] = {}
        for key, value in overrides.items():
            if key not in known:
                raise ConfigurationError(
                    f"Tolerancia desconocida: '{key}'. Disponibles: {', '.join(sorted(known))}",
                    config_key=key,
                )
            try:
                number = float(value)
            except (TypeError, ValueError):
                raise ConfigurationError(
                    f"Valor no numérico para la tolerancia '{key}': {value!r}",
                    config_key=key,
                )
            if not number >= 0.0:
                raise ConfigurationError(
                    f"La tolerancia '{key}' debe ser no negativa", config_key=key
                )
            values[key] = number
        return replace(self, **values)

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


DEFAULT_TOLERANCES = Tolerances()


def get_tolerances(overrides: Optional[Mapping[str, Any]] = None) -> Tolerances:
    """Obtiene las tolerancias por defecto con sobrescrituras opcionales."""
    if not overrides:
        return DEFAULT_TOLERANCES
    return DEFAULT_TOLERANCES.with_overrides(overrides)


def ensure_output_dir(path: Optional[Path] = None) -> Path:
    """Asegura que el directorio de salida existe."""
    target = Path(path) if path is not None else OUTPUT_DIR
    target.mkdir(parents=True, exist_ok=True)
    return target

"""
Excepciones personalizadas para NormOne Toolkit.

Define excepciones específicas para los distintos tipos de errores
que pueden ocurrir al construir y analizar POVMs. Las verificaciones
que fallan no son excepciones: se reportan como entradas de informe.
"""

from typing import Any, Dict, List, Optional


class NormOneException(Exception):
    """Excepción base para todas las excepciones del toolkit."""

    def __init__(self, message: str, error_code: Optional[str] = None, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.error_code = error_code
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        """Convierte la excepción a un diccionario para informes JSON."""
        return {
            "error": True,
            "message": self.message,
            "error_code": self.error_code,
            "details": self.details
        }


class RejectedInputError(NormOneException):
    """Entrada rechazada: no hermítica, dimensiones incompatibles o índices fuera de rango."""

    def __init__(self, message: str, reason: str, **kwargs):
        super().__init__(message, error_code="REJECTED_INPUT", **kwargs)
        self.reason = reason
        self.details["reason"] = reason


class NoMaximizerError(NormOneException):
    """El operador es nulo y no existe vector maximizante."""

    def __init__(self, message: str, **kwargs):
        super().__init__(message, error_code="NO_MAXIMIZER", **kwargs)


class NormalizationDefectError(NormOneException):
    """El defecto de normalización supera el umbral de admisibilidad."""

    def __init__(
        self,
        message: str,
        defect: float,
        threshold: float,
        error_code: str = "NORMALIZATION_DEFECT",
        **kwargs,
    ):
        super().__init__(message, error_code=error_code, **kwargs)
        self.defect = defect
        self.threshold = threshold
        self.details.update({
            "defect": defect,
            "threshold": threshold
        })


class TruncationInadequateError(NormalizationDefectError):
    """La truncación de Fock o la ventana de fase no alcanzan el umbral pedido."""

    def __init__(self, defect: float, threshold: float, suggested_half_width: Optional[float] = None,
                 suggested_fock_dim: Optional[int] = None):
        message = (
            f"Truncación inadecuada: defecto {defect:.3e} supera el umbral {threshold:.3e}"
        )
        super().__init__(message, defect=defect, threshold=threshold, error_code="TRUNCATION_INADEQUATE")
        self.suggested_half_width = suggested_half_width
        self.suggested_fock_dim = suggested_fock_dim
        self.details.update({
            "suggested_half_width": suggested_half_width,
            "suggested_fock_dim": suggested_fock_dim
        })


class KernelError(NormOneException):
    """Núcleo de Markov inválido o base no proyectiva."""

    def __init__(self, message: str, row: Optional[int] = None, **kwargs):
        super().__init__(message, error_code="KERNEL_ERROR", **kwargs)
        self.row = row
        if row is not None:
            self.details["row"] = row


class NonProductSpaceError(NormOneException):
    """La operación requiere un espacio de resultados producto (q, p)."""

    def __init__(self, space_kind: str):
        message = f"Se requiere un espacio producto; se recibió un espacio de tipo '{space_kind}'"
        super().__init__(message, error_code="NON_PRODUCT_SPACE")
        self.space_kind = space_kind
        self.details["space_kind"] = space_kind


class InvalidRefinementError(NormOneException):
    """La sucesión de eventos no está anidada como indica su dirección."""

    def __init__(self, message: str, step: Optional[int] = None, **kwargs):
        super().__init__(message, error_code="INVALID_REFINEMENT", **kwargs)
        self.step = step
        if step is not None:
            self.details["step"] = step


class InsufficientLevelsError(NormOneException):
    """No hay suficientes niveles de rejilla para ajustar una ley de escala."""

    def __init__(self, levels: int, required: int):
        message = f"Se requieren al menos {required} niveles; se recibieron {levels}"
        super().__init__(message, error_code="INSUFFICIENT_LEVELS")
        self.details.update({
            "levels": levels,
            "required": required
        })


class ConfigurationError(NormOneException):
    """Error de configuración."""

    def __init__(self, message: str, config_key: Optional[str] = None, line: Optional[int] = None,
                 column: Optional[int] = None, diagnostics: Optional[List[Dict[str, Any]]] = None, **kwargs):
        super().__init__(message, error_code="CONFIGURATION_ERROR", **kwargs)
        self.config_key = config_key
        if config_key:
            self.details["config_key"] = config_key
        if line is not None:
            self.details["line"] = line
        if column is not None:
            self.details["column"] = column
        if diagnostics:
            self.details["diagnostics"] = diagnostics


class ArtifactError(NormOneException):
    """Error al escribir, leer o verificar un artefacto."""

    def __init__(self, message: str, file_path: Optional[str] = None, **kwargs):
        super().__init__(message, error_code="ARTIFACT_ERROR", **kwargs)
        self.file_path = file_path
        if file_path:
            self.details["file_path"] = file_path


class SelectionMismatchError(NormOneException):
    """Los informes comparados no corresponden a la misma selección de análisis."""

    def __init__(self, selection_a: Dict[str, Any], selection_b: Dict[str, Any]):
        message = "Las selecciones de los informes no coinciden"
        super().__init__(message, error_code="SELECTION_MISMATCH")
        self.details.update({
            "selection_a": selection_a,
            "selection_b": selection_b
        })


def handle_exception(func):
    """Decorador para manejo centralizado de excepciones."""
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except NormOneException:
            # Re-lanzar excepciones personalizadas sin modificar
            raise
        except Exception as e:
            # Convertir excepciones genéricas a NormOneException
            raise NormOneException(
                message=f"Error inesperado: {str(e)}",
                error_code="UNEXPECTED_ERROR",
                details={"original_error": str(e), "error_type": type(e).__name__}
            )
    wrapper.__name__ = func.__name__
    wrapper.__doc__ = func.__doc__
    return wrapper

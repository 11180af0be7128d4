"""
Vectores fiduciales η para las construcciones covariantes.

Etiquetas soportadas: basis(j), vacuum, uniform, gaussian(width),
random y custom. En la base de Fock el fiducial gaussiano es un vacío
comprimido; en el retículo ℤ_d es una gaussiana discreta centrada.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional

import numpy as np
from scipy.special import gammaln

from config.settings import GAUSSIAN_WIDTH_RANGE
from repository.operators.hilbert import HilbertSpace, StateVector
from utils.exceptions import RejectedInputError

FIDUCIAL_LABELS = ("basis", "vacuum", "uniform", "gaussian", "random", "custom")
FIDUCIAL_BASES = ("lattice", "fock")


@dataclass(frozen=True, eq=False)
class FiducialVector:
    """Vector fiducial unitario con su etiqueta y parámetros."""

    state: StateVector
    label: str
    params: Dict[str, Any] = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.state.dim

    @property
    def amplitudes(self) -> np.ndarray:
        return self.state.amplitudes

    @property
    def name(self) -> str:
        if self.label == "basis":
            return f"basis({self.params.get('index', 0)})"
        if self.label == "gaussian":
            return f"gaussian({self.params.get('width', 1.0):g})"
        return self.label

    def to_dict(self) -> Dict[str, Any]:
        return {"label": self.label, **self.params}


def _check_width(width: float) -> float:
    low, high = GAUSSIAN_WIDTH_RANGE
    if not low <= width <= high:
        raise RejectedInputError(
            f"Ancho gaussiano {width!r} fuera del rango admitido [{low}, {high}]",
            reason="invalid_width",
        )
    return float(width)


def lattice_gaussian(dim: int, width: float = 1.0) -> np.ndarray:
    """Gaussiana discreta η_j ∝ exp(−(j − (d−1)/2)² / 2w²)."""
    center = 0.5 * (dim - 1)
    j = np.arange(dim, dtype=np.float64)
    return np.exp(-((j - center) ** 2) / (2.0 * width ** 2)).astype(np.complex128)


def squeezed_vacuum(fock_dim: int, width: float = 1.0) -> np.ndarray:
    """
    Vacío comprimido truncado: r = −ln w.

    c_{2k} = (−tanh r)^k √((2k)!) / (2^k k! √cosh r); los coeficientes
    impares son nulos. Se calcula en escala logarítmica.
    """
    squeeze = -math.log(width)
    amplitudes = np.zeros(fock_dim, dtype=np.complex128)
    if squeeze == 0.0:
        amplitudes[0] = 1.0
        return amplitudes
    k = np.arange((fock_dim + 1) // 2, dtype=np.float64)
    ratio = math.tanh(squeeze)
    log_magnitude = (
        0.5 * gammaln(2.0 * k + 1.0)
        - k * math.log(2.0)
        - gammaln(k + 1.0)
        + k * math.log(abs(ratio))
        - 0.5 * math.log(math.cosh(squeeze))
    )
    amplitudes[0::2] = np.exp(log_magnitude) * np.sign(-ratio) ** k
    return amplitudes


def build_fiducial(
    spec: Mapping[str, Any],
    dim: int,
    basis: str = "lattice",
    rng: Optional[np.random.Generator] = None,
) -> FiducialVector:
    """
    Construye un fiducial a partir de su descripción de configuración.

    Args:
        spec: {"label": ..., parámetros}
        dim: Dimensión del espacio (d del retículo o N de Fock)
        basis: "lattice" o "fock"
        rng: Generador aleatorio (obligatorio para "random")

    Returns:
        Fiducial unitario

    Raises:
        RejectedInputError: Si la etiqueta o los parámetros no son válidos
    """
    HilbertSpace(dim)
    if basis not in FIDUCIAL_BASES:
        raise RejectedInputError(f"Base de fiducial no soportada: {basis}", reason="invalid_fiducial")
    label = spec.get("label", "vacuum" if basis == "fock" else "basis")
    params: Dict[str, Any] = {}

    if label == "basis":
        index = int(spec.get("index", 0))
        params["index"] = index
        amplitudes = HilbertSpace(dim).basis_vector(index).amplitudes
    elif label == "vacuum":
        amplitudes = HilbertSpace(dim).basis_vector(0).amplitudes
    elif label == "uniform":
        amplitudes = np.ones(dim, dtype=np.complex128)
    elif label == "gaussian":
        width = _check_width(float(spec.get("width", 1.0)))
        params["width"] = width
        amplitudes = squeezed_vacuum(dim, width) if basis == "fock" else lattice_gaussian(dim, width)
    elif label == "random":
        if rng is None:
            raise RejectedInputError(
                "El fiducial aleatorio requiere una semilla",
                reason="seed_required",
            )
        amplitudes = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    elif label == "custom":
        raw = spec.get("amplitudes")
        if raw is None:
            raise RejectedInputError("El fiducial custom requiere 'amplitudes'", reason="invalid_fiducial")
        if len(raw) == 0:
            raise RejectedInputError(
                f"El fiducial custom no tiene componentes; se esperaban {dim}",
                reason="dimension_mismatch",
            )
        values = np.asarray(raw, dtype=np.float64 if _all_pairs(raw) else np.complex128)
        amplitudes = values[:, 0] + 1j * values[:, 1] if _all_pairs(raw) else values
        if amplitudes.shape != (dim,):
            raise RejectedInputError(
                f"El fiducial tiene {amplitudes.shape[0]} componentes; se esperaban {dim}",
                reason="dimension_mismatch",
            )
        params["amplitudes"] = [[float(z.real), float(z.imag)] for z in amplitudes]
    else:
        raise RejectedInputError(
            f"Etiqueta de fiducial no soportada: {label}. Soportadas: {', '.join(FIDUCIAL_LABELS)}",
            reason="invalid_fiducial",
        )

    state = StateVector.from_amplitudes(amplitudes)
    return FiducialVector(state=state, label=label, params=params)


def _all_pairs(raw: Any) -> bool:
    return all(isinstance(item, (list, tuple)) and len(item) == 2 for item in raw)


def fiducial_from_amplitudes(amplitudes: Any, label: str = "custom") -> FiducialVector:
    """Fiducial custom a partir de amplitudes complejas."""
    state = StateVector.from_amplitudes(amplitudes)
    return FiducialVector(
        state=state,
        label=label,
        params={"amplitudes": state.to_pairs()},
    )

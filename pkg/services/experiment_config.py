"""
Esquema de configuración de experimentos.

Valida el JSON de entrada con pydantic y traduce los errores de
sintaxis y de esquema a ConfigurationError con diagnósticos por línea
y por campo.
"""

import hashlib
import json
from pathlib import Path
from typing import Annotated, Any, Dict, List, Literal, Mapping, Optional, Sequence, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from config.settings import (
    CONFIG_SCHEMA_VERSION,
    EXHAUSTIVE_EVENT_LIMIT,
    EXHAUSTIVE_SHIFT_LIMIT,
    MAX_HILBERT_DIM,
    get_tolerances,
)
from utils.exceptions import ConfigurationError

ANALYSES = (
    "validate",
    "covariance",
    "norm1",
    "necessary-condition",
    "refinement",
    "scaling",
    "marginals",
    "kernel-identity",
    "joint-bound",
    "absolute-continuity",
    "resolution-sweep",
)
AnalysisName = Literal[
    "validate",
    "covariance",
    "norm1",
    "necessary-condition",
    "refinement",
    "scaling",
    "marginals",
    "kernel-identity",
    "joint-bound",
    "absolute-continuity",
    "resolution-sweep",
]

# Claves que no forman parte del hash de configuración
UNHASHED_KEYS = {"seed", "output_dir"}


class FiducialConfig(BaseModel):
    """Descripción del fiducial: etiqueta y parámetros."""

    model_config = ConfigDict(extra="forbid")

    label: Literal["basis", "vacuum", "uniform", "gaussian", "random", "custom"]
    index: Optional[int] = Field(default=None, ge=0)
    width: Optional[float] = Field(default=None, gt=0)
    amplitudes: Optional[List[Union[float, List[float]]]] = None

    def to_spec(self) -> Dict[str, Any]:
        return self.model_dump(exclude_none=True)


class ThresholdConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    normalization: Optional[float] = Field(default=None, ge=0)


class WHConstruction(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["wh"]
    d: int = Field(ge=2, le=MAX_HILBERT_DIM)
    fiducial: FiducialConfig = FiducialConfig(label="basis", index=0)
    thresholds: ThresholdConfig = ThresholdConfig()

    @property
    def atom_count(self) -> int:
        return self.d * self.d

    @property
    def is_product(self) -> bool:
        return True


class CoherentConstruction(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["coherent"]
    N: int = Field(ge=2, le=MAX_HILBERT_DIM)
    L: float = Field(gt=0)
    h: float = Field(gt=0)
    truncation: Literal["renormalize", "project"] = "renormalize"
    fiducial: FiducialConfig = FiducialConfig(label="vacuum")
    thresholds: ThresholdConfig = ThresholdConfig()

    @property
    def atom_count(self) -> int:
        return int(round(2.0 * self.L / self.h)) ** 2

    @property
    def is_product(self) -> bool:
        return True


class PVMConstruction(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["pvm"]
    d: int = Field(ge=1, le=MAX_HILBERT_DIM)
    basis: Literal["position", "fourier"] = "position"

    @property
    def atom_count(self) -> int:
        return self.d

    @property
    def is_product(self) -> bool:
        return False


class SmearedConstruction(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["smeared"]
    kernel: List[List[float]] = Field(min_length=1)
    basis: Literal["position", "fourier"] = "position"

    @property
    def atom_count(self) -> int:
        return len(self.kernel[0])

    @property
    def is_product(self) -> bool:
        return False


Construction = Annotated[
    Union[WHConstruction, CoherentConstruction, PVMConstruction, SmearedConstruction],
    Field(discriminator="kind"),
]


class SweepConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    h_levels: List[float] = Field(default_factory=lambda: [0.4, 0.2, 0.1, 0.05])
    d_values: List[int] = Field(default_factory=lambda: list(range(2, 9)))
    fiducials_per_d: int = Field(default=20, ge=1)
    point: Optional[List[float]] = Field(default=None, min_length=2, max_length=2)

    @field_validator("h_levels")
    @classmethod
    def _positive_levels(cls, value: List[float]) -> List[float]:
        if any(h <= 0 for h in value):
            raise ValueError("los lados de celda deben ser positivos")
        return value

    @field_validator("d_values")
    @classmethod
    def _valid_dimensions(cls, value: List[int]) -> List[int]:
        if any(d < 2 or d > MAX_HILBERT_DIM for d in value):
            raise ValueError(f"las dimensiones deben estar en [2, {MAX_HILBERT_DIM}]")
        return value


class JointConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    q: List[int]
    p: List[int]


class ExperimentConfig(BaseModel):
    """Configuración completa de un experimento."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    schema_version: Literal[1] = Field(alias="schema")
    construction: Construction
    analyses: List[AnalysisName] = Field(default_factory=lambda: ["validate"])
    tolerances: Dict[str, float] = Field(default_factory=dict)
    output_dir: Optional[str] = None
    seed: Optional[int] = Field(default=None, ge=0)
    sweep: SweepConfig = Field(default_factory=SweepConfig)
    joint: Optional[JointConfig] = None

    @field_validator("analyses")
    @classmethod
    def _unique_analyses(cls, value: List[str]) -> List[str]:
        repeated = sorted({a for a in value if value.count(a) > 1})
        if repeated:
            raise ValueError(f"análisis repetidos: {', '.join(repeated)}")
        return value

    @model_validator(mode="after")
    def _check_compatibility(self) -> "ExperimentConfig":
        kind = self.construction.kind
        selected = set(self.analyses)
        for name in ("covariance", "kernel-identity", "resolution-sweep"):
            if name in selected and kind != "wh":
                raise ValueError(f"el análisis '{name}' requiere una construcción 'wh'")
        if "scaling" in selected and kind != "coherent":
            raise ValueError("el análisis 'scaling' requiere una construcción 'coherent'")
        for name in ("marginals", "joint-bound"):
            if name in selected and not self.construction.is_product:
                raise ValueError(f"el análisis '{name}' requiere un espacio producto (wh o coherent)")
        if "joint-bound" in selected and self.joint is None:
            raise ValueError("el análisis 'joint-bound' requiere la sección 'joint'")
        if self.seed is None and self.requires_seed():
            raise ValueError("se requiere 'seed' para fiduciales, eventos o desplazamientos aleatorios")
        return self

    def requires_seed(self) -> bool:
        construction = self.construction
        selected = set(self.analyses)
        fiducial = getattr(construction, "fiducial", None)
        if fiducial is not None and fiducial.label == "random":
            return True
        if "resolution-sweep" in selected:
            return True
        random_events = construction.atom_count > EXHAUSTIVE_EVENT_LIMIT
        if random_events and selected & {"norm1", "absolute-continuity"}:
            return True
        return (
            "covariance" in selected
            and construction.kind == "wh"
            and construction.d > EXHAUSTIVE_SHIFT_LIMIT
        )

    def selection(self) -> Dict[str, Any]:
        """Clave de selección: construcción estructural + lista de análisis."""
        structure = self.construction.model_dump(exclude={"fiducial", "thresholds"})
        return {"construction": structure, "analyses": list(self.analyses)}


def _diagnostics(error: ValidationError) -> List[Dict[str, Any]]:
    return [
        {"field": ".".join(str(part) for part in item["loc"]), "message": item["msg"]}
        for item in error.errors()
    ]


def parse_config(payload: Mapping[str, Any]) -> ExperimentConfig:
    """
    Valida un diccionario de configuración.

    Raises:
        ConfigurationError: Con diagnósticos por campo
    """
    if isinstance(payload, Mapping) and payload.get("schema") not in (None, CONFIG_SCHEMA_VERSION):
        raise ConfigurationError(
            f"Versión de esquema no soportada: {payload.get('schema')!r} (se espera {CONFIG_SCHEMA_VERSION})",
            config_key="schema",
        )
    try:
        config = ExperimentConfig.model_validate(payload)
    except ValidationError as e:
        diagnostics = _diagnostics(e)
        first = diagnostics[0] if diagnostics else {"field": None, "message": str(e)}
        raise ConfigurationError(
            f"Configuración inválida en '{first['field']}': {first['message']}",
            config_key=first["field"] or None,
            diagnostics=diagnostics,
        )
    get_tolerances(config.tolerances)
    return config


def load_config(
    path: Union[str, Path],
    seed: Optional[int] = None,
    output_dir: Optional[str] = None,
    tolerances: Optional[Mapping[str, float]] = None,
) -> ExperimentConfig:
    """
    Lee y valida un archivo de configuración JSON.

    Las opciones de línea de comandos se aplican antes de validar, de modo
    que `seed` puede satisfacer la exigencia de semilla.

    Raises:
        ConfigurationError: Si el archivo no se puede leer, el JSON es
            inválido (con línea y columna) o no cumple el esquema
    """
    source = Path(path)
    try:
        text = source.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigurationError(f"No se pudo leer la configuración {source}: {e}")
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigurationError(
            f"JSON inválido en {source}: {e.msg} (línea {e.lineno}, columna {e.colno})",
            line=e.lineno,
            column=e.colno,
        )
    if not isinstance(payload, dict):
        raise ConfigurationError("La configuración debe ser un objeto JSON")
    return parse_config(_merge_overrides(payload, seed, output_dir, tolerances))


def parse_tolerance_overrides(values: Sequence[str]) -> Dict[str, float]:
    """
    Interpreta opciones --tol KEY=VAL.

    Raises:
        ConfigurationError: Si alguna opción no tiene la forma KEY=VAL numérica
    """
    overrides: Dict[str, float] = {}
    for item in values:
        key, sep, raw = item.partition("=")
        if not sep or not key.strip():
            raise ConfigurationError(f"Opción --tol mal formada: '{item}' (se espera KEY=VAL)", config_key=item)
        try:
            overrides[key.strip()] = float(raw)
        except ValueError:
            raise ConfigurationError(f"Valor no numérico en --tol {item}", config_key=key.strip())
    return overrides


def apply_overrides(
    config: ExperimentConfig,
    seed: Optional[int] = None,
    output_dir: Optional[str] = None,
    tolerances: Optional[Mapping[str, float]] = None,
) -> ExperimentConfig:
    """Aplica las opciones de línea de comandos y revalida."""
    return parse_config(_merge_overrides(config.model_dump(by_alias=True), seed, output_dir, tolerances))


def _merge_overrides(
    payload: Dict[str, Any],
    seed: Optional[int],
    output_dir: Optional[str],
    tolerances: Optional[Mapping[str, float]],
) -> Dict[str, Any]:
    merged = dict(payload)
    if seed is not None:
        merged["seed"] = seed
    if output_dir is not None:
        merged["output_dir"] = output_dir
    if tolerances:
        current = merged.get("tolerances")
        merged["tolerances"] = {**(current if isinstance(current, dict) else {}), **tolerances}
    return merged


def canonical_json(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def config_hash(config: ExperimentConfig) -> str:
    """sha256 del JSON canónico de la configuración sin semilla ni directorio de salida."""
    payload = config.model_dump(by_alias=True, exclude=UNHASHED_KEYS)
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()

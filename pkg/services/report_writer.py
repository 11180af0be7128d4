"""
Escritura de informes JSON, compañeros CSV y manifiesto de ejecución.
"""

import io
import json
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import pandas as pd

from config.settings import CSV_DELIMITER, CSV_LINE_TERMINATOR, FLOAT_FORMAT, ensure_output_dir
from utils.exceptions import ArtifactError
from utils.logger import LoggerMixin

MANIFEST_NAME = "manifest.json"


def dumps_report(payload: Any) -> str:
    """JSON con claves ordenadas y flotantes en su representación más corta."""
    return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def sanitize_non_finite(payload: Any, path: str = "") -> Tuple[Any, List[str]]:
    """
    Sustituye NaN/Inf por null y devuelve las rutas afectadas.

    Returns:
        (payload limpio, rutas de los valores no finitos)
    """
    if isinstance(payload, float):
        if math.isfinite(payload):
            return payload, []
        return None, [path or "$"]
    if isinstance(payload, dict):
        clean: Dict[str, Any] = {}
        found: List[str] = []
        for key, value in payload.items():
            clean[key], bad = sanitize_non_finite(value, f"{path}.{key}" if path else str(key))
            found.extend(bad)
        return clean, found
    if isinstance(payload, (list, tuple)):
        items, found = [], []
        for index, value in enumerate(payload):
            item, bad = sanitize_non_finite(value, f"{path}[{index}]")
            items.append(item)
            found.extend(bad)
        return items, found
    return payload, []


def frame_to_csv(frame: pd.DataFrame) -> str:
    # Ceros negativos normalizados a 0
    floats = frame.select_dtypes(include="float").columns
    if len(floats):
        frame = frame.assign(**{str(name): frame[name] + 0.0 for name in floats})
    return frame.to_csv(
        index=False,
        sep=CSV_DELIMITER,
        float_format=FLOAT_FORMAT,
        lineterminator=CSV_LINE_TERMINATOR,
    )


class ReportWriter(LoggerMixin):
    """Escribe los artefactos de una ejecución y verifica que se releen igual."""

    def __init__(self, output_dir: Path):
        super().__init__()
        self.output_dir = ensure_output_dir(Path(output_dir))
        self.files: List[Dict[str, Any]] = []

    def register(self, name: str, fmt: str, analysis: Optional[str]) -> Path:
        self.files.append({"analysis": analysis, "path": name, "format": fmt})
        return self.output_dir / name

    def write_json(self, name: str, payload: Dict[str, Any], analysis: Optional[str] = None) -> Path:
        target = self.register(name, "json", analysis)
        try:
            target.write_text(dumps_report(payload), encoding="utf-8")
        except (OSError, ValueError) as e:
            raise ArtifactError(f"No se pudo escribir {target}: {e}", file_path=str(target))
        self.log_operation("write_json", f"Informe escrito: {target}", level="debug")
        return target

    def write_csv(self, name: str, frame: pd.DataFrame, analysis: Optional[str] = None) -> Path:
        target = self.register(name, "csv", analysis)
        try:
            with open(target, "w", encoding="utf-8", newline="") as handle:
                handle.write(frame_to_csv(frame))
        except OSError as e:
            raise ArtifactError(f"No se pudo escribir {target}: {e}", file_path=str(target))
        self.log_operation("write_csv", f"Tabla escrita: {target} ({len(frame)} filas)", level="debug")
        return target

    def verify(self) -> None:
        """
        Relee cada artefacto registrado y comprueba que vuelve a escribirse
        byte a byte igual.

        Raises:
            ArtifactError: Si algún archivo falta o no sobrevive la relectura
        """
        for entry in self.files:
            target = self.output_dir / entry["path"]
            if not target.exists():
                raise ArtifactError(f"Artefacto ausente: {target}", file_path=str(target))
            text = target.read_text(encoding="utf-8")
            try:
                if entry["format"] == "json":
                    again = dumps_report(json.loads(text))
                else:
                    frame = pd.read_csv(io.StringIO(text), sep=CSV_DELIMITER, float_precision="round_trip")
                    again = frame_to_csv(frame) if len(frame.columns) else text
            except (ValueError, pd.errors.ParserError) as e:
                raise ArtifactError(f"No se pudo releer {target}: {e}", file_path=str(target))
            if again != text:
                raise ArtifactError(f"El artefacto {target} no sobrevive la relectura", file_path=str(target))
        self.log_operation("verify", f"{len(self.files)} artefactos verificados")

    def write_manifest(self, manifest: Dict[str, Any]) -> Path:
        target = self.output_dir / MANIFEST_NAME
        try:
            target.write_text(dumps_report(manifest), encoding="utf-8")
        except OSError as e:
            raise ArtifactError(f"No se pudo escribir el manifiesto {target}: {e}", file_path=str(target))
        self.log_operation("write_manifest", f"Manifiesto escrito: {target}")
        return target


def read_json(path: Path) -> Dict[str, Any]:
    """
    Lee un artefacto JSON.

    Raises:
        ArtifactError: Si no existe o no es JSON válido
    """
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ArtifactError(f"No se pudo leer {path}: {e}", file_path=str(path))

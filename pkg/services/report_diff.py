"""
Comparación estructurada de dos ejecuciones a partir de sus manifiestos.
"""

import numbers
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

from services.report_writer import MANIFEST_NAME, read_json
from utils.exceptions import SelectionMismatchError
from utils.logger import LoggerMixin

# Claves que cambian entre ejecuciones idénticas
IGNORED_KEYS = frozenset({"started_at", "finished_at", "output_dir", "seed"})


@dataclass
class DiffEntry:
    """Diferencia en un campo de un informe."""

    file: str
    path: str
    a: Any
    b: Any
    kind: str = "value"

    def to_dict(self) -> Dict[str, Any]:
        return {"file": self.file, "path": self.path, "a": self.a, "b": self.b, "kind": self.kind}


@dataclass
class ReportDiff:
    selection: Dict[str, Any]
    entries: List[DiffEntry] = field(default_factory=list)

    @property
    def is_empty(self) -> bool:
        return not self.entries

    def to_dict(self) -> Dict[str, Any]:
        return {
            "selection": self.selection,
            "differences": len(self.entries),
            "entries": [e.to_dict() for e in self.entries],
        }


def _is_number(value: Any) -> bool:
    return isinstance(value, numbers.Real) and not isinstance(value, bool)


def diff_payloads(
    a: Any,
    b: Any,
    file: str,
    field_tolerances: Optional[Mapping[str, float]] = None,
    default_tolerance: float = 0.0,
    path: str = "",
    key: Optional[str] = None,
) -> List[DiffEntry]:
    """
    Diferencias campo a campo entre dos valores JSON.

    Los números se comparan con la tolerancia del nombre de campo más
    cercano (`field_tolerances`) o con `default_tolerance`.
    """
    tolerances = field_tolerances or {}
    if isinstance(a, dict) and isinstance(b, dict):
        entries: List[DiffEntry] = []
        for name in sorted(set(a) | set(b)):
            if name in IGNORED_KEYS:
                continue
            child = f"{path}.{name}" if path else name
            if name not in a or name not in b:
                entries.append(DiffEntry(file, child, a.get(name), b.get(name), kind="missing"))
                continue
            entries.extend(diff_payloads(a[name], b[name], file, tolerances, default_tolerance, child, name))
        return entries
    if isinstance(a, list) and isinstance(b, list):
        entries = []
        if len(a) != len(b):
            entries.append(DiffEntry(file, f"{path}.length" if path else "length", len(a), len(b), kind="length"))
        for index, (left, right) in enumerate(zip(a, b)):
            entries.extend(diff_payloads(left, right, file, tolerances, default_tolerance, f"{path}[{index}]", key))
        return entries
    if _is_number(a) and _is_number(b):
        limit = tolerances.get(key, default_tolerance) if key is not None else default_tolerance
        if abs(float(a) - float(b)) > limit:
            return [DiffEntry(file, path, a, b)]
        return []
    if type(a) is not type(b) and not (_is_number(a) and _is_number(b)):
        return [DiffEntry(file, path, a, b, kind="type")]
    return [] if a == b else [DiffEntry(file, path, a, b)]


def _manifest_path(path: Union[str, Path]) -> Path:
    target = Path(path)
    return target / MANIFEST_NAME if target.is_dir() else target


def _reports(manifest: Dict[str, Any]) -> Dict[str, str]:
    return {
        entry["path"]: entry["format"]
        for entry in manifest.get("files", [])
        if entry.get("format") == "json"
    }


class ReportDiffer(LoggerMixin):
    """Compara los informes JSON de dos manifiestos con la misma selección."""

    def __init__(self, field_tolerances: Optional[Mapping[str, float]] = None, default_tolerance: float = 0.0):
        super().__init__()
        self.field_tolerances = dict(field_tolerances or {})
        self.default_tolerance = default_tolerance

    def _load(self, path: Union[str, Path]) -> Tuple[Dict[str, Any], Path]:
        manifest_file = _manifest_path(path)
        return read_json(manifest_file), manifest_file.parent

    def diff(self, path_a: Union[str, Path], path_b: Union[str, Path]) -> ReportDiff:
        """
        Raises:
            ArtifactError: Si algún manifiesto o informe no se puede leer
            SelectionMismatchError: Si las selecciones de análisis difieren
        """
        manifest_a, base_a = self._load(path_a)
        manifest_b, base_b = self._load(path_b)
        if manifest_a.get("selection") != manifest_b.get("selection"):
            raise SelectionMismatchError(manifest_a.get("selection"), manifest_b.get("selection"))

        result = ReportDiff(selection=manifest_a.get("selection") or {})
        for name in ("config_hash", "exit_code", "summary"):
            result.entries.extend(diff_payloads(
                manifest_a.get(name), manifest_b.get(name), MANIFEST_NAME,
                self.field_tolerances, self.default_tolerance, name, name,
            ))

        reports_a, reports_b = _reports(manifest_a), _reports(manifest_b)
        for name in sorted(set(reports_a) | set(reports_b)):
            if name not in reports_a or name not in reports_b:
                result.entries.append(DiffEntry(name, "", name in reports_a, name in reports_b, kind="missing"))
                continue
            result.entries.extend(diff_payloads(
                read_json(base_a / name), read_json(base_b / name), name,
                self.field_tolerances, self.default_tolerance,
            ))

        self.log_operation(
            "diff_reports",
            f"Comparación de informes: {len(result.entries)} diferencias",
            differences=len(result.entries),
        )
        return result


def diff_reports(
    path_a: Union[str, Path],
    path_b: Union[str, Path],
    field_tolerances: Optional[Mapping[str, float]] = None,
    default_tolerance: float = 0.0,
) -> ReportDiff:
    """Diferencia estructurada entre dos ejecuciones (directorio o manifiesto)."""
    return ReportDiffer(field_tolerances, default_tolerance).diff(path_a, path_b)

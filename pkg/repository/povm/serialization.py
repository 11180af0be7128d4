"""
Serialización JSON de POVMs discretos.

Los complejos se escriben como pares [re, im] y los reales con la
representación más corta que se relee exactamente, de modo que
guardar y volver a cargar reproduce los mismos bits.
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np

from config.settings import DEFAULT_TOLERANCES, Tolerances
from repository.povm.discrete_povm import DiscretePOVM
from repository.povm.outcome_space import OutcomeSpace
from utils.exceptions import ArtifactError, RejectedInputError
from utils.logger import get_logger

logger = get_logger(__name__)

POVM_FORMAT_VERSION = 1


def _pairs(values: np.ndarray) -> List[List[float]]:
    return [[float(z.real), float(z.imag)] for z in values]


def _complex(pairs: Any) -> np.ndarray:
    array = np.asarray(pairs, dtype=np.float64)
    if array.shape[-1] != 2:
        raise RejectedInputError("Los complejos deben serializarse como pares [re, im]", reason="invalid_format")
    return array[..., 0] + 1j * array[..., 1]


def povm_to_dict(povm: DiscretePOVM) -> Dict[str, Any]:
    """Representación JSON de un POVM."""
    space = povm.space.to_dict()
    atoms = []
    for index in range(povm.space.size):
        record: Dict[str, Any] = {
            "index": index,
            "coord": [float(c) for c in povm.space.coords[index]],
        }
        if povm.is_factored:
            record["effect"] = {
                "rank1": {
                    "weight": float(povm.weights[index]),
                    "vector": _pairs(povm.vectors[index]),
                }
            }
        else:
            record["effect"] = [_pairs(row) for row in povm.dense_stack[index]]
        atoms.append(record)
    return {
        "format": POVM_FORMAT_VERSION,
        "label": povm.label,
        "dim": povm.dim,
        "space": space,
        "atoms": atoms,
        "normalization_defect": povm.normalization_defect,
        "threshold": povm.threshold,
        "metadata": povm.metadata,
    }


def povm_from_dict(payload: Dict[str, Any], tolerances: Tolerances = DEFAULT_TOLERANCES) -> DiscretePOVM:
    """
    Reconstruye un POVM desde su representación JSON.

    Raises:
        RejectedInputError: Si la estructura no es válida
    """
    try:
        space = OutcomeSpace.from_dict(payload["space"])
        dim = int(payload["dim"])
        atoms = sorted(payload["atoms"], key=lambda a: a["index"])
        effects = [a["effect"] for a in atoms]
        recorded = payload.get("normalization_defect")
    except (KeyError, TypeError, ValueError) as e:
        raise RejectedInputError(f"Formato de POVM inválido: {e}", reason="invalid_format")

    if [a["index"] for a in atoms] != list(range(space.size)):
        raise RejectedInputError("Los índices de átomo deben ser contiguos desde 0", reason="invalid_format")

    common = dict(
        normalization_defect=recorded,
        threshold=payload.get("threshold"),
        label=payload.get("label", "custom"),
        metadata=payload.get("metadata") or {},
        tolerances=tolerances,
    )
    if effects and all(isinstance(e, dict) and "rank1" in e for e in effects):
        weights = np.array([e["rank1"]["weight"] for e in effects], dtype=np.float64)
        vectors = np.stack([_complex(e["rank1"]["vector"]) for e in effects])
        return DiscretePOVM(space, dim, weights=weights, vectors=vectors, **common)
    if any(isinstance(e, dict) for e in effects):
        # Mezcla de formas: se densifica todo
        dense = []
        for e in effects:
            if isinstance(e, dict):
                vector = _complex(e["rank1"]["vector"])
                dense.append(float(e["rank1"]["weight"]) * np.outer(vector, vector.conj()))
            else:
                dense.append(_complex(e))
        return DiscretePOVM(space, dim, dense=np.stack(dense), **common)
    return DiscretePOVM(space, dim, dense=np.stack([_complex(e) for e in effects]), **common)


def save_povm(povm: DiscretePOVM, path: Union[str, Path]) -> Path:
    """Escribe el POVM como JSON (UTF-8, claves ordenadas)."""
    target = Path(path)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        text = json.dumps(povm_to_dict(povm), sort_keys=True, indent=2, ensure_ascii=False) + "\n"
        target.write_text(text, encoding="utf-8")
    except OSError as e:
        raise ArtifactError(f"No se pudo escribir el POVM: {e}", file_path=str(target))
    logger.info(
        f"POVM guardado en {target}",
        extra={"component": "povm", "operation": "save"},
    )
    return target


def load_povm(path: Union[str, Path], tolerances: Tolerances = DEFAULT_TOLERANCES) -> DiscretePOVM:
    """Lee un POVM desde JSON."""
    source = Path(path)
    try:
        payload = json.loads(source.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ArtifactError(f"No se pudo leer el POVM: {e}", file_path=str(source))
    return povm_from_dict(payload, tolerances)

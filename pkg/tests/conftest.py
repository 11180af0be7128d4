"""
Fixtures compartidas por la suite de tests.
"""

import json
from pathlib import Path

import numpy as np
import pytest

from repository.covariant import build_fiducial, build_wh_povm, fiducial_from_amplitudes

# Fiducial con testigo de no conmutatividad 1/8 en d = 2
TILTED_AMPLITUDES = [np.cos(np.pi / 8), np.sin(np.pi / 8)]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def wh_basis_d4():
    """WH(4, |0⟩)."""
    return build_wh_povm(4, build_fiducial({"label": "basis", "index": 0}, 4))


@pytest.fixture
def tilted_fiducial():
    return fiducial_from_amplitudes(TILTED_AMPLITUDES)


@pytest.fixture
def write_config(tmp_path):
    """Escribe una configuración JSON y retorna su ruta."""

    def _write(payload, name="config.json"):
        target = Path(tmp_path) / name
        text = payload if isinstance(payload, str) else json.dumps(payload, indent=2)
        target.write_text(text, encoding="utf-8")
        return target

    return _write

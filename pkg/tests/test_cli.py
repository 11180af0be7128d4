"""
Tests de la interfaz de línea de comandos.
"""

import json

import pytest
from click.testing import CliRunner

from config.settings import APP_VERSION
from main import cli


def wh_payload(d=2, analyses=None, **extra):
    payload = {
        "schema": 1,
        "construction": {"kind": "wh", "d": d, "fiducial": {"label": "basis", "index": 0}},
        "analyses": analyses or ["validate"],
    }
    payload.update(extra)
    return payload


class TestExperimentCommands:
    """Tests de build, check y marginal."""

    def setup_method(self):
        self.runner = CliRunner()

    def invoke(self, *args):
        result = self.runner.invoke(cli, list(args))
        return result, json.loads(result.stdout) if result.stdout.strip() else None

    def test_version(self):
        result = self.runner.invoke(cli, ["--version"])
        assert result.exit_code == 0
        assert APP_VERSION in result.stdout

    def test_check_reports_failure(self, write_config, tmp_path):
        path = write_config(wh_payload(analyses=["validate", "norm1"]))
        result, payload = self.invoke("check", "--config", str(path), "--out", str(tmp_path / "run"))
        assert result.exit_code == 1
        assert payload["exit_code"] == 1
        assert payload["summary"] == {"validate": True, "norm1": False}
        assert payload["manifest"].endswith("manifest.json")

    def test_malformed_config(self, write_config, tmp_path):
        path = write_config('{"schema": 1,')
        result, payload = self.invoke("check", "--config", str(path), "--out", str(tmp_path / "run"))
        assert result.exit_code == 2
        assert payload["error"]["error_code"] == "CONFIGURATION_ERROR"
        assert payload["manifest"] is None

    @pytest.mark.parametrize("option", ["equality", "equality=tight", "sloppiness=1e-9"])
    def test_bad_tolerance_option(self, write_config, tmp_path, option):
        path = write_config(wh_payload())
        result, payload = self.invoke("check", "--config", str(path), "--out", str(tmp_path), "--tol", option)
        assert result.exit_code == 2
        assert payload["error"]["error_code"] == "CONFIGURATION_ERROR"

    def test_seed_option(self, write_config, tmp_path):
        path = write_config(wh_payload(d=4, analyses=["norm1"]))
        result, _ = self.invoke("check", "--config", str(path), "--out", str(tmp_path / "a"))
        assert result.exit_code == 2
        result, payload = self.invoke("check", "--config", str(path), "--out", str(tmp_path / "b"), "--seed", "4")
        assert result.exit_code == 1
        manifest = json.loads((tmp_path / "b" / "manifest.json").read_text(encoding="utf-8"))
        assert manifest["seed"] == 4

    def test_build(self, write_config, tmp_path):
        path = write_config(wh_payload(d=3))
        result, payload = self.invoke("build", "--config", str(path), "--out", str(tmp_path), "--quiet")
        assert result.exit_code == 0
        assert payload["summary"] == {"validate": True, "build": True}
        assert (tmp_path / "povm.json").exists()

    def test_marginal(self, write_config, tmp_path):
        path = write_config(wh_payload(d=3))
        result, payload = self.invoke("marginal", "--config", str(path), "--out", str(tmp_path))
        assert result.exit_code == 0
        assert payload["summary"] == {"marginals": True, "kernel-identity": True}
        assert (tmp_path / "marginals.kernel-q.csv").read_text(encoding="utf-8").startswith("0,1,2\n")

    def test_sweep_rejects_pvm(self, write_config, tmp_path):
        path = write_config({"schema": 1, "construction": {"kind": "pvm", "d": 3}})
        result, payload = self.invoke("sweep", "--config", str(path), "--out", str(tmp_path))
        assert result.exit_code == 2
        assert payload["error"]["details"]["config_key"] == "construction.kind"


class TestReportDiffCommand:
    """Tests de report-diff."""

    def setup_method(self):
        self.runner = CliRunner()

    def check(self, write_config, out, payload, name):
        path = write_config(payload, name=name)
        result = self.runner.invoke(cli, ["check", "--config", str(path), "--out", str(out), "--quiet"])
        assert result.exit_code in (0, 1)
        return out

    def diff(self, a, b, *extra):
        result = self.runner.invoke(cli, ["report-diff", str(a), str(b), *extra])
        return result, json.loads(result.stdout)

    def test_identical_runs(self, write_config, tmp_path):
        payload = wh_payload(d=4, analyses=["validate", "norm1"], seed=8)
        a = self.check(write_config, tmp_path / "a", payload, "a.json")
        b = self.check(write_config, tmp_path / "b", payload, "b.json")
        result, diff = self.diff(a, b)
        assert result.exit_code == 0
        assert diff["differences"] == 0

    def test_different_seeds(self, write_config, tmp_path):
        a = self.check(write_config, tmp_path / "a", wh_payload(d=4, analyses=["norm1"], seed=1), "a.json")
        b = self.check(write_config, tmp_path / "b", wh_payload(d=4, analyses=["norm1"], seed=2), "b.json")
        result, diff = self.diff(a / "manifest.json", b / "manifest.json")
        assert result.exit_code == 1
        assert diff["differences"] > 0
        assert {entry["file"] for entry in diff["entries"]} == {"norm1.json"}

    def test_selection_mismatch(self, write_config, tmp_path):
        a = self.check(write_config, tmp_path / "a", wh_payload(d=2), "a.json")
        b = self.check(write_config, tmp_path / "b", wh_payload(d=3), "b.json")
        result, payload = self.diff(a, b)
        assert result.exit_code == 2
        assert payload["error_code"] == "SELECTION_MISMATCH"

    def test_missing_run(self, write_config, tmp_path):
        a = self.check(write_config, tmp_path / "a", wh_payload(), "a.json")
        result, payload = self.diff(a, tmp_path / "absent")
        assert result.exit_code == 2
        assert payload["error_code"] == "ARTIFACT_ERROR"

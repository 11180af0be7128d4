"""
Tests del servicio de ejecución: códigos de salida, manifiesto,
determinismo y comparación de informes.
"""

import json
from pathlib import Path

import pytest

from repository.povm import load_povm
from services.experiment_config import load_config, parse_config
from services.experiment_runner import (
    EXIT_CHECK_FAILED,
    EXIT_CONFIG_ERROR,
    EXIT_OK,
    ExperimentRunner,
    mode_config,
)
from services.report_diff import diff_payloads, diff_reports
from services.report_writer import MANIFEST_NAME
from utils.exceptions import ArtifactError, ConfigurationError, SelectionMismatchError

WH_ANALYSES = [
    "validate",
    "covariance",
    "norm1",
    "necessary-condition",
    "refinement",
    "marginals",
    "kernel-identity",
    "joint-bound",
    "absolute-continuity",
]


def wh_payload(d=2, analyses=None, **extra):
    payload = {
        "schema": 1,
        "construction": {"kind": "wh", "d": d, "fiducial": {"label": "basis", "index": 0}},
        "analyses": analyses or ["validate"],
    }
    payload.update(extra)
    return payload


def coherent_payload(analyses, **extra):
    payload = {
        "schema": 1,
        "construction": {"kind": "coherent", "N": 8, "L": 2.0, "h": 0.5, "thresholds": {"normalization": 25.0}},
        "analyses": analyses,
        "sweep": {"h_levels": [1.0, 0.5, 0.25]},
    }
    payload.update(extra)
    return payload


def run(payload, out, mode="check"):
    config = parse_config({**payload, "output_dir": str(out)})
    return ExperimentRunner().run(mode_config(config, mode), mode)


class TestExperimentRunner:
    """Tests de ejecución de configuraciones."""

    def test_wh_check_runs_every_analysis(self, tmp_path):
        payload = wh_payload(analyses=WH_ANALYSES, joint={"q": [0], "p": [0, 1]})
        result = run(payload, tmp_path)
        summary = result.manifest["summary"]
        assert result.exit_code == EXIT_CHECK_FAILED
        assert list(summary) == WH_ANALYSES
        assert summary["norm1"] is False
        assert all(passed for name, passed in summary.items() if name != "norm1")
        for name in WH_ANALYSES:
            assert (tmp_path / f"{name}.json").exists()
        assert (tmp_path / "norm1.records.csv").exists()
        assert (tmp_path / "marginals.kernel-q.csv").exists()
        assert (tmp_path / "marginals.kernel-p.csv").exists()

    def test_manifest_contents(self, tmp_path):
        result = run(wh_payload(), tmp_path)
        manifest = json.loads((tmp_path / MANIFEST_NAME).read_text(encoding="utf-8"))
        assert result.exit_code == EXIT_OK
        assert manifest == result.manifest
        assert manifest["exit_code"] == EXIT_OK
        assert manifest["selection"]["analyses"] == ["validate"]
        assert {f["path"] for f in manifest["files"]} == {"validate.json", "validate.atoms.csv"}
        report = json.loads((tmp_path / "validate.json").read_text(encoding="utf-8"))
        assert report["config_hash"] == manifest["config_hash"]
        assert report["passed"] is True
        assert report["result"]["support_size"] == 4

    def test_norm1_records_follow_report(self, tmp_path):
        run(wh_payload(d=4, analyses=["validate", "covariance", "norm1"], seed=5), tmp_path)
        report = json.loads((tmp_path / "norm1.json").read_text(encoding="utf-8"))
        records = report["result"]["report"]["records"]
        assert report["passed"] is False
        assert len(records) == 2 + 16 + 200
        assert records[0]["kind"] == "empty" and records[0]["zero"] is True
        header = (tmp_path / "norm1.records.csv").read_text(encoding="utf-8").splitlines()[0]
        assert header == "event,kind,size,norm,gap,zero,expectation,state_ref,exceeds_identity"

    def test_build_mode_writes_povm(self, tmp_path):
        result = run(wh_payload(d=3), tmp_path, mode="build")
        assert result.exit_code == EXIT_OK
        assert result.manifest["summary"] == {"validate": True, "build": True}
        povm = load_povm(tmp_path / "povm.json")
        assert povm.space.size == 9
        assert povm.label == "wh"

    def test_construction_threshold_breach(self, tmp_path):
        payload = coherent_payload(["validate"])
        del payload["construction"]["thresholds"]
        result = run(payload, tmp_path)
        assert result.exit_code == EXIT_CHECK_FAILED
        assert result.manifest["summary"] == {"construction": False}
        assert result.error["error_code"] == "TRUNCATION_INADEQUATE"
        assert (tmp_path / MANIFEST_NAME).exists()

    def test_rejected_construction(self, tmp_path):
        payload = wh_payload()
        payload["construction"]["fiducial"] = {"label": "custom", "amplitudes": [1.0, 0.0, 0.0]}
        result = run(payload, tmp_path)
        assert result.exit_code == EXIT_CONFIG_ERROR
        assert result.error["details"]["reason"] == "dimension_mismatch"

    def test_coherent_check(self, tmp_path):
        result = run(coherent_payload(["validate", "necessary-condition", "refinement", "scaling", "marginals"]),
                     tmp_path)
        assert result.exit_code == EXIT_OK
        scaling = json.loads((tmp_path / "scaling.json").read_text(encoding="utf-8"))
        assert scaling["result"]["slope"] == pytest.approx(1.0, abs=1e-9)
        necessary = json.loads((tmp_path / "necessary-condition.json").read_text(encoding="utf-8"))
        assert necessary["result"]["trend"]["verdict"] == "norm-1-excluded"
        refinement = json.loads((tmp_path / "refinement.json").read_text(encoding="utf-8"))
        assert [s["scope"] for s in refinement["result"]["sequences"]][-1] == "nested-grids"

    def test_sweep_modes(self, tmp_path):
        coherent = run(coherent_payload(["validate"]), tmp_path / "coherent", mode="sweep")
        assert coherent.manifest["summary"] == {"scaling": True}
        assert (tmp_path / "coherent" / "scaling.levels.csv").exists()
        payload = wh_payload(seed=3, sweep={"d_values": [2, 3], "fiducials_per_d": 3})
        wh = run(payload, tmp_path / "wh", mode="sweep")
        assert wh.exit_code == EXIT_OK
        samples = (tmp_path / "wh" / "resolution-sweep.samples.csv").read_text(encoding="utf-8")
        assert len(samples.splitlines()) == 1 + 6

    def test_sweep_mode_rejects_pvm(self):
        config = parse_config({"schema": 1, "construction": {"kind": "pvm", "d": 3}})
        with pytest.raises(ConfigurationError):
            mode_config(config, "sweep")

    def test_run_path_reports_config_errors(self, write_config, tmp_path):
        path = write_config("{not json")
        result = ExperimentRunner().run_path(path, out=tmp_path)
        assert result.exit_code == EXIT_CONFIG_ERROR
        assert result.error["details"]["line"] == 1
        assert result.to_dict()["manifest"] is None

    def test_run_path_applies_seed(self, write_config, tmp_path):
        path = write_config(wh_payload(d=4, analyses=["norm1"]))
        without = ExperimentRunner().run_path(path, out=tmp_path / "a")
        assert without.exit_code == EXIT_CONFIG_ERROR
        seeded = ExperimentRunner().run_path(path, out=tmp_path / "b", seed=9)
        assert seeded.exit_code == EXIT_CHECK_FAILED
        assert seeded.manifest["seed"] == 9

    @pytest.mark.slow
    def test_coherent_n24_config(self, tmp_path):
        path = Path(__file__).resolve().parents[1] / "configs" / "coherent_n24_l4.json"
        config = load_config(path, output_dir=str(tmp_path / "sweep"))
        result = ExperimentRunner().run(mode_config(config, "sweep"), "sweep")
        assert result.exit_code == EXIT_OK
        scaling = json.loads((tmp_path / "sweep" / "scaling.json").read_text(encoding="utf-8"))
        assert scaling["result"]["slope"] == pytest.approx(1.0, abs=1e-9)
        assert [lvl["cell_size"] for lvl in scaling["result"]["levels"]] == [0.4, 0.2, 0.1, 0.05]
        config = load_config(path, output_dir=str(tmp_path / "check"))
        result = ExperimentRunner().run(mode_config(config, "check"), "check")
        assert result.manifest["summary"]["necessary-condition"] is True
        necessary = json.loads((tmp_path / "check" / "necessary-condition.json").read_text(encoding="utf-8"))
        assert necessary["result"]["trend"]["verdict"] == "norm-1-excluded"


class TestDeterminismAndDiff:
    """Tests de reproducibilidad y de report-diff."""

    def test_same_seed_is_byte_identical(self, tmp_path):
        payload = wh_payload(d=4, analyses=["validate", "norm1", "marginals"], seed=21)
        first = run(payload, tmp_path / "a")
        run(payload, tmp_path / "b")
        for entry in first.manifest["files"]:
            left = (tmp_path / "a" / entry["path"]).read_bytes()
            right = (tmp_path / "b" / entry["path"]).read_bytes()
            assert left == right, entry["path"]
        assert diff_reports(tmp_path / "a", tmp_path / "b").is_empty

    def test_different_seeds_only_change_sampled_events(self, tmp_path):
        payload = wh_payload(d=4, analyses=["validate", "covariance", "norm1"])
        run({**payload, "seed": 1}, tmp_path / "a")
        run({**payload, "seed": 2}, tmp_path / "b")
        diff = diff_reports(tmp_path / "a" / MANIFEST_NAME, tmp_path / "b" / MANIFEST_NAME)
        assert not diff.is_empty
        assert {entry.file for entry in diff.entries} == {"norm1.json"}
        assert all(entry.path.startswith("result.report.") for entry in diff.entries)
        assert any(entry.path.startswith("result.report.records[") for entry in diff.entries)

    def test_selection_mismatch(self, tmp_path):
        run(wh_payload(d=2), tmp_path / "a")
        run(wh_payload(d=3), tmp_path / "b")
        with pytest.raises(SelectionMismatchError):
            diff_reports(tmp_path / "a", tmp_path / "b")

    def test_missing_manifest(self, tmp_path):
        run(wh_payload(), tmp_path / "a")
        with pytest.raises(ArtifactError):
            diff_reports(tmp_path / "a", tmp_path / "missing")

    def test_field_tolerances(self):
        a = {"result": {"norm": 0.5, "gap": 0.5, "tag": "x"}}
        b = {"result": {"norm": 0.5 + 1e-9, "gap": 0.5 + 1e-9, "tag": "y"}}
        entries = diff_payloads(a, b, "r.json", field_tolerances={"norm": 1e-6})
        assert sorted(entry.path for entry in entries) == ["result.gap", "result.tag"]
        lengths = diff_payloads({"v": [1, 2]}, {"v": [1]}, "r.json")
        assert lengths[0].kind == "length"
        assert diff_payloads({"v": 1}, {"w": 1}, "r.json")[0].kind == "missing"

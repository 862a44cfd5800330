"""CLI commands and exit codes (0 Pass, 1 Fail, 2 Partial Pass, 3 error)."""

from __future__ import annotations

import json

import pytest
import yaml

from orantest.cli import main
from orantest.repository import find_case

CONFIG_TEMPLATE = """\
runs_dir: {runs_dir}
repository_dir: {repository_dir}
index_path: {index_path}
backends:
  embedding:
    kind: hash
    dimension: 256
  metric_embedding:
    kind: hash
    dimension: 512
  reranker:
    kind: lexical
  generation:
    kind: echo
  classifier:
    kind: deterministic
"""


@pytest.fixture()
def cli_config(fixtures_dir, tmp_path) -> str:
    config = CONFIG_TEMPLATE.format(
        runs_dir=tmp_path / "runs",
        repository_dir=fixtures_dir / "testcases",
        index_path=tmp_path / "index.json",
    )
    path = tmp_path / "config.yaml"
    path.write_text(config, encoding="utf-8")
    return str(path)


def write_flow_file(tmp_path, repository, tc_id: str) -> str:
    case = find_case(repository, tc_id)
    path = tmp_path / f"{tc_id}-flow.txt"
    path.write_text(case.ground_truth_flow + "\n", encoding="utf-8")
    return str(path)


def fixture_log(fixtures_dir, name: str) -> str:
    return str(fixtures_dir / "logs" / name)


class TestValidateCommand:
    def test_pass_exits_zero(self, fixtures_dir, repository, tmp_path):
        flow = write_flow_file(tmp_path, repository, "TC-06")
        code = main(["validate", flow, fixture_log(fixtures_dir, "tc-06.json")])
        assert code == 0

    def test_fail_exits_one(self, fixtures_dir, repository, tmp_path):
        flow = write_flow_file(tmp_path, repository, "TC-10")
        code = main(["validate", flow, fixture_log(fixtures_dir, "tc-10.json")])
        assert code == 1

    def test_missing_file_is_run_error(self, tmp_path):
        code = main(["validate", str(tmp_path / "absent.txt"), str(tmp_path / "log.json")])
        assert code == 3


class TestDebugCommand:
    def test_partial_pass_exits_two(self, fixtures_dir, repository, tmp_path):
        flow = write_flow_file(tmp_path, repository, "TC-01")
        code = main(["debug", flow, fixture_log(fixtures_dir, "tc-01.json")])
        assert code == 2

    def test_fail_exits_one(self, fixtures_dir, repository, tmp_path):
        flow = write_flow_file(tmp_path, repository, "TC-10")
        code = main(["debug", flow, fixture_log(fixtures_dir, "tc-10.json")])
        assert code == 1

    def test_matrix_export(self, fixtures_dir, repository, tmp_path):
        flow = write_flow_file(tmp_path, repository, "TC-01")
        out = tmp_path / "matrix.json"
        main(["debug", flow, fixture_log(fixtures_dir, "tc-01.json"),
              "--matrix-out", str(out)])
        exported = json.loads(out.read_text(encoding="utf-8"))
        assert exported["m"] == 7


class TestUsageErrors:
    def test_run_without_log_flag(self):
        with pytest.raises(SystemExit) as exc:
            main(["run", "TC-06"])
        assert exc.value.code == 3

    def test_unknown_command(self):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 3


class TestIndexAndRun:
    def test_index_build_then_auto_approve_run(self, fixtures_dir, cli_config,
                                               tmp_path, capsys):
        code = main(["index", "build", str(fixtures_dir / "corpus"), "--config", cli_config])
        assert code == 0
        assert (tmp_path / "index.json").exists()

        code = main([
            "run", "TC-06",
            "--log", fixture_log(fixtures_dir, "tc-06.json"),
            "--auto-approve", "--run-id", "r-cli",
            "--config", cli_config,
        ])
        out = capsys.readouterr().out
        assert code == 0
        assert "BYPASSED" in out
        assert "validation verdict: pass" in out

        code = main(["report", "r-cli", "--config", cli_config])
        assert code == 0
        report = json.loads(capsys.readouterr().out)
        assert report["run_id"] == "r-cli"

    def test_run_parks_without_auto_approve(self, fixtures_dir, cli_config, tmp_path,
                                            capsys):
        main(["index", "build", str(fixtures_dir / "corpus"), "--config", cli_config])
        capsys.readouterr()
        code = main([
            "run", "TC-06",
            "--log", fixture_log(fixtures_dir, "tc-06.json"),
            "--run-id", "r-parked",
            "--config", cli_config,
        ])
        out = capsys.readouterr().out
        assert code == 0
        assert "awaiting_approval" in out

    def test_failing_case_exit_code(self, fixtures_dir, cli_config, tmp_path, capsys):
        main(["index", "build", str(fixtures_dir / "corpus"), "--config", cli_config])
        code = main([
            "run", "TC-02",
            "--log", fixture_log(fixtures_dir, "tc-02.json"),
            "--auto-approve", "--run-id", "r-cli-fail",
            "--config", cli_config,
        ])
        assert code == 2  # debug upgraded the failed validation to partial pass


class TestIngest:
    def test_ingest_normalizes_log(self, fixtures_dir, tmp_path, capsys):
        out = tmp_path / "normalized.json"
        code = main(["ingest", fixture_log(fixtures_dir, "tc-06.json"), "--out", str(out)])
        assert code == 0
        normalized = json.loads(out.read_text(encoding="utf-8"))
        assert isinstance(normalized, list)
        assert all("layers" in packet for packet in normalized)

    def test_ingest_with_filter(self, fixtures_dir, tmp_path):
        out = tmp_path / "filtered.json"
        code = main(["ingest", fixture_log(fixtures_dir, "tc-06.json"),
                     "--filter", "f1ap", "--out", str(out)])
        assert code == 0
        normalized = json.loads(out.read_text(encoding="utf-8"))
        assert all(set(packet["layers"]) == {"f1ap"} for packet in normalized)

    def test_ingest_filter_everything_is_error(self, fixtures_dir, tmp_path):
        code = main(["ingest", fixture_log(fixtures_dir, "tc-06.json"),
                     "--filter", "xnap"])
        assert code == 3


class TestScore:
    def test_score_campaign_files(self, tmp_path, capsys):
        truth = {"a": "pass", "b": "fail", "c": "partial_pass"}
        predictions = {
            "a": {"val": "pass", "debug": None},
            "b": {"val": "fail", "debug": "fail"},
            "c": {"val": "fail", "debug": "partial_pass"},
        }
        truth_path = tmp_path / "truth.yaml"
        pred_path = tmp_path / "pred.yaml"
        truth_path.write_text(yaml.safe_dump(truth), encoding="utf-8")
        pred_path.write_text(yaml.safe_dump(predictions), encoding="utf-8")
        code = main(["score", str(truth_path), str(pred_path)])
        out = capsys.readouterr().out
        assert code == 0
        assert "tp=1 fp=0 tn=2 fn=0" in out
        assert "validation accuracy: 1.0" in out

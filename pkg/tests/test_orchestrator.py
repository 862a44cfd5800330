"""Workflow orchestration: state machine, HITL parking, persistence, reports."""

from __future__ import annotations

import pytest

from conftest import make_orchestrator
from orantest.classifier import DeterministicClassifier
from orantest.engine import VerdictKind
from orantest.orchestrator import (
    OrchestratorError,
    RunIntegrityError,
    RunState,
    StateTransitionError,
    UnknownRunError,
    report_core,
    report_fingerprint,
)


class CountingClassifier(DeterministicClassifier):
    def __init__(self):
        super().__init__()
        self.calls = 0

    def classify(self, step, record):
        self.calls += 1
        return super().classify(step, record)


def log_content(fixtures_dir, name: str) -> bytes:
    return (fixtures_dir / "logs" / name).read_bytes()


class TestWorkflow:
    def test_passing_case_completes_without_debug(self, fixtures_dir, repository,
                                                  corpus_index, tmp_path):
        orc = make_orchestrator(fixtures_dir, repository, corpus_index, tmp_path / "runs")
        record = orc.create_run("TC-06", log_content(fixtures_dir, "tc-06.json"),
                                run_id="r-tc06")
        assert record.state is RunState.AWAITING_APPROVAL
        record = orc.apply_approval("r-tc06", approve=True, operator="alex")
        assert record.state is RunState.COMPLETED
        assert record.val_verdict.kind is VerdictKind.PASS
        assert record.debug_verdict is None
        assert not record.has_matrix
        report = orc.get_report("r-tc06")
        assert report["verdicts"]["validation"]["kind"] == "pass"
        assert report["verdicts"]["debug"] is None

    def test_failing_case_runs_debug(self, fixtures_dir, repository, corpus_index, tmp_path):
        orc = make_orchestrator(fixtures_dir, repository, corpus_index, tmp_path / "runs")
        orc.create_run("TC-02", log_content(fixtures_dir, "tc-02.json"), run_id="r-tc02")
        record = orc.apply_approval("r-tc02", approve=True, operator="alex")
        assert record.state is RunState.COMPLETED
        assert record.val_verdict.kind is VerdictKind.FAIL
        assert record.debug_verdict.kind is VerdictKind.PARTIAL_PASS
        assert "UL NAS TRANSPORT" in record.debug_verdict.inference
        assert "prematurely" in record.debug_verdict.inference
        assert record.has_matrix
        matrix = orc.load_matrix("r-tc02")
        assert matrix.m == 9

    def test_no_classifier_call_before_approval(self, fixtures_dir, repository,
                                                corpus_index, tmp_path):
        spy = CountingClassifier()
        orc = make_orchestrator(fixtures_dir, repository, corpus_index,
                                tmp_path / "runs", classifier=spy)
        orc.create_run("TC-06", log_content(fixtures_dir, "tc-06.json"), run_id="r-gate")
        assert spy.calls == 0
        orc.apply_approval("r-gate", approve=True, operator="alex")
        assert spy.calls > 0

    def test_reject_with_edits_then_approve(self, fixtures_dir, repository,
                                            corpus_index, tmp_path):
        orc = make_orchestrator(fixtures_dir, repository, corpus_index, tmp_path / "runs")
        record = orc.create_run("TC-06", log_content(fixtures_dir, "tc-06.json"),
                                run_id="r-edit")
        steps = [s.description for s in record.flow.steps]
        steps[0] = steps[0].replace("gNB-CU.", "gNB-CU over F1-C.")
        record = orc.apply_approval("r-edit", approve=False, operator="alex",
                                    edited_steps=steps)
        assert record.state is RunState.AWAITING_APPROVAL
        assert "flow_pending" in record.state_history
        assert len(record.flow.edits) == 1
        record = orc.apply_approval("r-edit", approve=True, operator="alex")
        assert record.state is RunState.COMPLETED
        report = orc.get_report("r-edit")
        assert len(report["flow"]["edits"]) == 1
        assert report["flow"]["approved_by"] == "alex"

    def test_auto_approve_prints_notice(self, fixtures_dir, repository, corpus_index,
                                        tmp_path, capsys):
        orc = make_orchestrator(fixtures_dir, repository, corpus_index, tmp_path / "runs")
        record = orc.create_run("TC-06", log_content(fixtures_dir, "tc-06.json"),
                                run_id="r-auto", auto_approve=True)
        assert record.state is RunState.COMPLETED
        assert "BYPASSED" in capsys.readouterr().out

    def test_unknown_test_case(self, fixtures_dir, repository, corpus_index, tmp_path):
        orc = make_orchestrator(fixtures_dir, repository, corpus_index, tmp_path / "runs")
        with pytest.raises(Exception):
            orc.create_run("TC-99", b"[]")

    def test_bad_log_aborts_at_validation(self, fixtures_dir, repository,
                                          corpus_index, tmp_path):
        orc = make_orchestrator(fixtures_dir, repository, corpus_index, tmp_path / "runs")
        orc.create_run("TC-06", b"this is not json", run_id="r-bad")
        record = orc.apply_approval("r-bad", approve=True, operator="alex")
        assert record.state is RunState.ABORTED
        assert "log parsing failed" in record.abort_cause
        with pytest.raises(OrchestratorError):
            orc.compile_report(record)
        with pytest.raises(StateTransitionError):
            orc.get_report("r-bad")


class TestPersistence:
    def test_park_restart_resume_identical_report(self, fixtures_dir, repository,
                                                  corpus_index, tmp_path):
        runs_a = tmp_path / "runs-a"
        orc_a = make_orchestrator(fixtures_dir, repository, corpus_index, runs_a)
        orc_a.create_run("TC-07", log_content(fixtures_dir, "tc-07.json"), run_id="r-park")
        # simulate a process restart: a fresh orchestrator over the same directory
        orc_a2 = make_orchestrator(fixtures_dir, repository, corpus_index, runs_a)
        resumed = orc_a2.resume_run("r-park")
        assert resumed.state is RunState.AWAITING_APPROVAL
        orc_a2.apply_approval("r-park", approve=True, operator="alex")
        interrupted = orc_a2.get_report("r-park")

        runs_b = tmp_path / "runs-b"
        orc_b = make_orchestrator(fixtures_dir, repository, corpus_index, runs_b)
        orc_b.create_run("TC-07", log_content(fixtures_dir, "tc-07.json"), run_id="r-park")
        orc_b.apply_approval("r-park", approve=True, operator="alex")
        uninterrupted = orc_b.get_report("r-park")

        assert report_core(interrupted) == report_core(uninterrupted)
        assert report_fingerprint(interrupted) == report_fingerprint(uninterrupted)

    def test_resume_unknown_run(self, fixtures_dir, repository, corpus_index, tmp_path):
        orc = make_orchestrator(fixtures_dir, repository, corpus_index, tmp_path / "runs")
        with pytest.raises(UnknownRunError):
            orc.resume_run("missing")

    def test_resume_corrupted_record(self, fixtures_dir, repository, corpus_index, tmp_path):
        runs = tmp_path / "runs"
        orc = make_orchestrator(fixtures_dir, repository, corpus_index, runs)
        orc.create_run("TC-06", log_content(fixtures_dir, "tc-06.json"), run_id="r-corrupt")
        (runs / "r-corrupt" / "record.json").write_text("{not json", encoding="utf-8")
        with pytest.raises(RunIntegrityError):
            orc.resume_run("r-corrupt")

    def test_resume_missing_artifact(self, fixtures_dir, repository, corpus_index, tmp_path):
        runs = tmp_path / "runs"
        orc = make_orchestrator(fixtures_dir, repository, corpus_index, runs)
        orc.create_run("TC-06", log_content(fixtures_dir, "tc-06.json"), run_id="r-hole")
        (runs / "r-hole" / "flow.json").unlink()
        with pytest.raises(RunIntegrityError):
            orc.resume_run("r-hole")

    def test_completed_run_is_read_only(self, fixtures_dir, repository,
                                        corpus_index, tmp_path):
        orc = make_orchestrator(fixtures_dir, repository, corpus_index, tmp_path / "runs")
        orc.create_run("TC-06", log_content(fixtures_dir, "tc-06.json"),
                       run_id="r-ro", auto_approve=True)
        resumed = orc.resume_run("r-ro")
        assert resumed.state is RunState.COMPLETED
        with pytest.raises(StateTransitionError):
            orc.apply_approval("r-ro", approve=True, operator="alex")

    def test_idempotent_approval_replay(self, fixtures_dir, repository,
                                        corpus_index, tmp_path):
        orc = make_orchestrator(fixtures_dir, repository, corpus_index, tmp_path / "runs")
        orc.create_run("TC-06", log_content(fixtures_dir, "tc-06.json"), run_id="r-idem")
        first = orc.apply_approval("r-idem", approve=True, operator="alex",
                                   idempotency_key="k1")
        replay = orc.apply_approval("r-idem", approve=True, operator="alex",
                                    idempotency_key="k1")
        assert replay.state is RunState.COMPLETED
        assert replay.run_id == first.run_id

    def test_run_directory_layout(self, fixtures_dir, repository, corpus_index, tmp_path):
        runs = tmp_path / "runs"
        orc = make_orchestrator(fixtures_dir, repository, corpus_index, runs)
        orc.create_run("TC-02", log_content(fixtures_dir, "tc-02.json"),
                       run_id="r-layout", auto_approve=True)
        run_dir = runs / "r-layout"
        for artifact in ("record.json", "flow.json", "logs.json", "matrix.json",
                         "report.json"):
            assert (run_dir / artifact).exists(), artifact

    def test_report_contains_provenance_and_config_hash(self, fixtures_dir, repository,
                                                        corpus_index, tmp_path):
        orc = make_orchestrator(fixtures_dir, repository, corpus_index, tmp_path / "runs")
        orc.create_run("TC-06", log_content(fixtures_dir, "tc-06.json"),
                       run_id="r-meta", auto_approve=True)
        report = orc.get_report("r-meta")
        assert report["config_hash"]
        assert report["flow"]["provenance"]
        assert report["test_case"]["id"] == "TC-06"
        assert "timings_seconds" in report
        assert "validation" in report["timings_seconds"]


class TestStateMachine:
    def test_illegal_transitions_raise(self, fixtures_dir, repository,
                                       corpus_index, tmp_path):
        from orantest.orchestrator import RunRecord

        record = RunRecord(run_id="x", tc_id="TC-06")
        with pytest.raises(StateTransitionError):
            record.transition(RunState.VALIDATING)
        with pytest.raises(StateTransitionError):
            record.transition(RunState.COMPLETED)

    def test_debug_requires_failed_validation(self):
        from orantest.orchestrator import RunRecord

        record = RunRecord(run_id="x", tc_id="TC-06", state=RunState.VALIDATING)
        with pytest.raises(StateTransitionError):
            record.transition(RunState.DEBUGGING)

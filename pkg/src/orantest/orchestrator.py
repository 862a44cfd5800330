"""Workflow driver: repository lookup through validation, debug and report.

A run walks a fixed state machine:

    Created -> FlowPending -> AwaitingApproval -> Validating
        -> Completed                (greedy validation passed)
        -> Debugging -> Completed   (greedy validation failed)
    any non-terminal state -> Aborted

The approval gate is a hard stop: runs park in AwaitingApproval, survive
process restarts, and no classifier call happens until an operator (or the
explicitly-noticed auto-approve mode) approves the generated flow. Every
artifact is persisted under runs/<run_id>/ with write-then-rename so a crash
never leaves a half-written state file.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
import logging
import os
import tempfile
import threading
import time
import uuid
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence

from .classifier import StepClassifier
from .config import AppConfig, config_hash, make_classifier, make_embedding_client, \
    make_generation_client, make_reranker_client
from .engine import (
    AbortedRunError,
    DebugMatrix,
    Verdict,
    VerdictKind,
    debug as run_debug,
    validate as run_validate,
)
from .flows import ApprovalTicket, ProceduralFlow, approve_flow, reject_flow, \
    submit_for_approval
from .logs import dissect_capture, parse_log_file, to_canonical_json
from .repository import TestCase, find_case
from .retrieval import VectorIndex, format_query, generate_flow, rerank, retrieve, \
    top_documents

logger = logging.getLogger(__name__)

REPORT_SCHEMA_VERSION = 1
VOLATILE_REPORT_KEYS = ("timings_seconds", "generated_at")


class OrchestratorError(Exception):
    pass


class UnknownRunError(OrchestratorError):
    pass


class StateTransitionError(OrchestratorError):
    pass


class RunIntegrityError(OrchestratorError):
    pass


class RunState(str, Enum):
    CREATED = "created"
    FLOW_PENDING = "flow_pending"
    AWAITING_APPROVAL = "awaiting_approval"
    VALIDATING = "validating"
    DEBUGGING = "debugging"
    COMPLETED = "completed"
    ABORTED = "aborted"


_TRANSITIONS: dict[RunState, frozenset[RunState]] = {
    RunState.CREATED: frozenset({RunState.FLOW_PENDING, RunState.ABORTED}),
    RunState.FLOW_PENDING: frozenset({RunState.AWAITING_APPROVAL, RunState.ABORTED}),
    RunState.AWAITING_APPROVAL: frozenset(
        {RunState.VALIDATING, RunState.FLOW_PENDING, RunState.ABORTED}
    ),
    RunState.VALIDATING: frozenset(
        {RunState.COMPLETED, RunState.DEBUGGING, RunState.ABORTED}
    ),
    RunState.DEBUGGING: frozenset({RunState.COMPLETED, RunState.ABORTED}),
    RunState.COMPLETED: frozenset(),
    RunState.ABORTED: frozenset(),
}


@dataclass
class RunRecord:
    """Persistent state of one test-case run."""

    run_id: str
    tc_id: str
    state: RunState = RunState.CREATED
    log_origin: str = ""
    flow: Optional[ProceduralFlow] = None
    ticket: Optional[dict] = None
    val_verdict: Optional[Verdict] = None
    debug_verdict: Optional[Verdict] = None
    has_matrix: bool = False
    timings: dict[str, float] = field(default_factory=dict)
    state_history: list[str] = field(default_factory=list)
    abort_cause: Optional[str] = None
    applied_keys: list[str] = field(default_factory=list)

    def transition(self, new_state: RunState) -> None:
        allowed = _TRANSITIONS[self.state]
        if new_state not in allowed:
            raise StateTransitionError(
                f"run {self.run_id}: illegal transition {self.state.value} -> {new_state.value}"
            )
        if new_state is RunState.COMPLETED and self.val_verdict is None:
            raise StateTransitionError(
                f"run {self.run_id}: cannot complete without a validation verdict"
            )
        if new_state is RunState.DEBUGGING and (
            self.val_verdict is None or self.val_verdict.kind is not VerdictKind.FAIL
        ):
            raise StateTransitionError(
                f"run {self.run_id}: debug stage is entered only from a failed validation"
            )
        self.state = new_state
        self.state_history.append(new_state.value)

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "tc_id": self.tc_id,
            "state": self.state.value,
            "log_origin": self.log_origin,
            "flow": self.flow.to_dict() if self.flow else None,
            "ticket": self.ticket,
            "val_verdict": self.val_verdict.to_dict() if self.val_verdict else None,
            "debug_verdict": self.debug_verdict.to_dict() if self.debug_verdict else None,
            "has_matrix": self.has_matrix,
            "timings": self.timings,
            "state_history": self.state_history,
            "abort_cause": self.abort_cause,
            "applied_keys": self.applied_keys,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunRecord":
        return cls(
            run_id=data["run_id"],
            tc_id=data["tc_id"],
            state=RunState(data["state"]),
            log_origin=data.get("log_origin", ""),
            flow=ProceduralFlow.from_dict(data["flow"]) if data.get("flow") else None,
            ticket=data.get("ticket"),
            val_verdict=Verdict.from_dict(data["val_verdict"]) if data.get("val_verdict") else None,
            debug_verdict=(
                Verdict.from_dict(data["debug_verdict"]) if data.get("debug_verdict") else None
            ),
            has_matrix=data.get("has_matrix", False),
            timings=dict(data.get("timings", {})),
            state_history=list(data.get("state_history", [])),
            abort_cause=data.get("abort_cause"),
            applied_keys=list(data.get("applied_keys", [])),
        )


def _atomic_write(path: Path, content: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(content)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def canonical_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def report_core(report: dict) -> dict:
    """Report minus volatile fields; the byte-comparable part."""
    return {k: v for k, v in report.items() if k not in VOLATILE_REPORT_KEYS}


def report_fingerprint(report: dict) -> str:
    return hashlib.sha256(canonical_json(report_core(report)).encode("utf-8")).hexdigest()


AUTO_APPROVE_NOTICE = (
    "*** AUTO-APPROVE: the human-in-the-loop approval gate is BYPASSED. "
    "Generated flows are validated without operator review. ***"
)


class Orchestrator:
    """Coordinates the retrieval, approval, validation and debug stages."""

    def __init__(
        self,
        config: AppConfig,
        repository: Sequence[TestCase],
        index: Optional[VectorIndex] = None,
        embedding_client=None,
        reranker_client=None,
        generation_client=None,
        classifier: Optional[StepClassifier] = None,
        runs_dir: Optional[str | Path] = None,
    ):
        self.config = config
        self.repository = list(repository)
        self.index = index
        self.embedding = embedding_client or make_embedding_client(config)
        self.reranker = reranker_client or make_reranker_client(config)
        self.generation = generation_client or make_generation_client(config)
        self.classifier = classifier or make_classifier(config)
        self.runs_dir = Path(runs_dir or config.runs_dir)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    # ------------------------------------------------------------------
    # persistence

    def _run_dir(self, run_id: str) -> Path:
        return self.runs_dir / run_id

    def _lock(self, run_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(run_id, threading.Lock())

    def _persist(self, record: RunRecord) -> None:
        _atomic_write(
            self._run_dir(record.run_id) / "record.json", canonical_json(record.to_dict())
        )

    def _persist_artifact(self, run_id: str, name: str, content: str) -> None:
        _atomic_write(self._run_dir(run_id) / name, content)

    def _read_artifact(self, run_id: str, name: str) -> str:
        path = self._run_dir(run_id) / name
        if not path.exists():
            raise RunIntegrityError(f"run {run_id}: missing artifact {name}")
        return path.read_text(encoding="utf-8")

    def resume_run(self, run_id: str) -> RunRecord:
        """Reload a persisted run, checking its artifacts are intact."""
        record_path = self._run_dir(run_id) / "record.json"
        if not record_path.exists():
            raise UnknownRunError(f"no persisted run with id {run_id}")
        try:
            record = RunRecord.from_dict(json.loads(record_path.read_text(encoding="utf-8")))
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise RunIntegrityError(f"run {run_id}: corrupted record file: {exc}") from exc

        expected = ["logs.json"]
        if record.state not in (RunState.CREATED, RunState.FLOW_PENDING):
            expected.append("flow.json")
        if record.has_matrix:
            expected.append("matrix.json")
        if record.state is RunState.COMPLETED:
            expected.append("report.json")
        for name in expected:
            if not (self._run_dir(run_id) / name).exists():
                raise RunIntegrityError(f"run {run_id}: missing artifact {name}")
        return record

    def list_runs(self) -> list[str]:
        if not self.runs_dir.exists():
            return []
        return sorted(p.name for p in self.runs_dir.iterdir() if (p / "record.json").exists())

    # ------------------------------------------------------------------
    # workflow

    def _ingest_log_source(self, log_source: str | Path | bytes) -> tuple[str, str]:
        """Return (canonical_or_raw_json, origin) for the uploaded log source."""
        if isinstance(log_source, bytes):
            return log_source.decode("utf-8"), "<upload>"
        path = Path(log_source)
        data = path.read_bytes()
        if data[:4] in (b"\xd4\xc3\xb2\xa1", b"\xa1\xb2\xc3\xd4", b"\x0a\x0d\x0d\x0a"):
            if self.config.dissector is None:
                raise OrchestratorError(
                    "log source is a packet capture but no dissector is configured"
                )
            sequence = dissect_capture(path, self.config.dissector)
            return to_canonical_json(sequence), str(path)
        return data.decode("utf-8"), str(path)

    def create_run(
        self,
        tc_id: str,
        log_source: str | Path | bytes,
        run_id: Optional[str] = None,
        auto_approve: bool = False,
        operator: str = "auto-approve",
    ) -> RunRecord:
        """Start a run: generate the flow and park it for approval.

        With auto_approve the HITL gate is bypassed (a prominent notice is
        logged and printed) and the run continues straight through
        validation; intended for CI with deterministic backends only.
        """
        case = find_case(self.repository, tc_id)
        run_id = run_id or f"{tc_id.lower()}-{uuid.uuid4().hex[:12]}"
        if (self._run_dir(run_id) / "record.json").exists():
            raise OrchestratorError(f"run id {run_id} already exists")
        record = RunRecord(run_id=run_id, tc_id=tc_id)
        record.state_history.append(record.state.value)

        log_text, origin = self._ingest_log_source(log_source)
        record.log_origin = origin
        self._persist_artifact(run_id, "logs.json", log_text)
        self._persist(record)

        with self._lock(run_id):
            record.transition(RunState.FLOW_PENDING)
            self._persist(record)
            started = time.perf_counter()
            try:
                flow, ticket = self._draft_flow(case)
            except Exception as exc:
                return self._abort(record, f"flow generation failed: {exc}")
            record.timings["flow_generation"] = time.perf_counter() - started
            record.flow = flow
            record.ticket = ticket.to_dict()
            self._persist_artifact(run_id, "flow.json", canonical_json(flow.to_dict()))
            record.transition(RunState.AWAITING_APPROVAL)
            self._persist(record)

        if auto_approve:
            print(AUTO_APPROVE_NOTICE)
            logger.warning(AUTO_APPROVE_NOTICE)
            return self.apply_approval(run_id, approve=True, operator=operator)
        return record

    def _draft_flow(self, case: TestCase) -> tuple[ProceduralFlow, ApprovalTicket]:
        if self.index is None or len(self.index) == 0:
            raise OrchestratorError("no specification index available for flow generation")
        query = format_query(case)
        result = retrieve(query, self.index, self.embedding, self.config.k_retrieve)
        result = rerank(result, self.reranker, self.config.k_final)
        flow = generate_flow(query, result.ranked, self.generation, self.config.retry)
        top_docs = top_documents(result.ranked, limit=self.config.approval_docs)
        pending, ticket = submit_for_approval(flow, top_docs)
        return pending, ticket

    def approval_payload(self, run_id: str) -> dict:
        record = self.resume_run(run_id)
        if record.state is not RunState.AWAITING_APPROVAL:
            raise StateTransitionError(
                f"run {run_id} is not awaiting approval (state {record.state.value})"
            )
        assert record.ticket is not None
        return record.ticket

    def apply_approval(
        self,
        run_id: str,
        approve: bool,
        operator: str,
        edited_steps: Optional[Sequence[str]] = None,
        idempotency_key: Optional[str] = None,
    ) -> RunRecord:
        """Apply the operator's decision to a parked run.

        Approval moves the run through validation (and debug on a failed
        validation) to Completed. Rejection returns it to FlowPending with
        the operator's edits applied and resubmits the edited draft.
        """
        with self._lock(run_id):
            record = self.resume_run(run_id)
            if idempotency_key and idempotency_key in record.applied_keys:
                logger.info("run %s: idempotent replay of key %s", run_id, idempotency_key)
                return record
            if record.state is not RunState.AWAITING_APPROVAL:
                raise StateTransitionError(
                    f"run {run_id} is not awaiting approval (state {record.state.value})"
                )
            assert record.flow is not None
            if idempotency_key:
                record.applied_keys.append(idempotency_key)

            if not approve:
                _, draft = reject_flow(record.flow, operator, edited_steps)
                record.transition(RunState.FLOW_PENDING)
                pending, ticket = submit_for_approval(draft, [
                    # The ticket documents are unchanged by an edit.
                    _doc_ref_from_dict(d) for d in (record.ticket or {}).get("documents", [])
                ])
                record.flow = pending
                record.ticket = ticket.to_dict()
                self._persist_artifact(
                    run_id, "flow.json", canonical_json(pending.to_dict())
                )
                record.transition(RunState.AWAITING_APPROVAL)
                self._persist(record)
                return record

            record.flow = approve_flow(record.flow, operator)
            self._persist_artifact(run_id, "flow.json", canonical_json(record.flow.to_dict()))
            record.transition(RunState.VALIDATING)
            self._persist(record)
            return self._validate_and_complete(record)

    def _validate_and_complete(self, record: RunRecord) -> RunRecord:
        assert record.flow is not None
        try:
            logs = parse_log_file(
                self._read_artifact(record.run_id, "logs.json"), origin=record.log_origin
            )
        except Exception as exc:
            return self._abort(record, f"log parsing failed: {exc}")

        started = time.perf_counter()
        try:
            record.val_verdict = run_validate(record.flow, logs, self.classifier)
        except AbortedRunError as exc:
            return self._abort(record, f"validation aborted: {exc}")
        record.timings["validation"] = time.perf_counter() - started
        self._persist(record)

        if record.val_verdict.kind is VerdictKind.FAIL:
            record.transition(RunState.DEBUGGING)
            self._persist(record)
            started = time.perf_counter()
            try:
                matrix, record.debug_verdict = run_debug(
                    record.flow,
                    logs,
                    self.classifier,
                    strict_chronology=self.config.strict_debug_chronology,
                    max_workers=self.config.debug_workers,
                )
            except AbortedRunError as exc:
                if exc.partial_matrix is not None:
                    self._persist_artifact(
                        record.run_id,
                        "matrix.json",
                        canonical_json(exc.partial_matrix.to_dict()),
                    )
                    record.has_matrix = True
                return self._abort(record, f"debug aborted: {exc}")
            record.timings["debug"] = time.perf_counter() - started
            self._persist_artifact(
                record.run_id, "matrix.json", canonical_json(matrix.to_dict())
            )
            record.has_matrix = True

        record.transition(RunState.COMPLETED)
        report = self.compile_report(record)
        self._persist_artifact(record.run_id, "report.json", canonical_json(report))
        self._persist(record)
        return record

    def _abort(self, record: RunRecord, cause: str) -> RunRecord:
        logger.error("run %s aborted: %s", record.run_id, cause)
        record.abort_cause = cause
        record.transition(RunState.ABORTED)
        self._persist(record)
        return record

    # ------------------------------------------------------------------
    # reporting

    def load_matrix(self, run_id: str) -> DebugMatrix:
        record = self.resume_run(run_id)
        if not record.has_matrix:
            raise UnknownRunError(f"run {run_id} has no debug matrix")
        return DebugMatrix.from_dict(json.loads(self._read_artifact(run_id, "matrix.json")))

    def compile_report(self, record: RunRecord) -> dict:
        """Assemble the test summary for a run that reached a verdict."""
        if record.state is RunState.ABORTED:
            raise OrchestratorError(
                f"run {record.run_id} aborted ({record.abort_cause}); see the run record"
            )
        if record.val_verdict is None:
            raise OrchestratorError(f"run {record.run_id} has no validation verdict yet")
        case = find_case(self.repository, record.tc_id)
        assert record.flow is not None
        report = {
            "version": REPORT_SCHEMA_VERSION,
            "run_id": record.run_id,
            "test_case": case.to_dict(),
            "log_origin": record.log_origin,
            "flow": record.flow.to_dict(),
            "verdicts": {
                "validation": record.val_verdict.to_dict(),
                "debug": record.debug_verdict.to_dict() if record.debug_verdict else None,
            },
            "matrix_artifact": "matrix.json" if record.has_matrix else None,
            "state_history": list(record.state_history),
            "config_hash": config_hash(self.config),
            "timings_seconds": {k: round(v, 6) for k, v in record.timings.items()},
            "generated_at": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        }
        return report

    def get_report(self, run_id: str) -> dict:
        record = self.resume_run(run_id)
        if record.state is not RunState.COMPLETED:
            raise StateTransitionError(
                f"run {run_id} has no report (state {record.state.value})"
            )
        return json.loads(self._read_artifact(run_id, "report.json"))


def _doc_ref_from_dict(data: dict):
    from .flows import DocReference

    return DocReference(
        doc_id=data["doc_id"],
        rank=data["rank"],
        excerpt=data["excerpt"],
        section=data.get("section"),
    )

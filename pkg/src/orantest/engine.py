"""Greedy chronological validation and exhaustive debug analysis.

``validate`` walks the log once, matching flow steps in order: a hit advances
both the step counter and the log cursor (one entry cannot satisfy two
steps), a miss advances the cursor only. The outcome is binary Pass/Fail.

``debug`` classifies every (step, log index) cell, then derives the verdict
from each step's earliest occurrence: all steps present and chronological is
a Pass, present but out of order a Partial Pass, any step absent a Fail. The
order check between consecutive earliest occurrences is strictly "later step
at an earlier index"; two steps sharing an index do not violate it. That is
deliberately looser than the single-entry rule of the greedy pass, so the two
algorithms can disagree on the same trace (Pass vs Partial Pass); the
``strict_chronology`` flag tightens the check for callers who want the
single-entry rule in both places.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

from .classifier import ClassificationResult, Label, StepClassifier
from .flows import ApprovalState, FlowStep, ProceduralFlow
from .logs import LogSequence

logger = logging.getLogger(__name__)

MATRIX_SCHEMA_VERSION = 1


class EngineError(Exception):
    """Base class for validation engine failures."""


class InvalidFlowError(EngineError):
    """The flow cannot be validated (no steps)."""


class ApprovalGateError(EngineError):
    """Validation was attempted on a flow that is not Approved."""


class IncompleteMatrixError(EngineError):
    """classify_outcome needs every (step, log index) cell."""


class AbortedRunError(EngineError):
    """A classifier error aborted the run; partial evidence is attached."""

    def __init__(
        self,
        message: str,
        partial_assignment: Optional[list[tuple[int, int]]] = None,
        partial_matrix: Optional["DebugMatrix"] = None,
    ):
        super().__init__(message)
        self.partial_assignment = partial_assignment or []
        self.partial_matrix = partial_matrix


class VerdictKind(str, Enum):
    PASS = "pass"
    PARTIAL_PASS = "partial_pass"
    FAIL = "fail"


@dataclass(frozen=True)
class Verdict:
    """Outcome with evidence.

    matched_assignment holds the greedy (step, log index) matches for the
    validation pass, or the per-step earliest occurrences for debug.
    """

    kind: VerdictKind
    matched_assignment: tuple[tuple[int, int], ...] = ()
    missing_steps: frozenset[int] = frozenset()
    out_of_order_pairs: tuple[tuple[tuple[int, int], tuple[int, int]], ...] = ()
    inference: str = ""

    def __post_init__(self):
        if self.kind is VerdictKind.PASS and (self.missing_steps or self.out_of_order_pairs):
            raise EngineError("Pass verdict cannot carry missing or out-of-order evidence")
        if self.kind is VerdictKind.PARTIAL_PASS and (
            self.missing_steps or not self.out_of_order_pairs
        ):
            raise EngineError(
                "Partial Pass requires no missing steps and at least one out-of-order pair"
            )
        if self.kind is VerdictKind.FAIL and not self.missing_steps:
            raise EngineError("Fail verdict must name the missing steps")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "matched_assignment": [list(pair) for pair in self.matched_assignment],
            "missing_steps": sorted(self.missing_steps),
            "out_of_order_pairs": [
                [list(a), list(b)] for a, b in self.out_of_order_pairs
            ],
            "inference": self.inference,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Verdict":
        return cls(
            kind=VerdictKind(data["kind"]),
            matched_assignment=tuple(tuple(p) for p in data.get("matched_assignment", [])),
            missing_steps=frozenset(data.get("missing_steps", [])),
            out_of_order_pairs=tuple(
                (tuple(a), tuple(b)) for a, b in data.get("out_of_order_pairs", [])
            ),
            inference=data.get("inference", ""),
        )


def same_outcome(a: Verdict, b: Verdict) -> bool:
    """Equality on the decision content, ignoring the prose inference."""
    return (
        a.kind == b.kind
        and a.matched_assignment == b.matched_assignment
        and a.missing_steps == b.missing_steps
        and a.out_of_order_pairs == b.out_of_order_pairs
    )


@dataclass
class DebugMatrix:
    """Classification results for (step, log index) cells.

    Complete matrices cover every cell of 1..m x 1..n; partial matrices occur
    only when a run aborted and are kept for inspection.
    """

    m: int
    n: int
    results: dict[tuple[int, int], ClassificationResult] = field(default_factory=dict)

    def add(self, result: ClassificationResult) -> None:
        key = (result.step_ordinal, result.log_index)
        if not (1 <= key[0] <= self.m and 1 <= key[1] <= self.n):
            raise EngineError(f"cell {key} outside matrix bounds {self.m}x{self.n}")
        if key in self.results:
            raise EngineError(f"duplicate cell {key}")
        self.results[key] = result

    def get(self, s: int, i: int) -> Optional[ClassificationResult]:
        return self.results.get((s, i))

    @property
    def complete(self) -> bool:
        return len(self.results) == self.m * self.n

    def executed_cells(self) -> list[tuple[int, int]]:
        return sorted(k for k, r in self.results.items() if r.executed)

    def to_dict(self) -> dict:
        return {
            "version": MATRIX_SCHEMA_VERSION,
            "m": self.m,
            "n": self.n,
            "cells": [self.results[k].to_dict() for k in sorted(self.results)],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DebugMatrix":
        matrix = cls(m=data["m"], n=data["n"])
        for cell in data["cells"]:
            matrix.add(ClassificationResult.from_dict(cell))
        return matrix


def _require_approved(flow: ProceduralFlow, operation: str) -> None:
    if flow.approval is not ApprovalState.APPROVED:
        raise ApprovalGateError(
            f"{operation} requires an Approved flow, got {flow.approval.value}"
        )


def validate(
    flow: ProceduralFlow,
    logs: LogSequence,
    classifier: StepClassifier,
) -> Verdict:
    """Greedy chronological matching; Pass iff every step is found in order.

    The classifier is consulted at most once per log entry, never on an entry
    at or before the one that satisfied the previous step.
    """
    _require_approved(flow, "validate")
    m = len(flow.steps)
    if m == 0:
        raise InvalidFlowError("flow has no steps")
    n = len(logs)
    if n == 0:
        return Verdict(
            kind=VerdictKind.FAIL,
            missing_steps=frozenset(range(1, m + 1)),
            inference="empty log",
        )

    assignment: list[tuple[int, int]] = []
    s, i = 1, 1
    while s <= m and i <= n:
        step = flow.steps[s - 1]
        record = logs[i - 1]
        try:
            result = classifier.classify(step, record)
        except Exception as exc:
            raise AbortedRunError(
                f"classifier failed on step {s}, log index {i}: {exc}",
                partial_assignment=assignment,
            ) from exc
        if result.executed:
            assignment.append((s, i))
            s += 1
            i += 1
        else:
            i += 1

    if s > m:
        return Verdict(
            kind=VerdictKind.PASS,
            matched_assignment=tuple(assignment),
            inference=f"all {m} steps observed in chronological order",
        )
    step = flow.steps[s - 1]
    return Verdict(
        kind=VerdictKind.FAIL,
        matched_assignment=tuple(assignment),
        missing_steps=frozenset(range(s, m + 1)),
        inference=(
            f"validation stalled at step {s} ({step.message_name or step.description}): "
            f"not observed in the remaining log entries"
        ),
    )


def classify_outcome(
    matrix: DebugMatrix,
    m: Optional[int] = None,
    strict_chronology: bool = False,
    step_names: Optional[Sequence[str]] = None,
) -> Verdict:
    """Recompute the debug verdict from a complete matrix alone.

    Groups executed cells by step, keeps each step's earliest log index,
    sorts by step and flags consecutive pairs where the later step's earliest
    occurrence precedes the earlier step's.
    """
    if m is not None and m != matrix.m:
        raise IncompleteMatrixError(f"matrix covers {matrix.m} steps, expected {m}")
    if not matrix.complete:
        raise IncompleteMatrixError(
            f"matrix has {len(matrix.results)} of {matrix.m * matrix.n} cells"
        )

    def name(s: int) -> str:
        if step_names and 1 <= s <= len(step_names):
            return f"step {s} ({step_names[s - 1]})"
        return f"step {s}"

    executed = matrix.executed_cells()
    earliest: dict[int, int] = {}
    for s, i in executed:
        if s not in earliest or i < earliest[s]:
            earliest[s] = i
    chronology = tuple(sorted(earliest.items()))

    missing = frozenset(range(1, matrix.m + 1)) - set(earliest)
    if missing:
        listed = ", ".join(name(s) for s in sorted(missing))
        return Verdict(
            kind=VerdictKind.FAIL,
            matched_assignment=chronology,
            missing_steps=missing,
            inference=f"missing from every log entry: {listed}",
        )

    violations: list[tuple[tuple[int, int], tuple[int, int]]] = []
    for (s_a, i_a), (s_b, i_b) in zip(chronology, chronology[1:]):
        if i_b < i_a or (strict_chronology and i_b == i_a):
            violations.append(((s_a, i_a), (s_b, i_b)))
    if not violations:
        return Verdict(
            kind=VerdictKind.PASS,
            matched_assignment=chronology,
            inference=f"all {matrix.m} steps present in chronological order",
        )

    if len(violations) == 1:
        (s_a, i_a), (s_b, i_b) = violations[0]
        inference = (
            f"incorrect chronology in signaling sequence: {name(s_b)} executed "
            f"prematurely (earliest at log index {i_b}, before {name(s_a)} at {i_a})"
        )
    else:
        details = "; ".join(
            f"{name(s_b)} at {i_b} precedes {name(s_a)} at {i_a}"
            for (s_a, i_a), (s_b, i_b) in violations
        )
        inference = f"multiple discrepancies in the expected chronology: {details}"
    return Verdict(
        kind=VerdictKind.PARTIAL_PASS,
        matched_assignment=chronology,
        out_of_order_pairs=tuple(violations),
        inference=inference,
    )


def debug(
    flow: ProceduralFlow,
    logs: LogSequence,
    classifier: StepClassifier,
    strict_chronology: bool = False,
    max_workers: int = 1,
) -> tuple[DebugMatrix, Verdict]:
    """Classify every (step, log index) cell and derive the debug verdict.

    Cell classifications are independent; with max_workers > 1 they run in a
    thread pool and are aggregated by cell key, so the verdict is identical
    to the sequential run.
    """
    _require_approved(flow, "debug")
    m = len(flow.steps)
    if m == 0:
        raise InvalidFlowError("flow has no steps")
    n = len(logs)
    matrix = DebugMatrix(m=m, n=n)
    if n == 0:
        verdict = Verdict(
            kind=VerdictKind.FAIL,
            missing_steps=frozenset(range(1, m + 1)),
            inference="empty log",
        )
        return matrix, verdict

    cells = [(s, i) for s in range(1, m + 1) for i in range(1, n + 1)]

    def classify_cell(cell: tuple[int, int]) -> ClassificationResult:
        s, i = cell
        return classifier.classify(flow.steps[s - 1], logs[i - 1])

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            futures = {cell: pool.submit(classify_cell, cell) for cell in cells}
        error: Optional[Exception] = None
        for cell in cells:
            try:
                matrix.add(futures[cell].result())
            except Exception as exc:  # keep the partial matrix for inspection
                error = error or exc
        if error is not None:
            raise AbortedRunError(
                f"classifier failed during debug: {error}", partial_matrix=matrix
            ) from error
    else:
        for cell in cells:
            try:
                matrix.add(classify_cell(cell))
            except Exception as exc:
                raise AbortedRunError(
                    f"classifier failed on cell {cell}: {exc}", partial_matrix=matrix
                ) from exc

    names = [s.message_name or s.description for s in flow.steps]
    verdict = classify_outcome(
        matrix, m=m, strict_chronology=strict_chronology, step_names=names
    )
    return matrix, verdict


class MatrixClassifier:
    """Classifier answering from a precomputed boolean matrix.

    rows[s-1][i-1] is True when step s is executed in log entry i. Used to
    drive the engine in oracle tests and to replay exported matrices.
    """

    name = "matrix"

    def __init__(self, rows: Sequence[Sequence[bool]], confidence: int = 100):
        self.rows = [list(r) for r in rows]
        self.confidence = confidence

    def classify(self, step: FlowStep, record) -> ClassificationResult:
        executed = bool(self.rows[step.ordinal - 1][record.index - 1])
        return ClassificationResult(
            step_ordinal=step.ordinal,
            log_index=record.index,
            label=Label.EXECUTED if executed else Label.NOT_EXECUTED,
            confidence=self.confidence if executed else 100 - self.confidence,
            explanation="matrix-backed classification",
            backend=self.name,
        )


def export_matrix_json(matrix: DebugMatrix) -> dict:
    """Row-major grid export; unclassified cells of partial matrices marked."""
    rows = []
    for s in range(1, matrix.m + 1):
        row = []
        for i in range(1, matrix.n + 1):
            result = matrix.get(s, i)
            if result is None:
                row.append({"step": s, "log_index": i, "label": "unclassified",
                            "confidence": None, "explanation": None})
            else:
                row.append({
                    "step": s,
                    "log_index": i,
                    "label": result.label.value,
                    "confidence": result.confidence,
                    "explanation": result.explanation,
                })
        rows.append(row)
    return {
        "version": MATRIX_SCHEMA_VERSION,
        "m": matrix.m,
        "n": matrix.n,
        "rows": rows,
    }


def export_matrix_csv(matrix: DebugMatrix) -> str:
    """Grid CSV: one row per step, cells formatted label(confidence)."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["step"] + [f"log_{i}" for i in range(1, matrix.n + 1)])
    marks = {Label.EXECUTED: "E", Label.NOT_EXECUTED: "N"}
    for s in range(1, matrix.m + 1):
        row: list[str] = [str(s)]
        for i in range(1, matrix.n + 1):
            result = matrix.get(s, i)
            row.append("U" if result is None else f"{marks[result.label]}({result.confidence})")
        writer.writerow(row)
    return buf.getvalue()


def matrix_to_json_text(matrix: DebugMatrix) -> str:
    return json.dumps(export_matrix_json(matrix), indent=2, sort_keys=True) + "\n"

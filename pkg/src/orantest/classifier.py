"""Step-execution oracles: is flow step s executed in log entry i?

Validation consumes only the binary label; confidence and explanation are
surfaced for the operator. Two interchangeable backends are provided: a
rule-based matcher (normalize message token, substring test against the
dissected fields) and an LLM chat backend constrained to a fixed reply shape.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Protocol

from .backends import BackendError, ChatClient
from .flows import FlowStep, extract_message_name
from .logs import LogRecord

logger = logging.getLogger(__name__)


class ClassificationError(Exception):
    """The classifier backend could not produce a usable result."""

    def __init__(self, message: str, raw_reply: Optional[str] = None):
        super().__init__(message)
        self.raw_reply = raw_reply


class ReplyParseError(ClassificationError):
    """No recognizable Yes/No label in a backend reply."""


class MatchRuleError(ClassificationError):
    """The deterministic rules cannot be applied to this step."""


class Label(str, Enum):
    EXECUTED = "executed"
    NOT_EXECUTED = "not_executed"


@dataclass(frozen=True)
class ClassificationResult:
    """One (step, log index) cell of the validation problem."""

    step_ordinal: int
    log_index: int
    label: Label
    confidence: int
    explanation: str
    backend: str

    def __post_init__(self):
        if not 0 <= self.confidence <= 100:
            raise ClassificationError(
                f"confidence must be 0..100, got {self.confidence}"
            )

    @property
    def executed(self) -> bool:
        return self.label is Label.EXECUTED

    def to_dict(self) -> dict:
        return {
            "step_ordinal": self.step_ordinal,
            "log_index": self.log_index,
            "label": self.label.value,
            "confidence": self.confidence,
            "explanation": self.explanation,
            "backend": self.backend,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ClassificationResult":
        return cls(
            step_ordinal=data["step_ordinal"],
            log_index=data["log_index"],
            label=Label(data["label"]),
            confidence=data["confidence"],
            explanation=data.get("explanation", ""),
            backend=data.get("backend", ""),
        )


class StepClassifier(Protocol):
    name: str

    def classify(self, step: FlowStep, record: LogRecord) -> ClassificationResult: ...


_LABEL_RE = re.compile(r"^\s*(?:label|answer)\s*:?\s*(yes|no)?\s*$", re.IGNORECASE)
_BARE_YESNO = re.compile(r"^\s*(yes|no)\b[.!]?\s*$", re.IGNORECASE)
_CONF_RE = re.compile(r"^\s*confidence(?:\s+score)?\s*:?\s*(\d+)?\s*%?\s*$", re.IGNORECASE)
_BARE_PCT = re.compile(r"^\s*(\d+)\s*%?\s*$")
_EXPL_RE = re.compile(r"^\s*explanation\s*:?\s*(.*)$", re.IGNORECASE)


def parse_classifier_reply(raw: str) -> tuple[Label, int, str]:
    """Extract (label, confidence, explanation) from a backend reply.

    Tolerates "Label:"/"Answer:" prefixes, values on the following line, and
    arbitrary case. Raises ReplyParseError when no Yes/No label is found.
    """
    if not raw or not raw.strip():
        raise ReplyParseError("empty classifier reply", raw_reply=raw)

    lines = raw.splitlines()
    label: Optional[Label] = None
    confidence: Optional[int] = None
    explanation_parts: list[str] = []
    in_explanation = False

    i = 0
    while i < len(lines):
        line = lines[i]
        if not in_explanation:
            m = _LABEL_RE.match(line)
            if m and label is None:
                value = m.group(1)
                if value is None:
                    # Value may sit on the next non-empty line.
                    j = i + 1
                    while j < len(lines) and not lines[j].strip():
                        j += 1
                    if j < len(lines):
                        nxt = _BARE_YESNO.match(lines[j])
                        if nxt:
                            value = nxt.group(1)
                            i = j
                if value is not None:
                    label = Label.EXECUTED if value.lower() == "yes" else Label.NOT_EXECUTED
                i += 1
                continue
            m = _CONF_RE.match(line)
            if m and confidence is None:
                value = m.group(1)
                if value is None:
                    j = i + 1
                    while j < len(lines) and not lines[j].strip():
                        j += 1
                    if j < len(lines):
                        nxt = _BARE_PCT.match(lines[j])
                        if nxt:
                            value = nxt.group(1)
                            i = j
                if value is not None:
                    confidence = max(0, min(100, int(value)))
                i += 1
                continue
            m = _EXPL_RE.match(line)
            if m:
                in_explanation = True
                if m.group(1).strip():
                    explanation_parts.append(m.group(1).strip())
                i += 1
                continue
        else:
            explanation_parts.append(line)
        i += 1

    if label is None:
        raise ReplyParseError("no recognizable Yes/No label in reply", raw_reply=raw)
    explanation = "\n".join(explanation_parts).strip()
    return label, confidence if confidence is not None else 0, explanation


def normalize_token(text: str) -> str:
    """Uppercase and strip every non-alphanumeric character."""
    return re.sub(r"[^A-Z0-9]", "", text.upper())


@dataclass(frozen=True)
class MatchRules:
    """Deterministic matching configuration.

    strict requires each step to carry (or yield) a canonical message token;
    check_endpoints additionally requires both endpoint labels to appear
    somewhere in the record.
    """

    strict: bool = True
    check_endpoints: bool = False


def deterministic_match(
    step: FlowStep, record: LogRecord, rules: MatchRules = MatchRules()
) -> ClassificationResult:
    """Rule-based executed/not-executed decision.

    The step's message token, normalized to uppercase alphanumerics, must
    appear as a substring of some normalized dissected field. Invariant under
    case and separator changes on either side.
    """
    message = step.message_name or extract_message_name(step.description)
    if not message:
        if rules.strict:
            raise MatchRuleError(
                f"step {step.ordinal} has no canonical message token "
                f"(description: {step.description!r})"
            )
        return ClassificationResult(
            step_ordinal=step.ordinal,
            log_index=record.index,
            label=Label.NOT_EXECUTED,
            confidence=0,
            explanation="no canonical message token to match",
            backend="deterministic",
        )

    needle = normalize_token(message)
    matched_field: Optional[tuple[str, str]] = None
    for proto, fields in record.layers.items():
        for field in fields:
            if needle and needle in normalize_token(field):
                matched_field = (proto, field)
                break
        if matched_field:
            break

    executed = matched_field is not None
    if executed and rules.check_endpoints and step.endpoints:
        blob = normalize_token(
            " ".join(f for fields in record.layers.values() for f in fields)
            + " "
            + " ".join(record.layers)
        )
        for endpoint in step.endpoints:
            if normalize_token(endpoint) not in blob:
                executed = False
                matched_field = None
                break

    if executed and matched_field:
        proto, field = matched_field
        explanation = f"message '{message}' matched field '{field}' in layer '{proto}'"
    else:
        explanation = f"message '{message}' not found in any dissected field"
    return ClassificationResult(
        step_ordinal=step.ordinal,
        log_index=record.index,
        label=Label.EXECUTED if executed else Label.NOT_EXECUTED,
        confidence=100 if executed else 0,
        explanation=explanation,
        backend="deterministic",
    )


class DeterministicClassifier:
    """StepClassifier wrapper around deterministic_match."""

    name = "deterministic"

    def __init__(self, rules: MatchRules = MatchRules()):
        self.rules = rules

    def classify(self, step: FlowStep, record: LogRecord) -> ClassificationResult:
        return deterministic_match(step, record, self.rules)


DEFAULT_PROMPT_TEMPLATE = """\
You check whether one expected signaling step was executed in one dissected
log entry from a 5G O-RAN capture. Decide strictly from the entry's fields:
the step counts as executed only when its message appears in this entry and
the involved components are consistent with it.

Expected step:
{step}

Log entry (JSON):
{record}

Reply in exactly this format:
Label:
<Yes or No>
Confidence Score:
<integer>%
Explanation:
<your reasoning>
"""

_FORMAT_REMINDER = (
    "\n\nYour previous reply did not follow the required format. "
    "Reply again with the Label / Confidence Score / Explanation sections only."
)


def serialize_record(record: LogRecord) -> str:
    return json.dumps(
        {
            "index": record.index,
            "frame": record.source_frame,
            "layers": {k: list(v) for k, v in sorted(record.layers.items())},
        },
        indent=2,
        ensure_ascii=False,
    )


class LlmClassifier:
    """Chat-backend classifier demanding the Label/Confidence/Explanation shape.

    Transport failures are retried by the chat client's policy; an
    unparseable reply gets one re-ask with a format reminder, then the run
    is aborted rather than guessing a label.
    """

    def __init__(
        self,
        chat: ChatClient,
        prompt_template: str = DEFAULT_PROMPT_TEMPLATE,
        system_prompt: str = "You are a meticulous 5G signaling compliance checker.",
    ):
        self._chat = chat
        self._template = prompt_template
        self._system = system_prompt
        self.name = f"llm:{chat.name}"

    def classify(self, step: FlowStep, record: LogRecord) -> ClassificationResult:
        prompt = self._template.format(
            step=step.description, record=serialize_record(record)
        )
        try:
            reply = self._chat.complete(self._system, prompt)
        except BackendError as exc:
            raise ClassificationError(f"classifier backend failed: {exc}") from exc

        try:
            label, confidence, explanation = parse_classifier_reply(reply)
        except ReplyParseError:
            logger.warning(
                "unparseable classifier reply for step %d / log %d; re-asking",
                step.ordinal,
                record.index,
            )
            try:
                reply = self._chat.complete(self._system, prompt + _FORMAT_REMINDER)
            except BackendError as exc:
                raise ClassificationError(f"classifier backend failed: {exc}") from exc
            try:
                label, confidence, explanation = parse_classifier_reply(reply)
            except ReplyParseError as exc:
                raise ClassificationError(
                    "classifier reply unparseable after format reminder",
                    raw_reply=reply,
                ) from exc

        return ClassificationResult(
            step_ordinal=step.ordinal,
            log_index=record.index,
            label=label,
            confidence=confidence,
            explanation=explanation,
            backend=self.name,
        )

"""Expected procedural flows and the human approval gate.

A flow is the ordered list of signaling steps a test case is expected to
produce, written in plain language ("gNB-DU sends UE CONTEXT RELEASE REQUEST
to gNB-CU"). Flows start as drafts from the generation backend and may only
be consumed by validation once an operator has approved them.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Sequence


class FlowError(Exception):
    """Base class for flow construction / state errors."""


class GenerationParseError(FlowError):
    """The generation backend reply contained no parseable numbered steps."""

    def __init__(self, message: str, raw_reply: str = ""):
        super().__init__(message)
        self.raw_reply = raw_reply


class ApprovalStateError(FlowError):
    """An approval-workflow operation was applied in the wrong state."""


class ApprovalState(str, Enum):
    DRAFT = "draft"
    PENDING_APPROVAL = "pending_approval"
    APPROVED = "approved"
    REJECTED = "rejected"


# Component labels that may appear as endpoints in step descriptions.
KNOWN_ENDPOINTS = (
    "gNB-CU-CP",
    "gNB-CU-UP",
    "gNB-CU",
    "gNB-DU",
    "O-CU-CP",
    "O-CU-UP",
    "O-CU",
    "O-DU",
    "O-RU",
    "AMF",
    "SMF",
    "UPF",
    "UE",
    "5GC",
    "gNB",
)

_STEP_LINE = re.compile(r"^\s*(\d+)\s*[.):\-]\s+(.*\S)\s*$")
# A message token is a maximal run of ALL-CAPS words (digits/hyphens allowed).
_UPPER_RUN = re.compile(r"\b([A-Z0-9][A-Z0-9-]*(?:\s+[A-Z0-9][A-Z0-9-]*)+|[A-Z0-9]{4,})\b")
_ENDPOINT_ONLY = {e.upper() for e in KNOWN_ENDPOINTS}


def extract_message_name(description: str) -> Optional[str]:
    """Pick the canonical message token out of a step description.

    Returns the longest run of all-caps words that is not merely a component
    label, e.g. "UE CONTEXT RELEASE REQUEST" from
    "The gNB-DU sends a UE CONTEXT RELEASE REQUEST to the gNB-CU".
    """
    candidates = []
    for match in _UPPER_RUN.finditer(description):
        token = re.sub(r"\s+", " ", match.group(1)).strip()
        words = set(token.split())
        if words and words <= _ENDPOINT_ONLY:
            continue
        candidates.append(token)
    if not candidates:
        return None
    return max(candidates, key=len)


def _endpoint_mentions(description: str) -> list[tuple[int, str]]:
    mentions: list[tuple[int, str]] = []
    for pos in range(len(description)):
        for label in KNOWN_ENDPOINTS:
            if description.startswith(label, pos):
                before = description[pos - 1] if pos else " "
                after_idx = pos + len(label)
                after = description[after_idx] if after_idx < len(description) else " "
                if not before.isalnum() and not after.isalnum() and after != "-":
                    mentions.append((pos, label))
                    break
    return mentions


def extract_endpoints(description: str) -> Optional[tuple[str, str]]:
    """Best-effort (sender, receiver) extraction from a step description.

    The receiver is anchored on the first component mention after " to ",
    so component labels embedded in message names ("UE CONTEXT ...") are
    not mistaken for endpoints.
    """
    mentions = _endpoint_mentions(description)
    if not mentions:
        return None
    sender = mentions[0][1]
    to_idx = description.find(" to ")
    if to_idx >= 0:
        for pos, label in mentions:
            if pos > to_idx:
                return sender, label
    for pos, label in mentions[1:]:
        if label != sender:
            return sender, label
    return None


@dataclass(frozen=True)
class FlowStep:
    """One expected signaling step."""

    ordinal: int
    description: str
    message_name: Optional[str] = None
    endpoints: Optional[tuple[str, str]] = None

    def __post_init__(self):
        if self.ordinal < 1:
            raise FlowError(f"step ordinal must be >= 1, got {self.ordinal}")
        if not self.description.strip():
            raise FlowError(f"step {self.ordinal} has an empty description")

    @classmethod
    def from_description(cls, ordinal: int, description: str) -> "FlowStep":
        return cls(
            ordinal=ordinal,
            description=description,
            message_name=extract_message_name(description),
            endpoints=extract_endpoints(description),
        )


@dataclass(frozen=True)
class Provenance:
    """Which retrieved document chunk backed the generated flow."""

    doc_id: str
    rank: int
    chunk_id: str = ""
    section: Optional[str] = None


@dataclass(frozen=True)
class FlowEdit:
    """One operator modification applied during review."""

    operator: str
    step_ordinal: int
    before: str
    after: str


@dataclass(frozen=True)
class ProceduralFlow:
    """Ordered expected steps plus approval state and audit trail."""

    steps: tuple[FlowStep, ...]
    provenance: tuple[Provenance, ...] = ()
    approval: ApprovalState = ApprovalState.DRAFT
    approved_by: Optional[str] = None
    edits: tuple[FlowEdit, ...] = ()
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        for pos, step in enumerate(self.steps, start=1):
            if step.ordinal != pos:
                raise FlowError(
                    f"step ordinals must be contiguous 1..M: expected {pos}, got {step.ordinal}"
                )

    def __len__(self) -> int:
        return len(self.steps)

    def canonical_text(self) -> str:
        """Numbered steps joined by newlines; the metric-facing serialization."""
        return "\n".join(f"{s.ordinal}. {s.description}" for s in self.steps)

    def to_dict(self) -> dict:
        return {
            "steps": [
                {
                    "ordinal": s.ordinal,
                    "description": s.description,
                    "message_name": s.message_name,
                    "endpoints": list(s.endpoints) if s.endpoints else None,
                }
                for s in self.steps
            ],
            "provenance": [
                {"doc_id": p.doc_id, "rank": p.rank, "chunk_id": p.chunk_id, "section": p.section}
                for p in self.provenance
            ],
            "approval": self.approval.value,
            "approved_by": self.approved_by,
            "edits": [
                {
                    "operator": e.operator,
                    "step_ordinal": e.step_ordinal,
                    "before": e.before,
                    "after": e.after,
                }
                for e in self.edits
            ],
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ProceduralFlow":
        steps = tuple(
            FlowStep(
                ordinal=s["ordinal"],
                description=s["description"],
                message_name=s.get("message_name"),
                endpoints=tuple(s["endpoints"]) if s.get("endpoints") else None,
            )
            for s in data["steps"]
        )
        provenance = tuple(
            Provenance(
                doc_id=p["doc_id"],
                rank=p["rank"],
                chunk_id=p.get("chunk_id", ""),
                section=p.get("section"),
            )
            for p in data.get("provenance", [])
        )
        edits = tuple(
            FlowEdit(
                operator=e["operator"],
                step_ordinal=e["step_ordinal"],
                before=e["before"],
                after=e["after"],
            )
            for e in data.get("edits", [])
        )
        return cls(
            steps=steps,
            provenance=provenance,
            approval=ApprovalState(data.get("approval", "draft")),
            approved_by=data.get("approved_by"),
            edits=edits,
            notes=tuple(data.get("notes", ())),
        )


def parse_numbered_steps(text: str) -> tuple[list[FlowStep], bool]:
    """Parse "1. ..." lines into steps, renumbering any gaps.

    Returns (steps, renumbered) where renumbered is True when the source
    numbering was not already contiguous from 1.
    """
    raw: list[tuple[int, str]] = []
    for line in text.splitlines():
        m = _STEP_LINE.match(line)
        if m:
            raw.append((int(m.group(1)), m.group(2)))
    steps = [
        FlowStep.from_description(pos, description)
        for pos, (_, description) in enumerate(raw, start=1)
    ]
    renumbered = any(seen != s.ordinal for (seen, _), s in zip(raw, steps))
    return steps, renumbered


def flow_from_text(text: str, approval: ApprovalState = ApprovalState.DRAFT) -> ProceduralFlow:
    """Build a flow from numbered plain text (descriptor ground truth, CLI input)."""
    steps, renumbered = parse_numbered_steps(text)
    if not steps:
        raise GenerationParseError("no numbered steps found in flow text", raw_reply=text)
    notes = ("source numbering normalized to 1..M",) if renumbered else ()
    return ProceduralFlow(steps=tuple(steps), approval=approval, notes=notes)


@dataclass(frozen=True)
class DocReference:
    """A document excerpt shown to the operator next to the draft flow."""

    doc_id: str
    rank: int
    excerpt: str
    section: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "rank": self.rank,
            "excerpt": self.excerpt,
            "section": self.section,
        }


@dataclass(frozen=True)
class ApprovalTicket:
    """Payload handed to the operator for review."""

    flow: ProceduralFlow
    documents: tuple[DocReference, ...]

    def to_dict(self) -> dict:
        return {
            "flow": self.flow.to_dict(),
            "documents": [d.to_dict() for d in self.documents],
        }


def submit_for_approval(
    flow: ProceduralFlow, top_specs: Sequence[DocReference]
) -> tuple[ProceduralFlow, ApprovalTicket]:
    """Move a draft to PendingApproval and expose the top document excerpts."""
    if flow.approval is not ApprovalState.DRAFT:
        raise ApprovalStateError(
            f"only Draft flows can be submitted, flow is {flow.approval.value}"
        )
    pending = replace(flow, approval=ApprovalState.PENDING_APPROVAL)
    return pending, ApprovalTicket(flow=pending, documents=tuple(top_specs))


def approve_flow(flow: ProceduralFlow, operator: str) -> ProceduralFlow:
    if flow.approval is not ApprovalState.PENDING_APPROVAL:
        raise ApprovalStateError(
            f"cannot approve a flow in state {flow.approval.value}"
        )
    if not operator:
        raise ApprovalStateError("approval requires an operator identifier")
    return replace(flow, approval=ApprovalState.APPROVED, approved_by=operator)


def reject_flow(
    flow: ProceduralFlow,
    operator: str,
    edited_steps: Optional[Sequence[str]] = None,
) -> tuple[ProceduralFlow, ProceduralFlow]:
    """Reject a pending flow, optionally carrying operator edits.

    Returns (rejected_original, new_draft). The new draft reuses the original
    steps with the operator's edits applied and logged.
    """
    if flow.approval is not ApprovalState.PENDING_APPROVAL:
        raise ApprovalStateError(f"cannot reject a flow in state {flow.approval.value}")
    rejected = replace(flow, approval=ApprovalState.REJECTED)

    steps = list(flow.steps)
    edits: list[FlowEdit] = list(flow.edits)
    if edited_steps:
        if len(edited_steps) != len(steps):
            raise ApprovalStateError(
                f"edited step list must have {len(steps)} entries, got {len(edited_steps)}"
            )
        for i, new_text in enumerate(edited_steps):
            if new_text != steps[i].description:
                edits.append(
                    FlowEdit(
                        operator=operator,
                        step_ordinal=i + 1,
                        before=steps[i].description,
                        after=new_text,
                    )
                )
                steps[i] = FlowStep.from_description(i + 1, new_text)
    draft = ProceduralFlow(
        steps=tuple(steps),
        provenance=flow.provenance,
        approval=ApprovalState.DRAFT,
        edits=tuple(edits),
        notes=flow.notes,
    )
    return rejected, draft

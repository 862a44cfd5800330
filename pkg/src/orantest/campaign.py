"""Batch validation campaigns over labeled fixture traces.

A campaign manifest lists trace instances (several instances may share one
test case, e.g. simulated failure variants), each with a ground-truth label
and optional expected verdicts. The runner validates every instance with the
ground-truth flow from the repository descriptor and tallies the confusion
matrix.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import yaml

from .classifier import StepClassifier
from .engine import DebugMatrix, Verdict, VerdictKind, debug as run_debug, \
    validate as run_validate
from .flows import ApprovalState, ProceduralFlow, flow_from_text
from .logs import parse_log_file
from .metrics import ConfusionMatrix, score_run, validation_accuracy
from .repository import TestCase, find_case, normalize_label

logger = logging.getLogger(__name__)


class CampaignError(Exception):
    pass


@dataclass(frozen=True)
class CampaignInstance:
    instance_id: str
    tc_id: str
    log_path: Path
    ground_truth: str  # pass | partial_pass | fail
    expected_val: Optional[str] = None
    expected_debug: Optional[str] = None


@dataclass
class InstanceResult:
    instance: CampaignInstance
    val_verdict: Verdict
    debug_verdict: Optional[Verdict] = None
    matrix: Optional[DebugMatrix] = None

    @property
    def predicted(self) -> tuple[VerdictKind, Optional[VerdictKind]]:
        return (
            self.val_verdict.kind,
            self.debug_verdict.kind if self.debug_verdict else None,
        )


@dataclass
class CampaignOutcome:
    results: list[InstanceResult]
    confusion: ConfusionMatrix
    accuracy: float
    mismatches: list[str] = field(default_factory=list)


def load_campaign(manifest_path: str | Path) -> list[CampaignInstance]:
    manifest_path = Path(manifest_path)
    data = yaml.safe_load(manifest_path.read_text(encoding="utf-8"))
    if not isinstance(data, dict) or "instances" not in data:
        raise CampaignError(f"{manifest_path}: manifest needs an 'instances' list")
    instances = []
    for entry in data["instances"]:
        instances.append(
            CampaignInstance(
                instance_id=entry["instance"],
                tc_id=entry["test_case"],
                log_path=manifest_path.parent / entry["log"],
                ground_truth=normalize_label(entry["ground_truth"]),
                expected_val=(
                    normalize_label(entry["expected_val"]) if entry.get("expected_val") else None
                ),
                expected_debug=(
                    normalize_label(entry["expected_debug"])
                    if entry.get("expected_debug")
                    else None
                ),
            )
        )
    ids = [i.instance_id for i in instances]
    if len(set(ids)) != len(ids):
        raise CampaignError("instance ids must be unique")
    return instances


def campaign_flow(case: TestCase) -> ProceduralFlow:
    """The descriptor's ground-truth flow, approved on behalf of the campaign.

    Campaign flows were authored and reviewed by the test engineer who wrote
    the descriptor, so they enter validation pre-approved.
    """
    if not case.ground_truth_flow:
        raise CampaignError(f"test case {case.id} has no ground-truth flow")
    flow = flow_from_text(case.ground_truth_flow, approval=ApprovalState.DRAFT)
    from .flows import approve_flow, submit_for_approval

    pending, _ = submit_for_approval(flow, [])
    return approve_flow(pending, operator="campaign")


def run_campaign(
    instances: Sequence[CampaignInstance],
    repository: Sequence[TestCase],
    classifier: StepClassifier,
    strict_chronology: bool = False,
    debug_on_fail: bool = True,
) -> CampaignOutcome:
    """Validate every instance and score the campaign.

    Debug runs only on instances whose greedy validation failed, mirroring
    the production workflow.
    """
    results: list[InstanceResult] = []
    mismatches: list[str] = []
    for instance in instances:
        case = find_case(list(repository), instance.tc_id)
        flow = campaign_flow(case)
        logs = parse_log_file(
            instance.log_path.read_bytes(), origin=str(instance.log_path)
        )
        val_verdict = run_validate(flow, logs, classifier)
        result = InstanceResult(instance=instance, val_verdict=val_verdict)
        if val_verdict.kind is VerdictKind.FAIL and debug_on_fail:
            result.matrix, result.debug_verdict = run_debug(
                flow, logs, classifier, strict_chronology=strict_chronology
            )
        results.append(result)

        if instance.expected_val and val_verdict.kind.value != instance.expected_val:
            mismatches.append(
                f"{instance.instance_id}: validation verdict {val_verdict.kind.value}, "
                f"expected {instance.expected_val}"
            )
        if instance.expected_debug:
            got = result.debug_verdict.kind.value if result.debug_verdict else None
            if got != instance.expected_debug:
                mismatches.append(
                    f"{instance.instance_id}: debug verdict {got}, "
                    f"expected {instance.expected_debug}"
                )

    truth = {r.instance.instance_id: r.instance.ground_truth for r in results}
    predicted = {r.instance.instance_id: r.predicted for r in results}
    confusion = score_run(truth, predicted)
    accuracy = validation_accuracy(confusion)
    return CampaignOutcome(
        results=results, confusion=confusion, accuracy=accuracy, mismatches=mismatches
    )

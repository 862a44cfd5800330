"""Campaign scoring: embedding flow distance and validation accuracy.

The flow distance embeds the generated and ground-truth flow texts (their
canonical numbered serialization) and takes the Euclidean norm of the
difference, so 0 means identical flows and symmetry / triangle inequality
hold by construction. Campaign accuracy treats validation as binary: only a
clean greedy Pass counts as a predicted pass; Partial Pass is a failure
category on both the truth and prediction side.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional

from .backends import EmbeddingClient
from .engine import VerdictKind


class MetricError(Exception):
    pass


class ScoringError(MetricError):
    pass


class UndefinedAccuracyError(MetricError):
    pass


@dataclass(frozen=True)
class FlowDistance:
    value: float
    embedding_dimension: int
    backend: str

    def __post_init__(self):
        if self.value < 0:
            raise MetricError(f"distance cannot be negative: {self.value}")


def flow_distance(
    generated: str, truth: str, embedding_client: EmbeddingClient
) -> FlowDistance:
    """Euclidean distance between the two flow embeddings."""
    if not generated.strip() or not truth.strip():
        raise MetricError("flow texts must be non-empty")
    vec_g, vec_t = embedding_client.embed([generated, truth])
    if len(vec_g) != len(vec_t):
        raise MetricError(
            f"embedding dimensions differ: {len(vec_g)} vs {len(vec_t)}"
        )
    value = math.sqrt(sum((g - t) ** 2 for g, t in zip(vec_g, vec_t)))
    return FlowDistance(
        value=value,
        embedding_dimension=len(vec_g),
        backend=embedding_client.name,
    )


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise MetricError("confusion matrix counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def to_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}


_TRUTH_PASS = {VerdictKind.PASS, "pass", "Pass"}


def _truth_to_binary(label) -> int:
    value = getattr(label, "value", label)
    if isinstance(value, str):
        value = value.strip().lower().replace(" ", "_").replace("-", "_")
    if value == "pass":
        return 1
    if value in ("partial_pass", "partialpass", "fail"):
        return 0
    raise ScoringError(f"unknown ground-truth label: {label!r}")


def score_run(
    ground_truth: Mapping[str, object],
    predicted: Mapping[str, tuple[VerdictKind, Optional[VerdictKind]]],
) -> ConfusionMatrix:
    """Tally the campaign confusion matrix.

    Ground truth maps to 1 only for Pass (Partial Pass counts as fail). The
    prediction is 1 exactly when the greedy validation verdict is Pass; a
    debug outcome of Fail or Partial Pass both stay a predicted fail.
    """
    if set(ground_truth) != set(predicted):
        missing = set(ground_truth) ^ set(predicted)
        raise ScoringError(f"case sets differ between truth and predictions: {sorted(missing)}")
    tp = fp = tn = fn = 0
    for case_id in ground_truth:
        truth = _truth_to_binary(ground_truth[case_id])
        val_verdict, _debug_verdict = predicted[case_id]
        pred = 1 if val_verdict is VerdictKind.PASS else 0
        if truth == 1 and pred == 1:
            tp += 1
        elif truth == 0 and pred == 1:
            fp += 1
        elif truth == 0 and pred == 0:
            tn += 1
        else:
            fn += 1
    return ConfusionMatrix(tp=tp, fp=fp, tn=tn, fn=fn)


def validation_accuracy(cm: ConfusionMatrix) -> float:
    """(tp + tn) / total, computed exactly before conversion."""
    if cm.total == 0:
        raise UndefinedAccuracyError("accuracy undefined on an empty confusion matrix")
    return float(Fraction(cm.tp + cm.tn, cm.total))


def distances_to_csv(distances: Mapping[str, Mapping[str, float]]) -> str:
    """Case x backend distance table for heatmap-style comparison."""
    backends = sorted({b for row in distances.values() for b in row})
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["case"] + backends)
    for case_id in sorted(distances):
        row = [case_id] + [
            f"{distances[case_id][b]:.6f}" if b in distances[case_id] else ""
            for b in backends
        ]
        writer.writerow(row)
    return buf.getvalue()

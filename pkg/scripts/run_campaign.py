#!/usr/bin/env python3
"""Run the full fixture campaign and print the per-instance verdict table.

Validates every trace in fixtures/campaign.yaml against its test case's
ground-truth flow with the deterministic classifier, runs the debug analysis
on failed validations, and prints the confusion matrix and accuracy.

Usage: python scripts/run_campaign.py [--fixtures fixtures] [--strict]
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from orantest.campaign import load_campaign, run_campaign
from orantest.classifier import DeterministicClassifier
from orantest.repository import load_repository


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--fixtures", default="fixtures")
    parser.add_argument("--strict", action="store_true",
                        help="use the tightened debug chronology check")
    args = parser.parse_args()
    fixtures = Path(args.fixtures)

    instances = load_campaign(fixtures / "campaign.yaml")
    repository = load_repository(fixtures / "testcases")
    outcome = run_campaign(
        instances, repository, DeterministicClassifier(),
        strict_chronology=args.strict,
    )

    header = f"{'instance':14s} {'truth':13s} {'validation':11s} {'debug':13s} inference"
    print(header)
    print("-" * len(header))
    for result in outcome.results:
        debug_kind = result.debug_verdict.kind.value if result.debug_verdict else "-"
        inference = ""
        if result.debug_verdict:
            inference = result.debug_verdict.inference
        elif result.val_verdict.inference:
            inference = result.val_verdict.inference
        if len(inference) > 60:
            inference = inference[:57] + "..."
        print(f"{result.instance.instance_id:14s} {result.instance.ground_truth:13s} "
              f"{result.val_verdict.kind.value:11s} {debug_kind:13s} {inference}")

    cm = outcome.confusion
    print()
    print(f"confusion matrix: tp={cm.tp} fp={cm.fp} tn={cm.tn} fn={cm.fn}")
    print(f"validation accuracy: {outcome.accuracy}")
    if outcome.mismatches:
        print("\nexpectation mismatches:")
        for line in outcome.mismatches:
            print(f"  {line}")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

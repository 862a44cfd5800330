"""orantest: specification-aware validation of 5G O-RAN control-plane signaling.

Observed signaling traces are checked against expected procedural flows two
ways: a greedy chronological matcher giving a binary Pass/Fail, and an
exhaustive step-by-log-entry matrix whose chronology analysis separates
Partial Pass (everything present, order wrong) from Fail (steps missing).
Flows are drafted from a specification corpus by a retrieval pipeline and
gated behind operator approval before any validation runs.
"""

__version__ = "0.1.0"

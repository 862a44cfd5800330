"""Shared fixtures: fixture paths, synthetic flows/logs, mock backends."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import pytest

from orantest.backends import EchoGenerationClient, HashEmbeddingClient, \
    LexicalRerankerClient
from orantest.classifier import DeterministicClassifier
from orantest.config import AppConfig
from orantest.flows import ApprovalState, FlowStep, ProceduralFlow
from orantest.logs import LogRecord, LogSequence
from orantest.orchestrator import Orchestrator
from orantest.repository import load_repository
from orantest.retrieval import build_index, chunk_document

FIXTURES_DIR = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    assert FIXTURES_DIR.is_dir(), "run scripts/make_fixtures.py first"
    return FIXTURES_DIR


@pytest.fixture(scope="session")
def repository(fixtures_dir):
    return load_repository(fixtures_dir / "testcases")


@pytest.fixture(scope="session")
def corpus_index(fixtures_dir):
    """Index over the fixture corpus with the hash embedding backend."""
    client = HashEmbeddingClient(dimension=1024)
    chunks = [
        chunk
        for doc in sorted((fixtures_dir / "corpus").glob("*.md"))
        for chunk in chunk_document(doc.name, doc.read_text(encoding="utf-8"), 300, 50)
    ]
    return build_index(chunks, client), client


def make_orchestrator(fixtures_dir, repository, corpus_index, runs_dir,
                      classifier=None) -> Orchestrator:
    """Fully offline orchestrator over the fixture repository and corpus."""
    index, embedding = corpus_index
    config = AppConfig(
        runs_dir=str(runs_dir),
        repository_dir=str(fixtures_dir / "testcases"),
    )
    return Orchestrator(
        config,
        repository,
        index=index,
        embedding_client=embedding,
        reranker_client=LexicalRerankerClient(),
        generation_client=EchoGenerationClient(),
        classifier=classifier or DeterministicClassifier(),
        runs_dir=runs_dir,
    )


def synthetic_flow(m: int, approval: ApprovalState = ApprovalState.APPROVED) -> ProceduralFlow:
    """Flow of m placeholder steps; pair with MatrixClassifier."""
    steps = tuple(
        FlowStep(ordinal=s, description=f"synthetic step {s}", message_name=f"STEP {s}")
        for s in range(1, m + 1)
    )
    return ProceduralFlow(steps=steps, approval=approval, approved_by="test")


def synthetic_logs(n: int) -> LogSequence:
    records = tuple(
        LogRecord(index=i, layers={"test": (f"entry {i}",)}, source_frame=i)
        for i in range(1, n + 1)
    )
    return LogSequence(records=records, origin="<synthetic>")


class MappedEmbedding:
    """Embedding client answering from an explicit text -> vector table."""

    def __init__(self, table: dict[str, Sequence[float]], dimension: int,
                 name: str = "mapped-embedding"):
        self.table = {k: list(v) for k, v in table.items()}
        self.dimension = dimension
        self.name = name

    def embed(self, texts):
        return [list(self.table[t]) for t in texts]


class KeywordReranker:
    """Scores by the highest-priority keyword found in the chunk text."""

    name = "keyword-reranker"

    def __init__(self, scores: dict[str, float], default: float = 0.0):
        self.scores = scores
        self.default = default

    def score(self, query: str, text: str) -> float:
        best = self.default
        for keyword, value in self.scores.items():
            if keyword in text:
                best = max(best, value)
        return best

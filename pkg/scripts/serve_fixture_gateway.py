#!/usr/bin/env python3
"""Serve the HTTP gateway over the fixture repository with offline backends.

Intended for dashboard development and the frontend integration tests:
everything is deterministic, no model servers are contacted.

Usage: python scripts/serve_fixture_gateway.py [--port 8000] [--runs-dir DIR]
       [--token TOKEN]
"""

from __future__ import annotations

import argparse
import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

import uvicorn

from orantest.backends import EchoGenerationClient, HashEmbeddingClient, \
    LexicalRerankerClient
from orantest.classifier import DeterministicClassifier
from orantest.config import AppConfig
from orantest.gateway import create_app
from orantest.orchestrator import Orchestrator
from orantest.repository import load_repository
from orantest.retrieval import build_index, chunk_document


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--fixtures", default="fixtures")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    parser.add_argument("--runs-dir", default=None)
    parser.add_argument("--token", default=None,
                        help="bearer token; default: unauthenticated")
    args = parser.parse_args()

    fixtures = Path(args.fixtures)
    runs_dir = Path(args.runs_dir) if args.runs_dir else Path(tempfile.mkdtemp(prefix="orantest-runs-"))

    embedding = HashEmbeddingClient(dimension=1024)
    chunks = [
        chunk
        for doc in sorted((fixtures / "corpus").glob("*.md"))
        for chunk in chunk_document(doc.name, doc.read_text(encoding="utf-8"), 300, 50)
    ]
    index = build_index(chunks, embedding)
    repository = load_repository(fixtures / "testcases")
    config = AppConfig(runs_dir=str(runs_dir), repository_dir=str(fixtures / "testcases"))
    orchestrator = Orchestrator(
        config,
        repository,
        index=index,
        embedding_client=embedding,
        reranker_client=LexicalRerankerClient(),
        generation_client=EchoGenerationClient(),
        classifier=DeterministicClassifier(),
        runs_dir=runs_dir,
    )
    app = create_app(orchestrator, token=args.token)
    print(f"fixture gateway on http://{args.host}:{args.port}/api/v1 (runs: {runs_dir})")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Specification corpus indexing, retrieval and flow generation.

The corpus (plain-text conversions of 3GPP / O-RAN documents) is segmented
into overlapping word chunks, embedded, and stored in an exact brute-force
vector index. Queries are answered in two stages: Euclidean nearest-neighbor
retrieval, then reranking by a relevance model with a unique-document cap.
The top context is fed to a generation backend to draft procedural flows.
"""

from __future__ import annotations

import json
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .backends import EmbeddingClient, GenerationClient, RerankerClient, RetryPolicy
from .flows import (
    ApprovalState,
    DocReference,
    GenerationParseError,
    ProceduralFlow,
    Provenance,
    parse_numbered_steps,
)

logger = logging.getLogger(__name__)


class RetrievalError(Exception):
    """Base class for retrieval pipeline failures."""


class IndexBuildError(RetrievalError):
    pass


class EmptyIndexError(RetrievalError):
    pass


@dataclass(frozen=True)
class SpecChunk:
    """One corpus segment, traceable back to its source document."""

    chunk_id: str
    doc_id: str
    text: str
    word_count: int
    section: Optional[str] = None

    def __post_init__(self):
        if not self.text:
            raise RetrievalError(f"chunk {self.chunk_id} has empty text")

    def to_dict(self) -> dict:
        return {
            "chunk_id": self.chunk_id,
            "doc_id": self.doc_id,
            "section": self.section,
            "text": self.text,
            "word_count": self.word_count,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SpecChunk":
        return cls(
            chunk_id=data["chunk_id"],
            doc_id=data["doc_id"],
            section=data.get("section"),
            text=data["text"],
            word_count=data["word_count"],
        )


_WORD = re.compile(r"\S+")
_BLANK_LINE = re.compile(r"\n[ \t]*\n")


def chunk_document(
    doc_id: str,
    text: str,
    chunk_words: int = 300,
    overlap_words: int = 50,
) -> list[SpecChunk]:
    """Segment a document into overlapping word windows.

    Consecutive chunks share ``overlap_words`` words and together cover the
    whole document; chunk text is sliced from the original, so line structure
    survives. When a paragraph boundary falls within 10% of the target chunk
    size, the cut snaps to it instead of splitting mid-paragraph.
    """
    if chunk_words <= overlap_words or overlap_words < 0:
        raise RetrievalError(
            f"need chunk_words > overlap_words >= 0, got {chunk_words}/{overlap_words}"
        )
    spans = [m.span() for m in _WORD.finditer(text)]
    if not spans:
        return []
    # boundary k means "a paragraph ends after word k-1"
    boundaries = {
        k
        for k in range(1, len(spans))
        if _BLANK_LINE.search(text[spans[k - 1][1] : spans[k][0]])
    }
    boundaries.add(len(spans))

    tolerance = max(1, int(round(chunk_words * 0.10)))
    chunks: list[SpecChunk] = []
    start = 0
    while True:
        target = start + chunk_words
        if target >= len(spans):
            end = len(spans)
        else:
            near = [
                b
                for b in boundaries
                if abs(b - target) <= tolerance and start + overlap_words < b <= len(spans)
            ]
            end = min(near, key=lambda b: (abs(b - target), b)) if near else target
        body = text[spans[start][0] : spans[end - 1][1]]
        chunks.append(
            SpecChunk(
                chunk_id=f"{doc_id}#{len(chunks):04d}",
                doc_id=doc_id,
                text=body,
                word_count=end - start,
            )
        )
        if end >= len(spans):
            break
        start = end - overlap_words
    return chunks


@dataclass
class VectorIndex:
    """Exact brute-force nearest-neighbor store over chunk embeddings."""

    chunks: list[SpecChunk]
    vectors: np.ndarray  # shape (len(chunks), dimension)
    dimension: int

    def __post_init__(self):
        ids = [c.chunk_id for c in self.chunks]
        if len(set(ids)) != len(ids):
            raise IndexBuildError("chunk_ids must be unique")
        if self.vectors.shape != (len(self.chunks), self.dimension):
            raise IndexBuildError(
                f"vector array shape {self.vectors.shape} does not match "
                f"({len(self.chunks)}, {self.dimension})"
            )

    def __len__(self) -> int:
        return len(self.chunks)

    def save(self, path: str | Path) -> None:
        payload = {
            "version": 1,
            "dimension": self.dimension,
            "chunks": [c.to_dict() for c in self.chunks],
            "vectors": [[float(x) for x in row] for row in self.vectors],
        }
        Path(path).write_text(json.dumps(payload), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "VectorIndex":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        chunks = [SpecChunk.from_dict(c) for c in payload["chunks"]]
        vectors = np.array(payload["vectors"], dtype=np.float64)
        if len(chunks) == 0:
            vectors = vectors.reshape(0, payload["dimension"])
        return cls(chunks=chunks, vectors=vectors, dimension=payload["dimension"])


def build_index(
    chunks: Sequence[SpecChunk],
    embedding_client: EmbeddingClient,
    retry: Optional[RetryPolicy] = None,
    max_workers: int = 1,
    batch_size: int = 64,
) -> VectorIndex:
    """Embed every chunk and assemble the index.

    Embedding calls run in batches, optionally in parallel; results are keyed
    by chunk so the assembled index is independent of completion order.
    """
    retry = retry or RetryPolicy()
    chunks = list(chunks)
    dimension = embedding_client.dimension

    batches = [chunks[i : i + batch_size] for i in range(0, len(chunks), batch_size)]

    def embed_batch(batch: Sequence[SpecChunk]) -> list[list[float]]:
        def call():
            return embedding_client.embed([c.text for c in batch])

        try:
            return retry.run(call, f"embedding batch of {len(batch)}")
        except Exception as exc:
            raise IndexBuildError(
                f"embedding failed for chunk {batch[0].chunk_id}: {exc}"
            ) from exc

    if max_workers > 1 and len(batches) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(embed_batch, batches))
    else:
        results = [embed_batch(b) for b in batches]

    rows: list[list[float]] = []
    for batch, vecs in zip(batches, results):
        for chunk, vec in zip(batch, vecs):
            if len(vec) != dimension:
                raise IndexBuildError(
                    f"chunk {chunk.chunk_id}: embedding has dimension "
                    f"{len(vec)}, expected {dimension}"
                )
            rows.append([float(x) for x in vec])
    vectors = np.array(rows, dtype=np.float64).reshape(len(chunks), dimension)
    return VectorIndex(chunks=chunks, vectors=vectors, dimension=dimension)


@dataclass(frozen=True)
class RankedChunk:
    chunk: SpecChunk
    distance: float
    rerank_score: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "chunk": self.chunk.to_dict(),
            "distance": self.distance,
            "rerank_score": self.rerank_score,
        }


@dataclass(frozen=True)
class RetrievalResult:
    """Ranked chunks for one query, before or after reranking."""

    query: str
    ranked: tuple[RankedChunk, ...]
    k_retrieve: int
    k_final: Optional[int] = None
    warnings: tuple[str, ...] = ()

    def doc_ids(self) -> list[str]:
        return [rc.chunk.doc_id for rc in self.ranked]


def retrieve(
    query: str,
    index: VectorIndex,
    embedding_client: EmbeddingClient,
    k_retrieve: int = 100,
) -> RetrievalResult:
    """Exact Euclidean nearest-neighbor retrieval.

    Returns the k_retrieve chunks closest to the query embedding, sorted by
    ascending distance with ties broken by chunk_id.
    """
    if k_retrieve < 1:
        raise RetrievalError(f"k_retrieve must be >= 1, got {k_retrieve}")
    if len(index) == 0:
        raise EmptyIndexError("cannot retrieve from an empty index")
    query_vec = np.array(embedding_client.embed([query])[0], dtype=np.float64)
    if query_vec.shape != (index.dimension,):
        raise RetrievalError(
            f"query embedding dimension {query_vec.shape} does not match index "
            f"dimension {index.dimension}"
        )
    distances = np.linalg.norm(index.vectors - query_vec, axis=1)
    order = sorted(range(len(index)), key=lambda i: (distances[i], index.chunks[i].chunk_id))
    top = order[: min(k_retrieve, len(order))]
    ranked = tuple(RankedChunk(chunk=index.chunks[i], distance=float(distances[i])) for i in top)
    return RetrievalResult(query=query, ranked=ranked, k_retrieve=k_retrieve)


def rerank(
    result: RetrievalResult,
    reranker_client: RerankerClient,
    k_final: int = 15,
) -> RetrievalResult:
    """Score candidates with the reranker and keep the top unique documents.

    Candidates are re-sorted by descending score (ties -> original distance,
    then chunk_id); only the best-scoring chunk per document survives, up to
    k_final unique documents. A reranker failure demotes that chunk to
    score -inf instead of aborting the run.
    """
    if not result.ranked:
        raise RetrievalError("rerank requires a non-empty candidate list")
    if k_final < 1:
        raise RetrievalError(f"k_final must be >= 1, got {k_final}")

    warnings = list(result.warnings)
    scored: list[RankedChunk] = []
    for rc in result.ranked:
        try:
            score = float(reranker_client.score(result.query, rc.chunk.text))
        except Exception as exc:  # noqa: BLE001 - degrade, HITL review catches it
            warnings.append(f"reranker failed on {rc.chunk.chunk_id}: {exc}")
            logger.warning("reranker failed on %s: %s", rc.chunk.chunk_id, exc)
            score = float("-inf")
        scored.append(replace(rc, rerank_score=score))

    scored.sort(key=lambda rc: (-rc.rerank_score, rc.distance, rc.chunk.chunk_id))

    final: list[RankedChunk] = []
    seen_docs: set[str] = set()
    for rc in scored:
        if rc.chunk.doc_id in seen_docs:
            continue
        seen_docs.add(rc.chunk.doc_id)
        final.append(rc)
        if len(final) == k_final:
            break
    return RetrievalResult(
        query=result.query,
        ranked=tuple(final),
        k_retrieve=result.k_retrieve,
        k_final=k_final,
        warnings=tuple(warnings),
    )


def format_query(test_case) -> str:
    """Render a test case into the structured retrieval/generation query.

    Deterministic template; identical test case metadata yields a
    byte-identical query.
    """
    parts = [f"Give the {test_case.title.rstrip('.')} procedure"]
    components = list(getattr(test_case, "components", []) or [])
    if components:
        if len(components) == 1:
            joined = components[0]
        elif len(components) == 2:
            joined = f"{components[0]} and {components[1]}"
        else:
            joined = ", ".join(components[:-1]) + f", and {components[-1]}"
        parts.append(f"between {joined}")
    query = " ".join(parts) + "."
    interfaces = list(getattr(test_case, "interfaces", []) or [])
    if interfaces:
        query += f" The procedure runs over the {', '.join(interfaces)} interface(s)."
    category = getattr(test_case, "category", None)
    if category:
        value = getattr(category, "value", category)
        query += f" Test category: {value}."
    spec_refs = list(getattr(test_case, "spec_refs", []) or [])
    if spec_refs:
        query += f" Reference specifications: {', '.join(spec_refs)}."
    return query


GENERATION_PROMPT = """\
Using only the specification excerpts below, write the expected signaling
procedure as a numbered list. One step per line, each naming the message and
the sending and receiving components.

{context}

Task: {query}
"""


def _render_context(context: Sequence[RankedChunk]) -> str:
    blocks = []
    for rank, rc in enumerate(context, start=1):
        blocks.append(f"[Document: {rc.chunk.doc_id} | rank {rank}]\n{rc.chunk.text}")
    return "\n\n".join(blocks)


def generate_flow(
    query: str,
    context: Sequence[RankedChunk],
    generation_client: GenerationClient,
    retry: Optional[RetryPolicy] = None,
) -> ProceduralFlow:
    """Draft a procedural flow from the reranked context.

    The reply must contain numbered steps; gaps in the numbering are
    normalized to 1..M with a note. Provenance records every context chunk.
    """
    if not context:
        raise RetrievalError("generate_flow requires non-empty context")
    retry = retry or RetryPolicy()
    prompt = GENERATION_PROMPT.format(context=_render_context(context), query=query)
    reply = retry.run(lambda: generation_client.generate(prompt), "flow generation")

    steps, renumbered = parse_numbered_steps(reply)
    if not steps:
        raise GenerationParseError(
            "generation reply contained no numbered steps", raw_reply=reply
        )
    provenance = tuple(
        Provenance(
            doc_id=rc.chunk.doc_id,
            rank=rank,
            chunk_id=rc.chunk.chunk_id,
            section=rc.chunk.section,
        )
        for rank, rc in enumerate(context, start=1)
    )
    notes = ("generation numbering normalized to 1..M",) if renumbered else ()
    return ProceduralFlow(
        steps=tuple(steps),
        provenance=provenance,
        approval=ApprovalState.DRAFT,
        notes=notes,
    )


def top_documents(context: Sequence[RankedChunk], limit: int = 5) -> list[DocReference]:
    """First unique documents of the context, with their chunk excerpts."""
    refs: list[DocReference] = []
    seen: set[str] = set()
    for rank, rc in enumerate(context, start=1):
        if rc.chunk.doc_id in seen:
            continue
        seen.add(rc.chunk.doc_id)
        excerpt = rc.chunk.text if len(rc.chunk.text) <= 600 else rc.chunk.text[:600] + " ..."
        refs.append(
            DocReference(
                doc_id=rc.chunk.doc_id,
                rank=rank,
                excerpt=excerpt,
                section=rc.chunk.section,
            )
        )
        if len(refs) == limit:
            break
    return refs

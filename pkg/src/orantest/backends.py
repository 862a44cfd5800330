"""Pluggable model backends: embeddings, reranking, generation, chat.

Two families are provided behind the same interfaces: deterministic offline
backends (hash embeddings, lexical reranker, echo generation) that make the
full pipeline reproducible in CI without any model server, and HTTP backends
speaking OpenAI-style APIs for real deployments. Auth tokens come from the
environment, never from config files.
"""

from __future__ import annotations

import hashlib
import logging
import math
import os
import re
import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Protocol, Sequence, TypeVar

import httpx

logger = logging.getLogger(__name__)

T = TypeVar("T")


class BackendError(Exception):
    """A backend call failed after exhausting retries."""


@dataclass(frozen=True)
class RetryPolicy:
    attempts: int = 3
    backoff_seconds: float = 0.2

    def run(self, fn: Callable[[], T], what: str) -> T:
        last: Exception | None = None
        for attempt in range(1, self.attempts + 1):
            try:
                return fn()
            except Exception as exc:  # noqa: BLE001 - backend transport errors vary
                last = exc
                logger.warning("%s failed (attempt %d/%d): %s", what, attempt, self.attempts, exc)
                if attempt < self.attempts:
                    time.sleep(self.backoff_seconds * attempt)
        raise BackendError(f"{what} failed after {self.attempts} attempts: {last}") from last


class EmbeddingClient(Protocol):
    name: str
    dimension: int

    def embed(self, texts: Sequence[str]) -> list[list[float]]: ...


class RerankerClient(Protocol):
    name: str

    def score(self, query: str, text: str) -> float: ...


class GenerationClient(Protocol):
    name: str

    def generate(self, prompt: str) -> str: ...


class ChatClient(Protocol):
    name: str

    def complete(self, system: str, user: str) -> str: ...


_TOKEN = re.compile(r"[a-z0-9]+")


def _tokens(text: str) -> list[str]:
    return _TOKEN.findall(text.lower())


class HashEmbeddingClient:
    """Deterministic bag-of-words embedding from blake2 token hashes.

    Stable across processes and platforms; used for CI and oracle tests
    where reproducibility matters more than semantic quality.
    """

    def __init__(self, dimension: int = 1024, name: str = "hash-embedding"):
        if dimension < 2:
            raise ValueError("embedding dimension must be >= 2")
        self.dimension = dimension
        self.name = name

    def _embed_one(self, text: str) -> list[float]:
        vec = [0.0] * self.dimension
        for token in _tokens(text):
            digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
            idx = int.from_bytes(digest[:4], "big") % self.dimension
            sign = 1.0 if digest[4] & 1 else -1.0
            vec[idx] += sign
        norm = math.sqrt(sum(v * v for v in vec))
        if norm > 0:
            vec = [v / norm for v in vec]
        return vec

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        return [self._embed_one(t) for t in texts]


class LexicalRerankerClient:
    """Token-overlap relevance score in [0, 1] (Dice coefficient)."""

    name = "lexical-reranker"

    def score(self, query: str, text: str) -> float:
        q = set(_tokens(query))
        t = set(_tokens(text))
        if not q or not t:
            return 0.0
        return 2.0 * len(q & t) / (len(q) + len(t))


class EchoGenerationClient:
    """Deterministic generation that extracts numbered steps from context.

    Scans the prompt's document blocks in rank order and returns the first
    block that contains numbered procedural lines. Suitable for fixture
    corpora where the retrieved chunk literally contains the flow.
    """

    name = "echo-generation"

    _numbered = re.compile(r"^\s*\d+\s*[.):\-]\s+\S", re.MULTILINE)

    def generate(self, prompt: str) -> str:
        blocks = re.split(r"^\[Document: .*\]$", prompt, flags=re.MULTILINE)
        for block in blocks[1:]:
            lines = [
                line
                for line in block.splitlines()
                if self._numbered.match(line)
            ]
            if lines:
                return "\n".join(lines)
        return ""


class ScriptedChatClient:
    """Chat backend answering from a fixed queue or a callable (tests, demos)."""

    def __init__(self, replies=None, responder: Optional[Callable[[str, str], str]] = None,
                 name: str = "scripted-chat"):
        self._replies = list(replies or [])
        self._responder = responder
        self.name = name
        self.calls: list[tuple[str, str]] = []

    def complete(self, system: str, user: str) -> str:
        self.calls.append((system, user))
        if self._responder is not None:
            return self._responder(system, user)
        if not self._replies:
            raise BackendError("scripted chat has no replies left")
        return self._replies.pop(0)


def _auth_headers(token_env: Optional[str]) -> dict[str, str]:
    if not token_env:
        return {}
    token = os.environ.get(token_env, "")
    if not token:
        logger.warning("auth token env %s is unset; sending unauthenticated requests", token_env)
        return {}
    return {"Authorization": f"Bearer {token}"}


@dataclass
class HttpBackendConfig:
    base_url: str
    model: str
    token_env: Optional[str] = None
    timeout_seconds: float = 60.0
    max_concurrent: int = 4
    retry: RetryPolicy = field(default_factory=RetryPolicy)


class HttpEmbeddingClient:
    """OpenAI-style ``POST /embeddings`` backend."""

    def __init__(self, config: HttpBackendConfig, dimension: int,
                 transport: Optional[httpx.BaseTransport] = None):
        self._config = config
        self.dimension = dimension
        self.name = f"http-embedding:{config.model}"
        self._client = httpx.Client(
            base_url=config.base_url,
            timeout=config.timeout_seconds,
            transport=transport,
        )

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        def call() -> list[list[float]]:
            resp = self._client.post(
                "/embeddings",
                json={"model": self._config.model, "input": list(texts)},
                headers=_auth_headers(self._config.token_env),
            )
            resp.raise_for_status()
            data = resp.json()["data"]
            return [item["embedding"] for item in sorted(data, key=lambda d: d["index"])]

        return self._config.retry.run(call, f"embedding call ({self.name})")


class HttpRerankerClient:
    """``POST /rerank`` backend returning a relevance score per document."""

    def __init__(self, config: HttpBackendConfig, transport: Optional[httpx.BaseTransport] = None):
        self._config = config
        self.name = f"http-reranker:{config.model}"
        self._client = httpx.Client(
            base_url=config.base_url,
            timeout=config.timeout_seconds,
            transport=transport,
        )

    def score(self, query: str, text: str) -> float:
        def call() -> float:
            resp = self._client.post(
                "/rerank",
                json={"model": self._config.model, "query": query, "documents": [text]},
                headers=_auth_headers(self._config.token_env),
            )
            resp.raise_for_status()
            return float(resp.json()["results"][0]["relevance_score"])

        return self._config.retry.run(call, f"rerank call ({self.name})")


class HttpChatClient:
    """OpenAI-style ``POST /chat/completions`` backend with a concurrency cap."""

    def __init__(self, config: HttpBackendConfig, transport: Optional[httpx.BaseTransport] = None,
                 audit: bool = False):
        self._config = config
        self.name = f"http-chat:{config.model}"
        self._audit = audit
        self._semaphore = threading.Semaphore(config.max_concurrent)
        self._client = httpx.Client(
            base_url=config.base_url,
            timeout=config.timeout_seconds,
            transport=transport,
        )

    def complete(self, system: str, user: str) -> str:
        payload = {
            "model": self._config.model,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ],
            "temperature": 0,
        }
        if self._audit:
            logger.info("chat request (%s): %s", self.name, payload)

        def call() -> str:
            with self._semaphore:
                resp = self._client.post(
                    "/chat/completions",
                    json=payload,
                    headers=_auth_headers(self._config.token_env),
                )
            resp.raise_for_status()
            reply = resp.json()["choices"][0]["message"]["content"]
            if self._audit:
                logger.info("chat reply (%s): %s", self.name, reply)
            return reply

        return self._config.retry.run(call, f"chat call ({self.name})")


class HttpGenerationClient:
    """Flow generation on top of the chat endpoint."""

    def __init__(self, chat: ChatClient,
                 system_prompt: str = "You write numbered 5G signaling procedures."):
        self._chat = chat
        self._system = system_prompt
        self.name = f"generation:{chat.name}"

    def generate(self, prompt: str) -> str:
        return self._chat.complete(self._system, prompt)

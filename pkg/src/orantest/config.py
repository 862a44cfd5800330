"""Application configuration and backend factories.

One YAML file describes backend endpoints, retrieval parameters and workflow
policy. Secrets never live in the file; HTTP backends name the environment
variable holding their token. The config hash is embedded in run reports so
a report is traceable to the exact configuration that produced it.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import yaml

from . import classifier as classifier_mod
from .backends import (
    EchoGenerationClient,
    HashEmbeddingClient,
    HttpBackendConfig,
    HttpChatClient,
    HttpEmbeddingClient,
    HttpGenerationClient,
    HttpRerankerClient,
    LexicalRerankerClient,
    RetryPolicy,
)
from .classifier import DeterministicClassifier, LlmClassifier, MatchRules
from .logs import DissectorConfig


class ConfigError(Exception):
    pass


@dataclass
class BackendSpec:
    """One backend slot: which implementation and how to reach it."""

    kind: str
    base_url: Optional[str] = None
    model: Optional[str] = None
    dimension: Optional[int] = None
    token_env: Optional[str] = None
    timeout_seconds: float = 60.0
    max_concurrent: int = 4


def _default_backends() -> dict[str, BackendSpec]:
    return {
        # Retrieval embeddings default to 1024 dimensions, the flow metric
        # to a separate 2048-dimension slot.
        "embedding": BackendSpec(kind="hash", dimension=1024),
        "metric_embedding": BackendSpec(kind="hash", dimension=2048),
        "reranker": BackendSpec(kind="lexical"),
        "generation": BackendSpec(kind="echo"),
        "classifier": BackendSpec(kind="deterministic"),
    }


@dataclass
class AppConfig:
    runs_dir: str = "runs"
    repository_dir: str = "testcases"
    index_path: str = "index.json"
    k_retrieve: int = 100
    k_final: int = 15
    approval_docs: int = 5
    chunk_words: int = 300
    overlap_words: int = 50
    distance_metric: str = "euclidean"  # "cosine" is an explicitly-labeled deviation
    strict_debug_chronology: bool = False
    debug_workers: int = 1
    match_endpoints: bool = False
    audit_mode: bool = False
    api_token_env: str = "ORANTEST_API_TOKEN"
    retry: RetryPolicy = field(default_factory=RetryPolicy)
    backends: dict[str, BackendSpec] = field(default_factory=_default_backends)
    dissector: Optional[DissectorConfig] = None
    classifier_prompt: str = classifier_mod.DEFAULT_PROMPT_TEMPLATE

    def backend(self, slot: str) -> BackendSpec:
        try:
            return self.backends[slot]
        except KeyError as exc:
            raise ConfigError(f"no backend configured for slot {slot!r}") from exc


def load_config(path: str | Path) -> AppConfig:
    data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    return config_from_dict(data)


def config_from_dict(data: dict) -> AppConfig:
    if not isinstance(data, dict):
        raise ConfigError("config document must be a mapping")
    cfg = AppConfig()
    simple_fields = {
        "runs_dir", "repository_dir", "index_path", "k_retrieve", "k_final",
        "approval_docs", "chunk_words", "overlap_words", "distance_metric",
        "strict_debug_chronology", "debug_workers", "match_endpoints",
        "audit_mode", "api_token_env", "classifier_prompt",
    }
    for key, value in data.items():
        if key in simple_fields:
            setattr(cfg, key, value)
        elif key == "retry":
            cfg.retry = RetryPolicy(**value)
        elif key == "backends":
            for slot, spec in value.items():
                cfg.backends[slot] = BackendSpec(**spec)
        elif key == "dissector":
            cfg.dissector = DissectorConfig(**value)
        else:
            raise ConfigError(f"unknown config key {key!r}")
    if cfg.distance_metric not in ("euclidean", "cosine"):
        raise ConfigError(f"unknown distance_metric {cfg.distance_metric!r}")
    if cfg.chunk_words <= cfg.overlap_words:
        raise ConfigError("chunk_words must exceed overlap_words")
    return cfg


# Storage locations do not affect behavior; the snapshot hash must be stable
# when a deployment is relocated.
_PATH_FIELDS = ("runs_dir", "repository_dir", "index_path")


def config_hash(cfg: AppConfig) -> str:
    """Stable digest of the behavior-affecting configuration (no secrets)."""
    data = asdict(cfg)
    for field_name in _PATH_FIELDS:
        data.pop(field_name, None)
    canonical = json.dumps(data, sort_keys=True, default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _http_config(spec: BackendSpec, retry: RetryPolicy) -> HttpBackendConfig:
    if not spec.base_url or not spec.model:
        raise ConfigError(f"http backend needs base_url and model, got {spec}")
    return HttpBackendConfig(
        base_url=spec.base_url,
        model=spec.model,
        token_env=spec.token_env,
        timeout_seconds=spec.timeout_seconds,
        max_concurrent=spec.max_concurrent,
        retry=retry,
    )


def make_embedding_client(cfg: AppConfig, slot: str = "embedding"):
    spec = cfg.backend(slot)
    if spec.kind == "hash":
        return HashEmbeddingClient(dimension=spec.dimension or 1024)
    if spec.kind == "http":
        if not spec.dimension:
            raise ConfigError(f"http embedding backend {slot!r} needs a dimension")
        return HttpEmbeddingClient(_http_config(spec, cfg.retry), dimension=spec.dimension)
    raise ConfigError(f"unknown embedding backend kind {spec.kind!r}")


def make_reranker_client(cfg: AppConfig):
    spec = cfg.backend("reranker")
    if spec.kind == "lexical":
        return LexicalRerankerClient()
    if spec.kind == "http":
        return HttpRerankerClient(_http_config(spec, cfg.retry))
    raise ConfigError(f"unknown reranker backend kind {spec.kind!r}")


def make_generation_client(cfg: AppConfig):
    spec = cfg.backend("generation")
    if spec.kind == "echo":
        return EchoGenerationClient()
    if spec.kind == "http":
        chat = HttpChatClient(_http_config(spec, cfg.retry), audit=cfg.audit_mode)
        return HttpGenerationClient(chat)
    raise ConfigError(f"unknown generation backend kind {spec.kind!r}")


def make_classifier(cfg: AppConfig):
    spec = cfg.backend("classifier")
    if spec.kind == "deterministic":
        return DeterministicClassifier(MatchRules(check_endpoints=cfg.match_endpoints))
    if spec.kind == "llm":
        chat = HttpChatClient(_http_config(spec, cfg.retry), audit=cfg.audit_mode)
        return LlmClassifier(chat, prompt_template=cfg.classifier_prompt)
    raise ConfigError(f"unknown classifier backend kind {spec.kind!r}")

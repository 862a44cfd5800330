"""Chronological log model for dissected control-plane captures.

A capture is dissected into one entry per packet; each entry maps protocol
identifiers (``f1ap``, ``ngap``, ``e1ap``, ``nas-5gs``, ...) to the list of
field strings the dissector emitted for that protocol. The validation engine
consumes these entries strictly in order, so indices are contiguous 1..N and
renumbered after any protocol filtering.
"""

from __future__ import annotations

import json
import logging
import subprocess
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

logger = logging.getLogger(__name__)

# Dissectors are not consistent about protocol naming; map known aliases to
# the stable lowercase keys the classifier prompt relies on.
PROTOCOL_ALIASES = {
    "flap": "f1ap",
    "fiap": "f1ap",
    "nas-5gs": "nas-5gs",
    "nas_5gs": "nas-5gs",
    "mac_nr": "mac-nr",
}


class LogError(Exception):
    """Base class for log ingestion failures."""


class LogParseError(LogError):
    """The input is not valid JSON."""

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message)
        self.offset = offset


class LogSchemaError(LogError):
    """A packet object does not follow the protocol -> [field, ...] shape."""

    def __init__(self, message: str, protocol: str | None = None):
        super().__init__(message)
        self.protocol = protocol


class EmptySequenceError(LogError):
    """No packets remained after parsing and filtering."""


class DissectorConfigError(LogError):
    """The external dissector is missing or misconfigured."""


class DissectorError(LogError):
    """The external dissector ran but exited non-zero."""

    def __init__(self, message: str, stderr: str = ""):
        super().__init__(message)
        self.stderr = stderr


@dataclass(frozen=True)
class LogRecord:
    """One dissected packet in chronological order."""

    index: int
    layers: Mapping[str, tuple[str, ...]]
    source_frame: int
    timestamp_us: Optional[int] = None

    def __post_init__(self):
        if self.index < 1:
            raise LogSchemaError(f"record index must be >= 1, got {self.index}")
        if not self.layers:
            raise LogSchemaError(f"record {self.index} has no protocol layers")

    def protocols(self) -> tuple[str, ...]:
        return tuple(sorted(self.layers))

    def to_dict(self) -> dict:
        out: dict = {
            "frame": self.source_frame,
            "layers": {k: list(v) for k, v in sorted(self.layers.items())},
        }
        if self.timestamp_us is not None:
            out["timestamp"] = self.timestamp_us
        return out


@dataclass(frozen=True)
class LogSequence:
    """Ordered dissected packets with contiguous 1-based indices."""

    records: tuple[LogRecord, ...]
    origin: str = "<memory>"
    protocol_filter: Optional[frozenset[str]] = None

    def __post_init__(self):
        for pos, rec in enumerate(self.records, start=1):
            if rec.index != pos:
                raise LogSchemaError(
                    f"records must be numbered contiguously: expected {pos}, got {rec.index}"
                )

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i: int) -> LogRecord:
        return self.records[i]


def normalize_protocol(key: str) -> str:
    k = key.strip().lower()
    return PROTOCOL_ALIASES.get(k, k)


def _clean_fields(protocol: str, value: object) -> tuple[str, ...]:
    """Validate one protocol's field list, preserving dissector output."""
    if not isinstance(value, list) or any(not isinstance(f, str) for f in value):
        raise LogSchemaError(
            f"protocol {protocol!r} must map to an array of strings",
            protocol=protocol,
        )
    # Verbatim except trailing whitespace.
    return tuple(f.rstrip() for f in value)


def _normalize_packet(
    packet: Mapping[str, object],
    position: int,
    retained: Optional[frozenset[str]],
) -> Optional[tuple[dict[str, tuple[str, ...]], int, Optional[int]]]:
    """Normalize one packet object; None when no protocol is retained."""
    if "layers" in packet and isinstance(packet.get("layers"), dict):
        raw_layers = packet["layers"]
        frame = packet.get("frame", position)
        timestamp = packet.get("timestamp")
    else:
        raw_layers = packet
        frame = position
        timestamp = None
    if not isinstance(frame, int):
        raise LogSchemaError(f"packet {position}: 'frame' must be an integer")
    if timestamp is not None and not isinstance(timestamp, int):
        raise LogSchemaError(f"packet {position}: 'timestamp' must be integer microseconds")

    layers: dict[str, tuple[str, ...]] = {}
    for key, value in raw_layers.items():  # type: ignore[union-attr]
        proto = normalize_protocol(str(key))
        if retained is not None and proto not in retained:
            continue
        layers[proto] = _clean_fields(proto, value)
    if not layers:
        return None
    return layers, frame, timestamp


def _load_packets(content: bytes | str) -> list[Mapping[str, object]]:
    """Decode a JSON array of packets or one packet object per line."""
    if isinstance(content, bytes):
        text = content.decode("utf-8")
    else:
        text = content
    stripped = text.lstrip()
    if stripped.startswith("["):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise LogParseError(f"malformed JSON: {exc.msg}", offset=exc.pos) from exc
        if not isinstance(doc, list):
            raise LogSchemaError("top-level JSON value must be an array of packet objects")
        packets = doc
    else:
        packets = []
        offset = 0
        for line in text.splitlines(keepends=True):
            if line.strip():
                try:
                    packets.append(json.loads(line))
                except json.JSONDecodeError as exc:
                    raise LogParseError(
                        f"malformed JSON on line: {exc.msg}", offset=offset + exc.pos
                    ) from exc
            offset += len(line)
    for pos, packet in enumerate(packets, start=1):
        if not isinstance(packet, dict):
            raise LogSchemaError(f"packet {pos} is not a JSON object")
    return packets


def parse_log_file(
    content: bytes | str,
    protocol_filter: Optional[Iterable[str]] = None,
    origin: str = "<memory>",
) -> LogSequence:
    """Parse dissected packets into a LogSequence.

    Accepts either a JSON array of packet objects or one object per line.
    A packet object is either the raw protocol -> [fields] map or the
    canonical ``{"layers": {...}, "frame": n, "timestamp": us}`` shape.
    Packets with no retained protocol are dropped and the survivors are
    renumbered contiguously from 1.
    """
    retained = (
        frozenset(normalize_protocol(p) for p in protocol_filter)
        if protocol_filter is not None
        else None
    )
    packets = _load_packets(content)

    records: list[LogRecord] = []
    for pos, packet in enumerate(packets, start=1):
        normalized = _normalize_packet(packet, pos, retained)
        if normalized is None:
            continue
        layers, frame, timestamp = normalized
        records.append(
            LogRecord(
                index=len(records) + 1,
                layers=layers,
                source_frame=frame,
                timestamp_us=timestamp,
            )
        )
    if not records:
        raise EmptySequenceError(
            f"{origin}: no packets remained after filtering"
            + (f" (filter={sorted(retained)})" if retained else "")
        )
    return LogSequence(records=tuple(records), origin=origin, protocol_filter=retained)


def to_canonical_json(sequence: LogSequence) -> str:
    """Serialize to the canonical on-disk schema (round-trips exactly)."""
    payload = [rec.to_dict() for rec in sequence.records]
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _flatten_value(prefix: str, value: object, out: list[str]) -> None:
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten_value(k, v, out)
    elif isinstance(value, list):
        for v in value:
            _flatten_value(prefix, v, out)
    else:
        out.append(f"{prefix}: {value}" if prefix else str(value))


def _flatten_tshark_export(doc: list) -> list[dict]:
    """Flatten tshark ``-T json`` output into protocol -> [field, ...] packets."""
    packets = []
    for entry in doc:
        layers = entry.get("_source", {}).get("layers", {})
        packet: dict[str, list[str]] = {}
        for proto, tree in layers.items():
            fields: list[str] = []
            _flatten_value("", tree, fields)
            packet[proto] = fields
        packets.append(packet)
    return packets


@dataclass
class DissectorConfig:
    """External dissector invocation (tshark-style JSON export)."""

    executable: str
    decode_as: dict[str, str] = field(default_factory=dict)
    export_args: list[str] = field(default_factory=lambda: ["-T", "json"])
    extra_args: list[str] = field(default_factory=list)
    timeout_seconds: float = 120.0


def dissect_capture(
    capture_path: str | Path,
    dissector: DissectorConfig,
    protocol_filter: Optional[Iterable[str]] = None,
) -> LogSequence:
    """Run the configured dissector on a capture and parse its JSON export."""
    capture_path = Path(capture_path)
    if not capture_path.exists():
        raise DissectorConfigError(f"capture file not found: {capture_path}")
    cmd: list[str] = [dissector.executable, "-r", str(capture_path)]
    for selector, proto in sorted(dissector.decode_as.items()):
        cmd += ["-d", f"{selector},{proto}"]
    cmd += dissector.export_args + dissector.extra_args
    logger.info("dissecting %s: %s", capture_path, " ".join(cmd))
    try:
        proc = subprocess.run(
            cmd, capture_output=True, text=True, timeout=dissector.timeout_seconds
        )
    except FileNotFoundError as exc:
        raise DissectorConfigError(f"dissector executable not found: {dissector.executable}") from exc
    if proc.returncode != 0:
        raise DissectorError(
            f"dissector exited with code {proc.returncode}", stderr=proc.stderr
        )

    content = proc.stdout
    try:
        doc = json.loads(content)
    except json.JSONDecodeError as exc:
        raise LogParseError(f"dissector emitted malformed JSON: {exc.msg}", offset=exc.pos) from exc
    if isinstance(doc, list) and doc and isinstance(doc[0], dict) and "_source" in doc[0]:
        content = json.dumps(_flatten_tshark_export(doc))
    return parse_log_file(content, protocol_filter, origin=str(capture_path))

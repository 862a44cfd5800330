"""Test case repository: one human-editable YAML descriptor per case."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional

import yaml

logger = logging.getLogger(__name__)


class RepositoryError(Exception):
    pass


class Category(str, Enum):
    INTEROPERABILITY = "interoperability"
    E2E = "e2e"
    CONFORMANCE = "conformance"
    SECURITY = "security"


_GROUND_TRUTH_LABELS = {"pass", "partial_pass", "fail"}


def normalize_label(value: str) -> str:
    label = value.strip().lower().replace(" ", "_").replace("-", "_")
    if label == "partialpass":
        label = "partial_pass"
    if label not in _GROUND_TRUTH_LABELS:
        raise RepositoryError(f"unknown ground-truth label {value!r}")
    return label


@dataclass(frozen=True)
class TestCase:
    """One predefined test case with its metadata and optional ground truth."""

    id: str
    title: str
    category: Category
    components: tuple[str, ...] = ()
    interfaces: tuple[str, ...] = ()
    spec_refs: tuple[str, ...] = ()
    description: str = ""
    ground_truth_flow: Optional[str] = None
    ground_truth_label: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "title": self.title,
            "category": self.category.value,
            "components": list(self.components),
            "interfaces": list(self.interfaces),
            "spec_refs": list(self.spec_refs),
            "description": self.description,
            "ground_truth_flow": self.ground_truth_flow,
            "ground_truth_label": self.ground_truth_label,
        }


def _string_list(data: dict, key: str, source: str) -> tuple[str, ...]:
    value = data.get(key, [])
    if value is None:
        return ()
    if not isinstance(value, list) or any(not isinstance(v, str) for v in value):
        raise RepositoryError(f"{source}: field '{key}' must be a list of strings")
    return tuple(value)


def parse_descriptor(data: dict, source: str = "<memory>") -> TestCase:
    if not isinstance(data, dict):
        raise RepositoryError(f"{source}: descriptor must be a mapping")
    for required in ("id", "title", "category"):
        if not data.get(required):
            raise RepositoryError(f"{source}: missing required field '{required}'")
    try:
        category = Category(str(data["category"]).strip().lower())
    except ValueError as exc:
        raise RepositoryError(
            f"{source}: field 'category' must be one of "
            f"{[c.value for c in Category]}, got {data['category']!r}"
        ) from exc
    label = data.get("ground_truth_label")
    if label is not None:
        try:
            label = normalize_label(str(label))
        except RepositoryError as exc:
            raise RepositoryError(f"{source}: field 'ground_truth_label': {exc}") from exc
    flow_text = data.get("ground_truth_flow")
    if flow_text is not None and not isinstance(flow_text, str):
        raise RepositoryError(f"{source}: field 'ground_truth_flow' must be a string")
    return TestCase(
        id=str(data["id"]),
        title=str(data["title"]),
        category=category,
        components=_string_list(data, "components", source),
        interfaces=_string_list(data, "interfaces", source),
        spec_refs=_string_list(data, "spec_refs", source),
        description=str(data.get("description", "")),
        ground_truth_flow=flow_text,
        ground_truth_label=label,
    )


def load_repository(path: str | Path) -> list[TestCase]:
    """Load every descriptor under path, rejecting duplicates.

    Descriptors are YAML files (one case per file), sorted by filename for a
    stable order.
    """
    root = Path(path)
    if not root.is_dir():
        raise RepositoryError(f"repository path is not a directory: {root}")
    cases: list[TestCase] = []
    seen: dict[str, str] = {}
    for file in sorted(root.glob("*.y*ml")):
        try:
            data = yaml.safe_load(file.read_text(encoding="utf-8"))
        except yaml.YAMLError as exc:
            raise RepositoryError(f"{file.name}: not valid YAML: {exc}") from exc
        case = parse_descriptor(data, source=file.name)
        if case.id in seen:
            raise RepositoryError(
                f"duplicate test case id {case.id!r} in {file.name} and {seen[case.id]}"
            )
        seen[case.id] = file.name
        cases.append(case)
    logger.info("loaded %d test cases from %s", len(cases), root)
    return cases


def find_case(cases: list[TestCase], tc_id: str) -> TestCase:
    for case in cases:
        if case.id == tc_id:
            return case
    raise RepositoryError(f"unknown test case id: {tc_id}")

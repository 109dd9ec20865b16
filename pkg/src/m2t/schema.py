"""MR schema loading and strict-mode validation.

The schema file (``data/schema.yaml``) lists the dialogue acts, the
video-game attribute inventory with value-type tags, and the per-topic KG
relations with novelty flags and best-effort KG property mappings.  It is
closed over the shipped corpus: validating every corpus MR in strict mode
must raise nothing.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass
from pathlib import Path

import yaml

from .errors import (
    UnknownAttributeError,
    UnknownDialogueActError,
    UnknownRelationError,
    UnknownTopicError,
)
from .mr import KgMr, ViggoMr

VALUE_TYPES = ("free-text", "enumerated", "boolean", "year", "list")


@dataclass(frozen=True)
class KgRelation:
    name: str
    display: tuple[str, ...]
    novel: bool
    pid: str | None
    pid_verified: bool


@dataclass(frozen=True)
class MrSchema:
    """Parsed schema: DA set, attribute types, per-topic relation lists."""

    version: int
    dialogue_acts: dict[str, bool]          # name -> licenses_question
    attributes: dict[str, str]              # name -> value type tag
    kg_relations: dict[str, tuple[KgRelation, ...]]  # topic -> relations

    @property
    def da_names(self) -> frozenset[str]:
        return frozenset(self.dialogue_acts)

    @property
    def question_licensing_das(self) -> frozenset[str]:
        return frozenset(da for da, flag in self.dialogue_acts.items() if flag)

    def topic_relation_surfaces(self, topic: str) -> frozenset[str]:
        """All display forms a relation may take in this topic's MRs."""
        if topic not in self.kg_relations:
            raise UnknownTopicError(f"unknown KG topic {topic!r}")
        return frozenset(
            surface for rel in self.kg_relations[topic] for surface in rel.display
        )

    def novel_relation_names(self, topic: str) -> frozenset[str]:
        if topic not in self.kg_relations:
            raise UnknownTopicError(f"unknown KG topic {topic!r}")
        return frozenset(r.name for r in self.kg_relations[topic] if r.novel)

    def property_id(self, relation: str) -> str | None:
        """Best-effort KG property id for a relation name or display form."""
        for relations in self.kg_relations.values():
            for rel in relations:
                if relation == rel.name or relation in rel.display:
                    return rel.pid
        return None

    def validate_viggo(self, mr: ViggoMr) -> None:
        if mr.dialogue_act not in self.dialogue_acts:
            raise UnknownDialogueActError(f"unknown dialogue act {mr.dialogue_act!r}")
        for attr, _ in mr.slots:
            if attr not in self.attributes:
                raise UnknownAttributeError(f"unknown attribute {attr!r}")

    def validate_kg(self, mr: KgMr) -> None:
        if mr.topic == "other":
            return
        surfaces = self.topic_relation_surfaces(mr.topic)
        for triple in mr.triples:
            if triple.relation not in surfaces:
                raise UnknownRelationError(
                    f"relation {triple.relation!r} not in the {mr.topic} schema"
                )


def load_schema(path: str | Path | None = None) -> MrSchema:
    """Load a schema file; defaults to the one shipped with the package."""
    if path is None:
        resource = importlib.resources.files("m2t").joinpath("data/schema.yaml")
        raw = yaml.safe_load(resource.read_text(encoding="utf-8"))
    else:
        raw = yaml.safe_load(Path(path).read_text(encoding="utf-8"))

    attributes: dict[str, str] = {}
    for entry in raw["attributes"]:
        if entry["type"] not in VALUE_TYPES:
            raise ValueError(f"bad value type {entry['type']!r} for {entry['name']!r}")
        attributes[entry["name"]] = entry["type"]

    kg_relations: dict[str, tuple[KgRelation, ...]] = {}
    for topic, relations in raw["kg_relations"].items():
        kg_relations[topic] = tuple(
            KgRelation(
                name=r["name"],
                display=tuple(r.get("display") or [r["name"]]),
                novel=bool(r.get("novel", False)),
                pid=r.get("pid"),
                pid_verified=bool(r.get("pid_verified", False)),
            )
            for r in relations
        )

    return MrSchema(
        version=int(raw["schema_version"]),
        dialogue_acts={
            d["name"]: bool(d.get("licenses_question", False))
            for d in raw["dialogue_acts"]
        },
        attributes=attributes,
        kg_relations=kg_relations,
    )

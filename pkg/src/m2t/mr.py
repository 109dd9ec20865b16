"""Meaning representations: domain types, parsing, and canonical serialization.

Two MR families are supported:

* KG MRs: an ordered list of (subject, relation, object) knowledge-graph
  triples plus a topic tag.  Textual forms: pipe-delimited
  (``s = r = o | s = r = o``) and parenthesized (``(s, r, o), (s, r, o)``).
* Dialogue-act MRs: a dialogue act plus an ordered list of attribute slots,
  each carrying zero or more values.  Textual forms: the structured form
  (``da(attr[v1, v2], ...)``) and the pipe-delimited QA form
  (``da = yes | attr = v1, v2``).

All values are immutable after construction; every function here is pure and
safe for concurrent use.  Parsing trims ASCII whitespace around tokens but
never case-folds: surface fidelity matters because serialized MRs are embedded
verbatim in prompts.

The textual formats define no escape syntax.  Values containing a reserved
delimiter of the active form are rejected with :class:`EscapingRequiredError`
at serialization time rather than escaped.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (
    AmbiguousCommaSplitError,
    DuplicateAttributeError,
    EscapingRequiredError,
    MrSyntaxError,
)

KG_TOPICS = ("movies", "music", "sports", "tv")

PIPE_FIELD_SEP = " | "
PIPE_KV_SEP = " = "


@dataclass(frozen=True)
class Triple:
    """One (subject, relation, object) knowledge-graph fact.

    Fields are trimmed on construction and must be non-empty afterwards.
    Optional ``subject_id``/``object_id`` carry KG identifiers; they are
    never serialized into the textual forms.
    """

    subject: str
    relation: str
    object: str
    subject_id: str | None = None
    object_id: str | None = None

    def __post_init__(self) -> None:
        for name in ("subject", "relation", "object"):
            value = getattr(self, name).strip()
            if not value:
                raise ValueError(f"triple {name} is empty")
            object.__setattr__(self, name, value)


@dataclass(frozen=True)
class KgMr:
    """An ordered, non-empty list of triples with a topic tag."""

    triples: tuple[Triple, ...]
    topic: str = "other"

    def __post_init__(self) -> None:
        object.__setattr__(self, "triples", tuple(self.triples))
        if not self.triples:
            raise ValueError("KgMr requires at least one triple")
        if self.topic not in KG_TOPICS and self.topic != "other":
            raise ValueError(f"unknown topic {self.topic!r}")

    @property
    def relations(self) -> tuple[str, ...]:
        return tuple(t.relation for t in self.triples)


@dataclass(frozen=True)
class ViggoMr:
    """A dialogue act plus ordered attribute slots.

    Each slot is ``(attribute, values)`` where ``values`` may be empty
    (``request_attribute(has_multiplayer[])``).  An attribute may appear at
    most once; multi-valued attributes carry several values under one name.
    """

    dialogue_act: str
    slots: tuple[tuple[str, tuple[str, ...]], ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if not self.dialogue_act.strip():
            raise ValueError("dialogue act is empty")
        object.__setattr__(self, "dialogue_act", self.dialogue_act.strip())
        slots = tuple((attr, tuple(values)) for attr, values in self.slots)
        seen: set[str] = set()
        for attr, _ in slots:
            if attr in seen:
                raise DuplicateAttributeError(f"attribute {attr!r} appears twice")
            seen.add(attr)
        object.__setattr__(self, "slots", slots)

    def values_of(self, attribute: str) -> tuple[str, ...] | None:
        for attr, values in self.slots:
            if attr == attribute:
                return values
        return None


MeaningRepresentation = KgMr | ViggoMr


# ---------------------------------------------------------------------------
# dialogue-act MRs, structured form: da(attr[v1, v2], attr2[])
# ---------------------------------------------------------------------------

def parse_viggo_mr(text: str, schema=None, strict: bool = False) -> ViggoMr:
    """Parse a structured dialogue-act MR string.

    Grammar: ``da_name '(' [slot (',' slot)*] ')'`` with
    ``slot := attr '[' values ']'`` and comma-separated, possibly empty
    values.  Slot order and multi-values are preserved; whitespace around
    tokens is trimmed.  With ``strict`` and a schema, the dialogue act and
    every attribute must exist in the schema.
    """
    text = text.strip()
    open_idx = text.find("(")
    if open_idx <= 0:
        raise MrSyntaxError(f"missing dialogue act or '(': {text!r}")
    if not text.endswith(")"):
        raise MrSyntaxError(f"MR does not end with ')': {text!r}")
    da = text[:open_idx].strip()
    body = text[open_idx + 1 : -1]

    slots: list[tuple[str, tuple[str, ...]]] = []
    i = 0
    n = len(body)
    while i < n:
        bracket = body.find("[", i)
        if bracket == -1:
            if body[i:].strip():
                raise MrSyntaxError(f"dangling text after last slot: {body[i:]!r}")
            break
        attr = body[i:bracket].strip().lstrip(",").strip()
        if not attr:
            raise MrSyntaxError(f"slot with empty attribute name in {text!r}")
        close = body.find("]", bracket)
        if close == -1:
            raise MrSyntaxError(f"unbalanced '[' in {text!r}")
        inner = body[bracket + 1 : close]
        values = tuple(v.strip() for v in inner.split(",")) if inner.strip() else ()
        slots.append((attr, values))
        i = close + 1

    mr = ViggoMr(dialogue_act=da, slots=tuple(slots))
    if strict and schema is not None:
        schema.validate_viggo(mr)
    return mr


def serialize_viggo_mr(mr: ViggoMr) -> str:
    """Canonical structured form: ``da(attr[v1, v2], attr2[])``."""
    parts = []
    for attr, values in mr.slots:
        for piece in (attr, *values):
            if "[" in piece or "]" in piece or "," in piece:
                raise EscapingRequiredError(
                    f"{piece!r} contains a delimiter reserved by the structured form"
                )
        parts.append(f"{attr}[{', '.join(values)}]")
    return f"{mr.dialogue_act}({', '.join(parts)})"


# ---------------------------------------------------------------------------
# dialogue-act MRs, QA pipe form: da = yes | attr = v1, v2
# ---------------------------------------------------------------------------

def serialize_viggo_qa(mr: ViggoMr) -> str:
    """Pipe-delimited QA form with a leading ``<da> = yes`` field.

    Multi-values are joined by ", " within one field; an empty-value slot
    emits ``attr = `` with an empty right-hand side.  The leading DA field is
    serialization syntax, not a slot.
    """
    fields = [f"{mr.dialogue_act}{PIPE_KV_SEP}yes"]
    for attr, values in mr.slots:
        joined = ", ".join(values)
        for piece in (attr, *values):
            if PIPE_FIELD_SEP in piece or PIPE_KV_SEP in piece:
                raise EscapingRequiredError(
                    f"{piece!r} contains a delimiter reserved by the pipe form"
                )
        fields.append(f"{attr}{PIPE_KV_SEP}{joined}")
    return PIPE_FIELD_SEP.join(fields)


def parse_viggo_qa(text: str, schema=None, strict: bool = False) -> ViggoMr:
    """Inverse of :func:`serialize_viggo_qa` on its image."""
    fields = text.split(PIPE_FIELD_SEP)
    head = fields[0]
    da, sep, flag = head.partition(PIPE_KV_SEP)
    if not sep or flag.strip() != "yes" or not da.strip():
        raise MrSyntaxError(f"first field must be '<da> = yes', got {head!r}")
    slots: list[tuple[str, tuple[str, ...]]] = []
    for raw in fields[1:]:
        attr, sep, joined = raw.partition(PIPE_KV_SEP)
        if not sep:
            # an empty-value slot at end of string may lose its trailing space
            if raw.endswith(" ="):
                attr, joined = raw[:-2], ""
            else:
                raise MrSyntaxError(f"field without ' = ' separator: {raw!r}")
        attr = attr.strip()
        if not attr:
            raise MrSyntaxError(f"field with empty attribute: {raw!r}")
        values = tuple(v.strip() for v in joined.split(",")) if joined.strip() else ()
        slots.append((attr, values))
    mr = ViggoMr(dialogue_act=da.strip(), slots=tuple(slots))
    if strict and schema is not None:
        schema.validate_viggo(mr)
    return mr


# ---------------------------------------------------------------------------
# KG MRs, pipe form: s = r = o | s = r = o
# ---------------------------------------------------------------------------

def serialize_kg_s2s(mr: KgMr) -> str:
    """Each triple rendered ``subject = relation = object``, joined by " | "."""
    rendered = []
    for t in mr.triples:
        for piece in (t.subject, t.relation, t.object):
            if PIPE_FIELD_SEP in piece or PIPE_KV_SEP in piece:
                raise EscapingRequiredError(
                    f"{piece!r} contains a delimiter reserved by the pipe form"
                )
        rendered.append(f"{t.subject}{PIPE_KV_SEP}{t.relation}{PIPE_KV_SEP}{t.object}")
    return PIPE_FIELD_SEP.join(rendered)


def parse_kg_s2s(text: str, topic: str = "other") -> KgMr:
    """Parse the pipe-delimited triple form; triples keep textual order."""
    triples: list[Triple] = []
    for raw in text.split(PIPE_FIELD_SEP):
        parts = raw.split(PIPE_KV_SEP)
        if len(parts) != 3:
            raise MrSyntaxError(
                f"expected 'subject = relation = object', got {raw!r}"
            )
        s, r, o = (p.strip() for p in parts)
        if not (s and r and o):
            raise MrSyntaxError(f"empty field in triple {raw!r}")
        triples.append(Triple(s, r, o))
    return KgMr(triples=tuple(triples), topic=topic)


# ---------------------------------------------------------------------------
# KG MRs, parenthesized form: (s, r, o), (s, r, o)
# ---------------------------------------------------------------------------

def serialize_kg_paren(mr: KgMr) -> str:
    """Comma-separated ``(subject, relation, object)`` groups."""
    rendered = []
    for t in mr.triples:
        for piece in (t.subject, t.relation, t.object):
            if any(ch in piece for ch in "(),"):
                raise EscapingRequiredError(
                    f"{piece!r} contains a delimiter reserved by the paren form"
                )
        rendered.append(f"({t.subject}, {t.relation}, {t.object})")
    return ", ".join(rendered)


def parse_kg_paren(text: str, topic: str = "other") -> KgMr:
    """Parse the parenthesized triple form.

    A group must contain exactly two top-level commas; more raise
    :class:`AmbiguousCommaSplitError` rather than guessing where an entity
    name ends, since a silent misparse would poison downstream scoring.
    """
    triples: list[Triple] = []
    i = 0
    n = len(text)
    saw_group = False
    while i < n:
        ch = text[i]
        if ch.isspace() or ch == ",":
            i += 1
            continue
        if ch != "(":
            raise MrSyntaxError(f"unexpected {ch!r} at offset {i} in {text!r}")
        close = text.find(")", i)
        if close == -1:
            raise MrSyntaxError(f"unbalanced '(' in {text!r}")
        inner = text[i + 1 : close]
        parts = inner.split(",")
        if len(parts) > 3:
            raise AmbiguousCommaSplitError(
                f"group ({inner}) has {len(parts) - 1} commas; expected exactly 2"
            )
        if len(parts) != 3:
            raise MrSyntaxError(f"group ({inner}) does not split into three fields")
        s, r, o = (p.strip() for p in parts)
        if not (s and r and o):
            raise MrSyntaxError(f"empty field in group ({inner})")
        triples.append(Triple(s, r, o))
        saw_group = True
        i = close + 1
    if not saw_group:
        raise MrSyntaxError(f"no triple groups found in {text!r}")
    return KgMr(triples=tuple(triples), topic=topic)


def parse_any_mr(text: str, topic: str = "other") -> MeaningRepresentation:
    """Parse a string as whichever MR form it matches.

    Tries, in order: structured dialogue-act form, QA pipe form, KG pipe
    form, KG paren form.  Raises :class:`MrSyntaxError` if nothing matches.
    """
    attempts = (
        lambda s: parse_viggo_mr(s),
        lambda s: parse_viggo_qa(s),
        lambda s: parse_kg_s2s(s, topic=topic),
        lambda s: parse_kg_paren(s, topic=topic),
    )
    stripped = text.strip()
    for attempt in attempts:
        try:
            return attempt(stripped)
        except (MrSyntaxError, DuplicateAttributeError, ValueError):
            continue
    raise MrSyntaxError(f"text matches no known MR form: {text!r}")

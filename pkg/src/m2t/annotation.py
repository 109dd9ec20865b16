"""Human-evaluation label capture, storage, validation, and aggregation.

Coherence is scored on a three-point scale.  The top anchor follows the
original evaluation instructions; the lower two anchors are toolkit-defined:

    3 - makes sense and is natural
    2 - understandable, but with flaws in fluency or logic
    1 - incoherent

Redundancy or self-contradiction in an output is recorded as a free-text
note tag (e.g. "redundant", "self-contradiction"), not as a scored field.

An item key names one candidate of one generation record:
``<cache_key>#<candidate_index>``.  Annotation store lines are JSON objects
with keys in this documented order:

    item_key, rater_id, coherence, realized, total, good_hallucination,
    bad_hallucination, question_added, da_match, notes
"""

from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass
from pathlib import Path

from .errors import (
    AnnotationValidationError,
    EmptyGroupError,
    OutOfRangeLabelError,
    StoreMissingError,
    UnparsableTestMrError,
)
from .llm import GenerationRecord, GenerationStore, parse_test_mr
from .metrics import word_count
from .mr import KgMr, ViggoMr, serialize_kg_s2s, serialize_viggo_mr
from .realizer import default_bank, resolve_topic

COHERENCE_LABELS = (1, 2, 3)


@dataclass(frozen=True)
class AnnotationRecord:
    item_key: str
    rater_id: str
    coherence: int
    realized: int
    total: int
    good_hallucination: bool
    bad_hallucination: bool
    question_added: bool
    da_match: bool | None = None
    notes: str = ""

    def __post_init__(self) -> None:
        if not self.item_key:
            raise ValueError("item_key must be non-empty")
        if not self.rater_id:
            raise ValueError("rater_id must be non-empty")
        if self.coherence not in COHERENCE_LABELS:
            raise OutOfRangeLabelError(
                f"coherence must be one of {COHERENCE_LABELS}, got {self.coherence}"
            )
        if self.total < 0:
            raise OutOfRangeLabelError("total must be >= 0")
        if not 0 <= self.realized <= self.total:
            raise OutOfRangeLabelError(
                f"realized must be between 0 and {self.total}, got {self.realized}"
            )

    def to_json_line(self) -> str:
        return json.dumps(
            {
                "item_key": self.item_key,
                "rater_id": self.rater_id,
                "coherence": self.coherence,
                "realized": self.realized,
                "total": self.total,
                "good_hallucination": self.good_hallucination,
                "bad_hallucination": self.bad_hallucination,
                "question_added": self.question_added,
                "da_match": self.da_match,
                "notes": self.notes,
            },
            ensure_ascii=False,
        )

    @classmethod
    def from_json_line(cls, line: str) -> "AnnotationRecord":
        raw = json.loads(line)
        return cls(**raw)


@dataclass(frozen=True)
class ResolvedItem:
    """One generation candidate with the facts needed to check labels."""

    record: GenerationRecord
    index: int
    text: str
    mr: object
    mr_serialized: str
    total: int
    dialogue_act: str | None
    topic: str
    model: str


def resolve_item(store: GenerationStore, item_key: str) -> ResolvedItem:
    """Look an item key up in the generation store and derive its MR facts."""
    base, sep, index_text = item_key.partition("#")
    if not sep or not index_text.isdigit():
        raise AnnotationValidationError(
            f"item key must look like <cache_key>#<index>, got {item_key!r}"
        )
    record = store.get(base)
    if record is None:
        raise AnnotationValidationError(f"no generation record for {item_key!r}")
    index = int(index_text)
    if index >= len(record.candidates):
        raise AnnotationValidationError(
            f"candidate index {index} out of range for {base!r}"
        )
    try:
        mr = parse_test_mr(record.prompt)
    except UnparsableTestMrError as exc:
        raise AnnotationValidationError(
            f"cannot derive a slot count for {item_key!r}: {exc}"
        ) from exc
    if isinstance(mr, ViggoMr):
        total = len(mr.slots)
        dialogue_act = mr.dialogue_act
        topic = "viggo"
        serialized = serialize_viggo_mr(mr)
    else:
        total = len(mr.triples)
        dialogue_act = None
        resolved = resolve_topic(mr, default_bank())
        topic = resolved.topic if resolved is not None else mr.topic
        serialized = serialize_kg_s2s(mr)
    return ResolvedItem(
        record=record,
        index=index,
        text=record.candidates[index],
        mr=mr,
        mr_serialized=serialized,
        total=total,
        dialogue_act=dialogue_act,
        topic=topic,
        model=record.params.backend_id,
    )


class AnnotationStore:
    """Append-only JSONL store of annotation records."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._records: list[AnnotationRecord] = []
        if self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    self._records.append(AnnotationRecord.from_json_line(line))

    def append(
        self,
        record: AnnotationRecord,
        validate_with: GenerationStore | None = None,
    ) -> None:
        if validate_with is not None:
            item = resolve_item(validate_with, record.item_key)
            if record.total != item.total:
                raise AnnotationValidationError(
                    f"record total {record.total} disagrees with the MR's "
                    f"{item.total} slots for {record.item_key!r}"
                )
        with self._lock:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as handle:
                handle.write(record.to_json_line() + "\n")
            self._records.append(record)

    def labeled_pairs(self) -> set[tuple[str, str]]:
        with self._lock:
            return {(r.item_key, r.rater_id) for r in self._records}

    def __len__(self) -> int:
        with self._lock:
            return len(self._records)

    def __iter__(self):
        with self._lock:
            return iter(list(self._records))


# ---------------------------------------------------------------------------
# interactive labeling
# ---------------------------------------------------------------------------

def _ask_int(prompt_text, low, high, input_fn, output_fn) -> int:
    while True:
        raw = input_fn(prompt_text).strip()
        try:
            value = int(raw)
        except ValueError:
            output_fn(f"enter an integer between {low} and {high}")
            continue
        if low <= value <= high:
            return value
        output_fn(f"value must be between {low} and {high}")


def _ask_bool(prompt_text, input_fn, output_fn) -> bool:
    while True:
        raw = input_fn(prompt_text).strip().casefold()
        if raw in ("y", "yes"):
            return True
        if raw in ("n", "no"):
            return False
        output_fn("answer y or n")


def _selected(generation: GenerationRecord, item_filter) -> bool:
    if item_filter is None:
        return True
    if callable(item_filter):
        return bool(item_filter(generation))
    return str(item_filter) in generation.prompt


def annotate(
    store: GenerationStore,
    item_filter,
    rater_id: str,
    annotations: AnnotationStore,
    *,
    input_fn=input,
    output_fn=print,
) -> tuple[AnnotationRecord, ...]:
    """Label every unlabeled (item, rater) pair in the generation store.

    ``item_filter`` is None for all items, a predicate over generation
    records, or a substring matched against prompts.  Each record is appended
    as soon as it is complete, so an interrupted session resumes where it
    stopped.  Out-of-range answers re-prompt.
    """
    if not rater_id:
        raise ValueError("rater_id must be non-empty")
    if not store.path.exists():
        raise StoreMissingError(f"generation store not found: {store.path}")
    labeled = annotations.labeled_pairs()
    collected: list[AnnotationRecord] = []
    for generation in store:
        if not _selected(generation, item_filter):
            continue
        for index in range(len(generation.candidates)):
            item_key = f"{generation.cache_key}#{index}"
            if (item_key, rater_id) in labeled:
                continue
            item = resolve_item(store, item_key)
            output_fn(f"item {item_key}")
            output_fn(f"MR: {item.mr_serialized}")
            output_fn(f"output: {item.text}")
            record = AnnotationRecord(
                item_key=item_key,
                rater_id=rater_id,
                coherence=_ask_int("coherence [1-3]: ", 1, 3, input_fn, output_fn),
                realized=_ask_int(
                    f"realized slots [0-{item.total}]: ",
                    0,
                    item.total,
                    input_fn,
                    output_fn,
                ),
                total=item.total,
                good_hallucination=_ask_bool(
                    "good hallucination? [y/n]: ", input_fn, output_fn
                ),
                bad_hallucination=_ask_bool(
                    "bad hallucination? [y/n]: ", input_fn, output_fn
                ),
                question_added=_ask_bool(
                    "question added? [y/n]: ", input_fn, output_fn
                ),
                da_match=(
                    _ask_bool("dialogue act matched? [y/n]: ", input_fn, output_fn)
                    if item.dialogue_act is not None
                    else None
                ),
                notes=input_fn("notes: ").strip(),
            )
            annotations.append(record)
            collected.append(record)
    return tuple(collected)


# ---------------------------------------------------------------------------
# aggregation
# ---------------------------------------------------------------------------

GROUP_KEYS = ("topic", "model", "dialogue_act")


@dataclass(frozen=True)
class AggregateRow:
    group: str
    n: int
    coherence_mean: float
    semantic_accuracy_pooled: float | None
    semantic_accuracy_mean: float | None
    good_hallucination_rate: float
    bad_hallucination_rate: float
    question_added_rate: float
    da_match_rate: float | None
    word_count_mean: float | None


def _group_label(item: ResolvedItem, group_by: str) -> str:
    if group_by == "topic":
        return item.topic
    if group_by == "model":
        return item.model
    return item.dialogue_act if item.dialogue_act is not None else "kg"


def _row(group, records, items) -> AggregateRow:
    n = len(records)
    total = sum(r.total for r in records)
    realized = sum(r.realized for r in records)
    ratios = [r.realized / r.total for r in records if r.total > 0]
    labeled_da = [r.da_match for r in records if r.da_match is not None]
    return AggregateRow(
        group=group,
        n=n,
        coherence_mean=math.fsum(r.coherence for r in records) / n,
        semantic_accuracy_pooled=realized / total if total else None,
        semantic_accuracy_mean=math.fsum(ratios) / len(ratios) if ratios else None,
        good_hallucination_rate=sum(r.good_hallucination for r in records) / n,
        bad_hallucination_rate=sum(r.bad_hallucination for r in records) / n,
        question_added_rate=sum(r.question_added for r in records) / n,
        da_match_rate=sum(labeled_da) / len(labeled_da) if labeled_da else None,
        word_count_mean=(
            math.fsum(word_count(item.text) for item in items) / n
            if items is not None
            else None
        ),
    )


def aggregate(
    records,
    group_by: str | None = None,
    store: GenerationStore | None = None,
) -> tuple[AggregateRow, ...]:
    """Per-group means over annotation records, plus an overall row.

    Semantic accuracy is reported both pooled (sum of realized over sum of
    totals) and as the mean of per-item ratios; zero-total items are skipped
    by the latter.  Grouping and word counts need the generation store to
    resolve item keys; with ``store=None`` only the overall row (without
    word counts) is available.
    """
    records = tuple(records)
    if not records:
        raise EmptyGroupError("no annotation records to aggregate")
    if group_by is not None and group_by not in GROUP_KEYS:
        raise ValueError(f"group_by must be one of {GROUP_KEYS}, got {group_by!r}")
    if group_by is not None and store is None:
        raise ValueError("group_by requires the generation store")
    items = (
        tuple(resolve_item(store, r.item_key) for r in records)
        if store is not None
        else None
    )
    rows = []
    if group_by is not None:
        buckets: dict[str, list[int]] = {}
        for position, item in enumerate(items):
            buckets.setdefault(_group_label(item, group_by), []).append(position)
        for label in sorted(buckets):
            chosen = buckets[label]
            rows.append(
                _row(
                    label,
                    [records[i] for i in chosen],
                    [items[i] for i in chosen],
                )
            )
    rows.append(_row("overall", list(records), list(items) if items else None))
    return tuple(rows)

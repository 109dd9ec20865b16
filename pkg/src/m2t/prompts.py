"""Few-shot prompt assembly in the two line-oriented formats.

Both builders are pure: the rendered prompt is a function of the exemplar
pairs and the test MR alone.  Content containing newlines (or, in the
marker format, a marker literal) is rejected rather than escaped, because
the wire formats define no escaping and byte drift would silently change
what a backend sees.
"""

from __future__ import annotations

import importlib.resources
import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import yaml

from .errors import (
    EmbeddedNewlineError,
    InsufficientCorpusError,
    MarkerCollisionError,
)
from .mr import KgMr, Triple

DEFAULT_PROMPT_MARKER = "[PROMPT]:"
DEFAULT_SENTENCE_MARKER = "[SENTENCE]:"


@dataclass(frozen=True)
class PromptBundle:
    format: str
    exemplars: tuple[tuple[str, str], ...]
    test_mr_serialized: str
    rendered: str
    stop_sequences: tuple[str, ...]


def _as_pairs(exemplars) -> tuple[tuple[str, str], ...]:
    pairs = []
    for item in exemplars:
        if hasattr(item, "mr") and hasattr(item, "reference"):
            pairs.append((item.mr, item.reference))
        else:
            mr, reference = item
            pairs.append((mr, reference))
    return tuple(pairs)


def _check_line(text: str, role: str) -> str:
    if "\n" in text or "\r" in text:
        raise EmbeddedNewlineError(f"{role} contains a newline: {text!r}")
    if not text.strip():
        raise ValueError(f"{role} is empty")
    return text


def build_s2s(exemplars, test_mr: str) -> PromptBundle:
    """Two-line instances separated by a blank line; the test MR dangles.

    Stop on the blank line so the completion is exactly one instance text.
    """
    pairs = _as_pairs(exemplars)
    for mr, reference in pairs:
        _check_line(mr, "exemplar MR")
        _check_line(reference, "exemplar reference")
    _check_line(test_mr, "test MR")
    parts = [f"{mr}\n{reference}\n\n" for mr, reference in pairs]
    parts.append(f"{test_mr}\n")
    return PromptBundle(
        format="s2s",
        exemplars=pairs,
        test_mr_serialized=test_mr,
        rendered="".join(parts),
        stop_sequences=("\n\n",),
    )


def build_qa(
    exemplars,
    test_mr: str,
    prompt_marker: str = DEFAULT_PROMPT_MARKER,
    sentence_marker: str = DEFAULT_SENTENCE_MARKER,
    trailing_space: bool = False,
) -> PromptBundle:
    """Marker-prefixed instances; the prompt ends at the bare answer marker.

    The figure the default markers come from typesets them in small caps;
    uppercase is the stable choice and the markers stay overridable.
    """
    pairs = _as_pairs(exemplars)
    for marker in (prompt_marker, sentence_marker):
        _check_line(marker, "marker")
    texts = [t for pair in pairs for t in pair] + [test_mr]
    for text in texts:
        for marker in (prompt_marker, sentence_marker):
            if marker in text:
                raise MarkerCollisionError(
                    f"{text!r} contains the marker literal {marker!r}"
                )
    for mr, reference in pairs:
        _check_line(mr, "exemplar MR")
        _check_line(reference, "exemplar reference")
    _check_line(test_mr, "test MR")
    parts = [
        f"{prompt_marker} {mr}\n{sentence_marker} {reference}\n"
        for mr, reference in pairs
    ]
    stub_tail = " " if trailing_space else ""
    parts.append(f"{prompt_marker} {test_mr}\n{sentence_marker}{stub_tail}")
    return PromptBundle(
        format="qa",
        exemplars=pairs,
        test_mr_serialized=test_mr,
        rendered="".join(parts),
        stop_sequences=(prompt_marker, "\n"),
    )


# ---------------------------------------------------------------------------
# exemplar sampling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Exemplar:
    key: str
    mr: str
    reference: str
    dialogue_act: str | None = None


def _as_exemplar(record) -> Exemplar:
    if isinstance(record, Exemplar):
        return record
    if hasattr(record, "mr") and hasattr(record, "reference"):
        return Exemplar(
            key=getattr(record, "key", record.mr),
            mr=record.mr,
            reference=record.reference,
            dialogue_act=getattr(record, "dialogue_act", None),
        )
    if isinstance(record, dict):
        mr = record.get("mr") or record.get("mr_s2s")
        key = record.get("key") or record.get("mr_paren") or mr
        return Exemplar(
            key=key,
            mr=mr,
            reference=record["reference"],
            dialogue_act=record.get("dialogue_act"),
        )
    raise TypeError(f"cannot use {type(record).__name__} as an exemplar record")


@dataclass(frozen=True)
class SampleResult:
    exemplars: tuple[Exemplar, ...]
    k: int
    strategy: str
    seed: int

    @property
    def keys(self) -> tuple[str, ...]:
        return tuple(e.key for e in self.exemplars)

    def pairs(self) -> tuple[tuple[str, str], ...]:
        return tuple((e.mr, e.reference) for e in self.exemplars)

    def manifest(self) -> dict:
        return {
            "seed": self.seed,
            "k": self.k,
            "strategy": self.strategy,
            "keys": list(self.keys),
        }


def sample_exemplars(
    corpus: Iterable,
    k: int,
    strategy: str = "uniform",
    seed: int = 0,
    exclude_keys: frozenset[str] = frozenset(),
) -> SampleResult:
    """Sample exemplar records without replacement, deterministically in seed.

    ``uniform`` draws k records from the whole pool; ``per_dialogue_act``
    draws k per dialogue act, blocks ordered by act name.  Records whose key
    is excluded (the configured test set) are never candidates.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    pool = [_as_exemplar(r) for r in corpus]
    pool = [e for e in pool if e.key not in exclude_keys]
    rng = random.Random(seed)

    if strategy == "uniform":
        if k > len(pool):
            raise InsufficientCorpusError(
                f"need {k} records, pool has {len(pool)} after exclusions"
            )
        chosen = [pool[i] for i in rng.sample(range(len(pool)), k)]
    elif strategy == "per_dialogue_act":
        by_da: dict[str, list[Exemplar]] = {}
        for e in pool:
            if e.dialogue_act is None:
                raise ValueError("per_dialogue_act needs dialogue-act labels")
            by_da.setdefault(e.dialogue_act, []).append(e)
        chosen = []
        for da in sorted(by_da):
            records = by_da[da]
            if k > len(records):
                raise InsufficientCorpusError(
                    f"dialogue act {da!r} has {len(records)} records, need {k}"
                )
            chosen.extend(records[i] for i in rng.sample(range(len(records)), k))
    else:
        raise ValueError(f"unknown strategy {strategy!r}")

    return SampleResult(exemplars=tuple(chosen), k=k, strategy=strategy, seed=seed)


# ---------------------------------------------------------------------------
# fixture loading
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StockExemplars:
    sets: dict[str, tuple[tuple[str, str], ...]]
    restaurant_test_mr: str


def load_stock_exemplars(path: str | Path | None = None) -> StockExemplars:
    if path is None:
        resource = importlib.resources.files("m2t").joinpath(
            "data/fixtures/stock_exemplars.yaml"
        )
        raw = yaml.safe_load(resource.read_text(encoding="utf-8"))
    else:
        raw = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    sets = {
        name: tuple((e["mr"], e["reference"]) for e in entries)
        for name, entries in raw["sets"].items()
    }
    return StockExemplars(sets=sets, restaurant_test_mr=raw["restaurant_test_mr"])


@dataclass(frozen=True)
class NovelMr:
    id: str
    mr: KgMr


def load_novel_mrs(path: str | Path | None = None) -> tuple[NovelMr, ...]:
    if path is None:
        resource = importlib.resources.files("m2t").joinpath(
            "data/fixtures/novel_mrs.jsonl"
        )
        text = resource.read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    out = []
    for line in text.splitlines():
        if not line.strip():
            continue
        raw = json.loads(line)
        out.append(
            NovelMr(
                id=raw["id"],
                mr=KgMr(
                    topic=raw["topic"],
                    triples=tuple(Triple(s, r, o) for s, r, o in raw["triples"]),
                ),
            )
        )
    return tuple(out)

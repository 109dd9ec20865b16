"""Template realization of KG MRs and synthetic corpus generation.

A template realizes one ordered sequence of relations.  MRs carry relation
display surfaces ("cast member", "record label"); before matching, each is
normalized to its canonical schema name for the MR's topic.  Relations the
schema does not know keep their surface form, which simply never matches a
signature: an unknown relation combination is exactly the no-template case.

Corpus generation realizes every matchable triple group once and assigns
splits by seeded digest ranking, so the same seed always reproduces the
same files byte for byte.

The triple fetcher speaks SPARQL-over-HTTP and caches raw result rows on
disk (entity IDs included); with the endpoint down it replays the newest
cached result for the same query.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
import random
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Iterable

import httpx
import yaml

from .errors import (
    EndpointUnavailableError,
    InsufficientTriplesError,
    NoTemplateForSignatureError,
    UnmappedRelationError,
)
from .mr import KgMr, Triple, serialize_kg_paren, serialize_kg_s2s
from .schema import MrSchema, load_schema

_PLACEHOLDER_RE = re.compile(r"\{([a-z_0-9]+)\}")


@dataclass(frozen=True)
class Template:
    id: str
    topic: str
    relation_signature: tuple[str, ...]
    surface: str
    paraphrase_group: str
    asks_question: bool
    canonical: bool

    def render(self, mr: KgMr) -> str:
        values = {}
        for i, triple in enumerate(mr.triples, 1):
            values[f"subject_{i}"] = triple.subject
            values[f"object_{i}"] = triple.object
        return self.surface.format(**values)


def _validate_template(t: Template) -> None:
    arity = len(t.relation_signature)
    if arity == 0:
        raise ValueError(f"template {t.id} has an empty signature")
    for name in _PLACEHOLDER_RE.findall(t.surface):
        kind, _, index = name.rpartition("_")
        if kind not in ("subject", "object") or not index.isdigit():
            raise ValueError(f"template {t.id} has unknown placeholder {{{name}}}")
        if not 1 <= int(index) <= arity:
            raise ValueError(
                f"template {t.id} placeholder {{{name}}} exceeds arity {arity}"
            )
    ends_question = t.surface.rstrip(".").rstrip().endswith("?")
    if t.asks_question != ends_question:
        raise ValueError(f"template {t.id} asks_question flag contradicts surface")


@dataclass(frozen=True)
class TemplateBank:
    templates: tuple[Template, ...]
    schema: MrSchema

    def __post_init__(self):
        groups: dict[str, tuple[str, tuple[str, ...]]] = {}
        for t in self.templates:
            _validate_template(t)
            key = (t.topic, t.relation_signature)
            if groups.setdefault(t.paraphrase_group, key) != key:
                raise ValueError(
                    f"paraphrase group {t.paraphrase_group} mixes signatures"
                )

    def by_id(self, template_id: str) -> Template:
        for t in self.templates:
            if t.id == template_id:
                return t
        raise KeyError(template_id)

    def group(self, paraphrase_group: str) -> tuple[Template, ...]:
        return tuple(
            sorted(
                (t for t in self.templates if t.paraphrase_group == paraphrase_group),
                key=lambda t: t.id,
            )
        )

    def signature_of(self, mr: KgMr) -> tuple[str, ...]:
        """Relation sequence normalized to canonical schema names."""
        mapping = self._relation_map(mr.topic)
        return tuple(
            mapping.get(t.relation.casefold(), t.relation) for t in mr.triples
        )

    def _relation_map(self, topic: str) -> dict[str, str]:
        mapping: dict[str, str] = {}
        if topic not in self.schema.kg_relations:
            return mapping
        for relation in self.schema.kg_relations[topic]:
            mapping[relation.name.casefold()] = relation.name
            for surface in relation.display:
                mapping[surface.casefold()] = relation.name
        return mapping

    def match(self, mr: KgMr) -> tuple[Template, ...]:
        """All templates realizing the MR, one paraphrase group, sorted by id."""
        signature = self.signature_of(mr)
        hits = [
            t
            for t in self.templates
            if t.topic == mr.topic and t.relation_signature == signature
        ]
        if not hits:
            return ()
        group = min(t.paraphrase_group for t in hits)
        return tuple(sorted((t for t in hits if t.paraphrase_group == group), key=lambda t: t.id))


def load_template_bank(path: str | Path | None = None, schema: MrSchema | None = None) -> TemplateBank:
    if path is None:
        import importlib.resources

        resource = importlib.resources.files("m2t").joinpath("data/templates.yaml")
        raw = yaml.safe_load(resource.read_text(encoding="utf-8"))
    else:
        raw = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    templates = tuple(
        Template(
            id=str(entry["id"]),
            topic=str(entry["topic"]),
            relation_signature=tuple(str(r) for r in entry["relation_signature"]),
            surface=str(entry["surface"]),
            paraphrase_group=str(entry["paraphrase_group"]),
            asks_question=bool(entry["asks_question"]),
            canonical=bool(entry["canonical"]),
        )
        for entry in raw["templates"]
    )
    ids = [t.id for t in templates]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate template ids in bank")
    return TemplateBank(templates=templates, schema=schema or load_schema())


@lru_cache(maxsize=1)
def default_bank() -> TemplateBank:
    """The shipped template bank, loaded once per process."""
    return load_template_bank()


def resolve_topic(mr: KgMr, bank: TemplateBank) -> KgMr | None:
    """Retype the MR to the first topic (sorted order) whose templates match."""
    candidates = [mr.topic] if mr.topic in bank.schema.kg_relations else []
    candidates += [t for t in sorted(bank.schema.kg_relations) if t not in candidates]
    for topic in candidates:
        retyped = KgMr(triples=mr.triples, topic=topic)
        if bank.match(retyped):
            return retyped
    return None


def realize_with_template(
    mr: KgMr, bank: TemplateBank, choice_seed: int
) -> tuple[str, Template]:
    candidates = bank.match(mr)
    if not candidates:
        raise NoTemplateForSignatureError(
            f"no template for topic {mr.topic!r} with relations "
            f"{[t.relation for t in mr.triples]}"
        )
    rng = random.Random(choice_seed)
    template = candidates[rng.randrange(len(candidates))]
    return template.render(mr), template


def realize(mr: KgMr, bank: TemplateBank, choice_seed: int) -> str:
    text, _ = realize_with_template(mr, bank, choice_seed)
    return text


# ---------------------------------------------------------------------------
# corpus generation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CorpusSplitConfig:
    train_target: int
    dev_target: int
    test_per_category: int
    seed: int

    def __post_init__(self):
        if min(self.train_target, self.dev_target, self.test_per_category) < 0:
            raise ValueError("split targets must be non-negative")


@dataclass(frozen=True)
class GeneratedCorpus:
    corpus_path: Path
    manifest_path: Path
    manifest: dict


def _digest(seed: int, key: str) -> str:
    return hashlib.sha256(f"{seed}:{key}".encode()).hexdigest()


def _choice_seed(seed: int, key: str) -> int:
    return int.from_bytes(hashlib.sha256(f"{seed}|{key}".encode()).digest()[:8], "big")


def generate_corpus(
    triples_source: Iterable[KgMr],
    bank: TemplateBank,
    cfg: CorpusSplitConfig,
    out_dir: str | Path,
    source_name: str = "fixture",
    strict: bool = False,
) -> GeneratedCorpus:
    """Realize triple groups into a split corpus file plus manifest.

    Split targets are exact caps: surplus records stay unused, a shortfall
    produces a partial corpus with a manifest warning (or raises in strict
    mode).  The test split takes exactly test_per_category records from
    each template category before dev and train are drawn.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    rows = []
    skipped = 0
    duplicates = 0
    seen_keys = set()
    for mr in triples_source:
        key = serialize_kg_paren(mr)
        if key in seen_keys:
            duplicates += 1
            continue
        try:
            reference, template = realize_with_template(
                mr, bank, _choice_seed(cfg.seed, key)
            )
        except NoTemplateForSignatureError:
            skipped += 1
            continue
        seen_keys.add(key)
        rows.append(
            {
                "topic": mr.topic,
                "mr_paren": key,
                "mr_s2s": serialize_kg_s2s(mr),
                "reference": reference,
                "template_category": template.paraphrase_group,
                "rank": _digest(cfg.seed, key),
            }
        )

    warnings: list[str] = []
    by_category: dict[str, list[dict]] = {}
    for row in rows:
        by_category.setdefault(row["template_category"], []).append(row)

    test_rows = []
    remaining = []
    for category in sorted(by_category):
        ordered = sorted(by_category[category], key=lambda r: r["rank"])
        take = ordered[: cfg.test_per_category]
        if len(take) < cfg.test_per_category:
            warnings.append(
                f"test split short for {category}: wanted {cfg.test_per_category},"
                f" got {len(take)}"
            )
        test_rows.extend(take)
        remaining.extend(ordered[cfg.test_per_category :])

    remaining.sort(key=lambda r: r["rank"])
    dev_rows = remaining[: cfg.dev_target]
    if len(dev_rows) < cfg.dev_target:
        warnings.append(f"dev split short: wanted {cfg.dev_target}, got {len(dev_rows)}")
    train_rows = remaining[cfg.dev_target : cfg.dev_target + cfg.train_target]
    if len(train_rows) < cfg.train_target:
        warnings.append(
            f"train split short: wanted {cfg.train_target}, got {len(train_rows)}"
        )
    unused = len(remaining) - len(dev_rows) - len(train_rows)

    if strict and warnings:
        raise InsufficientTriplesError("; ".join(warnings))

    corpus_path = out_dir / "corpus.jsonl"
    category_counts: dict[str, dict[str, int]] = {}
    with corpus_path.open("w", encoding="utf-8") as fh:
        for split, split_rows in (("train", train_rows), ("dev", dev_rows), ("test", test_rows)):
            for row in sorted(split_rows, key=lambda r: r["rank"]):
                record = {
                    "topic": row["topic"],
                    "mr_paren": row["mr_paren"],
                    "mr_s2s": row["mr_s2s"],
                    "reference": row["reference"],
                    "template_category": row["template_category"],
                    "split": split,
                }
                fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")
                cat = category_counts.setdefault(
                    row["template_category"], {"train": 0, "dev": 0, "test": 0}
                )
                cat[split] += 1

    manifest = {
        "seed": cfg.seed,
        "source": source_name,
        "targets": {
            "train": cfg.train_target,
            "dev": cfg.dev_target,
            "test_per_category": cfg.test_per_category,
        },
        "split_counts": {
            "train": len(train_rows),
            "dev": len(dev_rows),
            "test": len(test_rows),
        },
        "category_counts": {k: category_counts[k] for k in sorted(category_counts)},
        "skipped_no_template": skipped,
        "duplicate_groups": duplicates,
        "unused": unused,
        "warnings": warnings,
        "corpus_digest": hashlib.sha256(corpus_path.read_bytes()).hexdigest(),
    }
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(
        json.dumps(manifest, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )
    return GeneratedCorpus(
        corpus_path=corpus_path, manifest_path=manifest_path, manifest=manifest
    )


def load_corpus_records(path: str | Path) -> list[dict]:
    records = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                records.append(json.loads(line))
    return records


def load_triple_groups(path: str | Path | None = None) -> tuple[KgMr, ...]:
    """Load triple groups from a JSONL fixture; defaults to the shipped one."""
    if path is None:
        import importlib.resources

        resource = importlib.resources.files("m2t").joinpath(
            "data/fixtures/triples.jsonl"
        )
        text = resource.read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    groups = []
    for line in text.splitlines():
        if not line.strip():
            continue
        raw = json.loads(line)
        groups.append(
            KgMr(
                topic=raw["topic"],
                triples=tuple(Triple(s, r, o) for s, r, o in raw["triples"]),
            )
        )
    return tuple(groups)


# ---------------------------------------------------------------------------
# triple fetching
# ---------------------------------------------------------------------------

_SPARQL_QUERY = """SELECT ?s ?sLabel ?o ?oLabel WHERE {{
  ?s wdt:{pid} ?o .
  SERVICE wikibase:label {{ bd:serviceParam wikibase:language "en". }}
}}
LIMIT {limit}"""


def _resolve_relation(schema: MrSchema, relation: str, topic: str | None):
    topics = [topic] if topic else sorted(schema.kg_relations)
    wanted = relation.casefold()
    for name in topics:
        for rel in schema.kg_relations.get(name, ()):
            if wanted == rel.name.casefold() or wanted in (
                s.casefold() for s in rel.display
            ):
                return rel
    raise UnmappedRelationError(f"no KG property mapping for relation {relation!r}")


def _cache_stem(relation: str, limit: int, endpoint: str) -> str:
    raw = "|".join([relation.casefold(), str(limit), endpoint])
    return hashlib.sha256(raw.encode()).hexdigest()[:24]


def _rows_to_triples(rows: list[dict], display: str) -> list[Triple]:
    return [Triple(r["subject_label"], display, r["object_label"]) for r in rows]


def fetch_triples(
    relation: str,
    limit: int,
    endpoint: str,
    *,
    topic: str | None = None,
    schema: MrSchema | None = None,
    cache_dir: str | Path | None = None,
    client: httpx.Client | None = None,
    today: str | None = None,
) -> list[Triple]:
    """Fetch up to ``limit`` triples for one relation from a SPARQL endpoint.

    Raw result rows (entity IDs included) are cached on disk keyed by
    (relation, limit, endpoint, date); if the endpoint is unreachable the
    newest cached result for the same query is replayed.
    """
    schema = schema or load_schema()
    rel = _resolve_relation(schema, relation, topic)
    display = rel.display[0] if rel.display else rel.name

    cache_dir = Path(cache_dir) if cache_dir else Path(".m2t-cache/triples")
    cache_dir.mkdir(parents=True, exist_ok=True)
    stem = _cache_stem(relation, limit, endpoint)
    today = today or _dt.date.today().isoformat()
    cache_path = cache_dir / f"{stem}-{today}.json"

    if cache_path.exists():
        rows = json.loads(cache_path.read_text(encoding="utf-8"))["rows"]
        return _rows_to_triples(rows, display)

    own_client = client is None
    client = client or httpx.Client(timeout=30.0)
    try:
        response = client.get(
            endpoint,
            params={"query": _SPARQL_QUERY.format(pid=rel.pid, limit=limit), "format": "json"},
        )
        response.raise_for_status()
        bindings = response.json()["results"]["bindings"]
    except (httpx.HTTPError, KeyError, ValueError) as exc:
        stale = sorted(cache_dir.glob(f"{stem}-*.json"))
        if stale:
            rows = json.loads(stale[-1].read_text(encoding="utf-8"))["rows"]
            return _rows_to_triples(rows, display)
        raise EndpointUnavailableError(
            f"endpoint {endpoint} unreachable and no cached result: {exc}"
        ) from exc
    finally:
        if own_client:
            client.close()

    rows = [
        {
            "subject_id": b["s"]["value"],
            "subject_label": b["sLabel"]["value"],
            "object_id": b["o"]["value"],
            "object_label": b["oLabel"]["value"],
        }
        for b in bindings[:limit]
    ]
    # atomic publish so concurrent fetchers never read a half-written file
    tmp_path = cache_path.with_suffix(".tmp")
    tmp_path.write_text(
        json.dumps({"relation": relation, "limit": limit, "endpoint": endpoint, "rows": rows}),
        encoding="utf-8",
    )
    tmp_path.replace(cache_path)
    return _rows_to_triples(rows, display)


def fetch_many(
    relations: Iterable[str],
    limit: int,
    endpoint: str,
    *,
    parallel: int = 4,
    **kwargs,
) -> dict[str, list[Triple]]:
    """Fetch several relations with bounded parallelism."""
    relations = list(relations)
    with ThreadPoolExecutor(max_workers=max(1, parallel)) as pool:
        results = pool.map(
            lambda rel: (rel, fetch_triples(rel, limit, endpoint, **kwargs)), relations
        )
        return dict(results)

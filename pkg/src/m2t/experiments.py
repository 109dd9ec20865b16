"""Experiment orchestration over corpora, prompts, backends, and metrics.

Three run designs share one reporting contract:

- ``run_matrix``: tune on each topic, test on every topic, per prompt
  format and backend; emits train-by-test score matrices.
- ``run_novel``: generate from reference-free MRs with a fixed two-shot
  prompt and package every candidate for human annotation.  No surface
  similarity is computed because there is nothing to compare against.
- ``run_viggo``: the dialogue-act grid, {3, 10} exemplars per act by
  {s2s, qa} format for each backend.

Every run writes four artifacts into its output directory: ``report.json``
(machine-precision), ``report.md`` (numbers rounded to two decimals),
a delimited machine table (``report.tsv``, or ``package.jsonl`` for the
novel design), and ``manifest.json`` recording the config, the input
digests, and the exemplar selections.  Reports embed the manifest digest.

Determinism contract: given the same config and corpus content, every
artifact is byte-identical across reruns.  Nothing time- or path-derived
enters the written bytes, record order is canonicalized before selection,
and all aggregation uses order-independent sums.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Iterable, Mapping

from .annotation import AnnotationRecord, aggregate
from .corpus import load_viggo_split
from .errors import (
    BackendError,
    DegenerateSampleError,
    EmptyGroupError,
    InsufficientCorpusError,
)
from .llm import CompletionClient, CompletionParams, GenerationStore, MockBackend
from .metrics import (
    StatsResult,
    dialogue_act_match,
    load_lexicon,
    paired_t,
    pearson,
    semantic_accuracy,
    surface_similarity,
)
from .mr import parse_kg_paren, parse_viggo_mr, serialize_kg_s2s, serialize_viggo_qa
from .prompts import build_qa, build_s2s, load_novel_mrs, load_stock_exemplars, sample_exemplars
from .realizer import load_corpus_records

KG_TOPICS = ("movies", "music", "sports", "tv")
FORMATS = ("s2s", "qa")
VIGGO_KS = (3, 10)
NOVEL_EXEMPLAR_SET = "novel_tuning_pair"

GAP = "—"


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    """One run's knobs; serialized verbatim into the run manifest.

    The defaults mirror the reference experimental design: ten tuning
    instances and fifty test items per topic for the matrix, one hundred
    sampled dialogue-act test items.
    """

    corpus_path: str | None = None
    topics: tuple[str, ...] = KG_TOPICS
    k: int = 10
    formats: tuple[str, ...] = FORMATS
    backends: tuple[str, ...] = ("mock",)
    seed: int = 0
    train_per_topic: int = 10
    test_per_topic: int = 50
    viggo_mode: bool = False
    viggo_test_size: int = 100
    num_candidates: int = 1
    viggo_dir: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "topics", tuple(self.topics))
        object.__setattr__(self, "formats", tuple(self.formats))
        object.__setattr__(self, "backends", tuple(self.backends))
        for name, values, allowed in (
            ("topics", self.topics, KG_TOPICS),
            ("formats", self.formats, FORMATS),
        ):
            if not values:
                raise ValueError(f"{name} must not be empty")
            if len(set(values)) != len(values):
                raise ValueError(f"{name} contains duplicates: {values}")
            unknown = [v for v in values if v not in allowed]
            if unknown:
                raise ValueError(f"unknown {name} {unknown}; allowed: {allowed}")
        if not self.backends:
            raise ValueError("backends must not be empty")
        if any(not b or not b.strip() for b in self.backends):
            raise ValueError("backend ids must be non-empty")
        if len(set(self.backends)) != len(self.backends):
            raise ValueError(f"backends contains duplicates: {self.backends}")
        for name in ("k", "train_per_topic", "test_per_topic", "viggo_test_size",
                     "num_candidates"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")

    def as_manifest(self) -> dict:
        return {
            "corpus_path": self.corpus_path,
            "topics": list(self.topics),
            "k": self.k,
            "formats": list(self.formats),
            "backends": list(self.backends),
            "seed": self.seed,
            "train_per_topic": self.train_per_topic,
            "test_per_topic": self.test_per_topic,
            "viggo_mode": self.viggo_mode,
            "viggo_test_size": self.viggo_test_size,
            "num_candidates": self.num_candidates,
            "viggo_dir": self.viggo_dir,
        }


@dataclass(frozen=True)
class ScoredItem:
    item_key: str
    model: str
    score: float


@dataclass(frozen=True)
class CorrelationRow:
    model: str
    metric: str
    result: StatsResult


@dataclass(frozen=True)
class RunResult:
    design: str
    report: dict
    manifest: dict
    paths: dict = field(compare=False)

    def scored_items(self) -> tuple[ScoredItem, ...]:
        return tuple(
            ScoredItem(item_key=i["item_key"], model=i["model"], score=i["surface"])
            for i in self.report.get("items", ())
        )


# ---------------------------------------------------------------------------
# shared plumbing
# ---------------------------------------------------------------------------

def _canonical_digest(obj) -> str:
    return hashlib.sha256(
        json.dumps(obj, sort_keys=True, ensure_ascii=False).encode()
    ).hexdigest()


def _corpus_digest(records: list[dict]) -> str:
    ordered = sorted(records, key=lambda r: (r["split"], r["topic"], r["mr_paren"]))
    return _canonical_digest(ordered)


def _finish_manifest(manifest: dict) -> dict:
    manifest["digest"] = _canonical_digest(manifest)
    return manifest


def _clients_for(
    cfg: ExperimentConfig,
    clients: Mapping[str, CompletionClient] | None,
    store: GenerationStore | None,
) -> dict[str, CompletionClient]:
    out = dict(clients or {})
    for backend in cfg.backends:
        if backend in out:
            continue
        if backend == "mock":
            out[backend] = CompletionClient(MockBackend(), store=store)
        else:
            raise ValueError(
                f"no client configured for backend {backend!r};"
                " pass one via clients="
            )
    return out


def _mean(values: list[float]) -> float | None:
    if not values:
        return None
    return math.fsum(values) / len(values)


def _fmt2(value) -> str:
    if value is None:
        return GAP
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.2f}"
    return str(value)


def _tsv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(
        json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )


def _write_outputs(
    out_dir: str | Path,
    design: str,
    report: dict,
    manifest: dict,
    markdown: str,
    tsv: str | None = None,
    package_lines: list[str] | None = None,
) -> dict:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "report": out_dir / "report.json",
        "markdown": out_dir / "report.md",
        "manifest": out_dir / "manifest.json",
    }
    _write_json(paths["report"], report)
    _write_json(paths["manifest"], manifest)
    paths["markdown"].write_text(markdown, encoding="utf-8")
    if tsv is not None:
        paths["tsv"] = out_dir / "report.tsv"
        paths["tsv"].write_text(tsv, encoding="utf-8")
    if package_lines is not None:
        paths["package"] = out_dir / "package.jsonl"
        paths["package"].write_text(
            "".join(line + "\n" for line in package_lines), encoding="utf-8"
        )
    return paths


def _build_prompt(fmt: str, pairs, test_mr: str):
    if fmt == "s2s":
        return build_s2s(pairs, test_mr)
    return build_qa(pairs, test_mr)


def _map_ordered(fn, seq, workers: int):
    if workers <= 1:
        return [fn(item) for item in seq]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, seq))


def _md_table(header: list[str], rows: list[list[str]]) -> str:
    lines = ["| " + " | ".join(header) + " |"]
    lines.append("| " + " | ".join("---" for _ in header) + " |")
    for row in rows:
        lines.append("| " + " | ".join(row) + " |")
    return "\n".join(lines)


def _tsv_table(header: list[str], rows: list[list]) -> str:
    lines = ["\t".join(header)]
    for row in rows:
        lines.append("\t".join(_tsv_cell(v) for v in row))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# cross-domain matrix
# ---------------------------------------------------------------------------

def run_matrix(
    cfg: ExperimentConfig,
    out_dir: str | Path,
    *,
    records: list[dict] | None = None,
    clients: Mapping[str, CompletionClient] | None = None,
    store: GenerationStore | None = None,
    max_workers: int = 1,
) -> RunResult:
    """Tune on each topic and test on every topic, per format and backend.

    Exemplars come from the first train_per_topic train records of the
    tuning topic (canonical MR order), test items from the first
    test_per_topic test records of each topic.  Each generation is scored
    for surface similarity against its reference and semantic accuracy
    against its MR; a backend failure leaves a gap, not a crash.
    """
    if records is None:
        if cfg.corpus_path is None:
            raise ValueError("need cfg.corpus_path or explicit records")
        records = load_corpus_records(cfg.corpus_path)

    lexicon = load_lexicon()
    train_pools: dict[str, list[dict]] = {}
    test_items: dict[str, list[dict]] = {}
    for topic in cfg.topics:
        train_rows = sorted(
            (r for r in records if r["split"] == "train" and r["topic"] == topic),
            key=lambda r: r["mr_paren"],
        )
        if len(train_rows) < cfg.train_per_topic:
            raise InsufficientCorpusError(
                f"train pool for {topic!r} has {len(train_rows)} records,"
                f" need {cfg.train_per_topic}"
            )
        train_pools[topic] = train_rows[: cfg.train_per_topic]
        test_rows = sorted(
            (r for r in records if r["split"] == "test" and r["topic"] == topic),
            key=lambda r: r["mr_paren"],
        )
        if len(test_rows) < cfg.test_per_topic:
            raise InsufficientCorpusError(
                f"test split for {topic!r} has {len(test_rows)} records,"
                f" need {cfg.test_per_topic}"
            )
        test_items[topic] = test_rows[: cfg.test_per_topic]

    client_map = _clients_for(cfg, clients, store)
    samples = {
        topic: sample_exemplars(train_pools[topic], cfg.k, "uniform", cfg.seed)
        for topic in cfg.topics
    }

    sub_tables = []
    items_out: list[dict] = []
    surface_by_table: dict[tuple[str, str], dict[tuple, float]] = {}
    generations = 0

    for fmt in cfg.formats:
        for backend in cfg.backends:
            client = client_map[backend]
            table_scores: dict[tuple, float] = {}
            cells = []
            for train in cfg.topics:
                pairs = samples[train].pairs()

                def score_one(record):
                    bundle = _build_prompt(fmt, pairs, record["mr_s2s"])
                    params = CompletionParams(
                        backend_id=backend,
                        stop_sequences=bundle.stop_sequences,
                        num_candidates=cfg.num_candidates,
                    )
                    try:
                        generated = client.complete(bundle.rendered, params)
                    except BackendError:
                        return None
                    text = generated.candidates[0] if generated.candidates else ""
                    mr = parse_kg_paren(record["mr_paren"], topic=record["topic"])
                    return {
                        "item_key": f"{generated.cache_key}#0",
                        "surface": surface_similarity(text, record["reference"]),
                        "semantic": semantic_accuracy(mr, text, lexicon=lexicon).ratio,
                    }

                for test in cfg.topics:
                    scored = _map_ordered(score_one, test_items[test], max_workers)
                    kept = [s for s in scored if s is not None]
                    errors = len(scored) - len(kept)
                    for record, entry in zip(test_items[test], scored):
                        if entry is None:
                            continue
                        items_out.append(
                            {
                                "backend": backend,
                                "format": fmt,
                                "item_key": entry["item_key"],
                                "model": backend,
                                "semantic": entry["semantic"],
                                "surface": entry["surface"],
                                "test_topic": test,
                                "train_topic": train,
                            }
                        )
                        table_scores[(train, test, record["mr_paren"])] = entry["surface"]
                        generations += 1
                    cells.append(
                        {
                            "train_topic": train,
                            "test_topic": test,
                            "within_domain": train == test,
                            "n": len(kept),
                            "error_count": errors,
                            "surface_mean": _mean([s["surface"] for s in kept]),
                            "semantic_mean": _mean([s["semantic"] for s in kept]),
                        }
                    )

            def axis_average(selector):
                chosen = [c for c in cells if selector(c)]
                return {
                    "surface": _mean(
                        [c["surface_mean"] for c in chosen if c["surface_mean"] is not None]
                    ),
                    "semantic": _mean(
                        [c["semantic_mean"] for c in chosen if c["semantic_mean"] is not None]
                    ),
                }

            sub_tables.append(
                {
                    "format": fmt,
                    "backend": backend,
                    "cells": cells,
                    "row_averages": {
                        t: axis_average(lambda c, t=t: c["train_topic"] == t)
                        for t in cfg.topics
                    },
                    "column_averages": {
                        t: axis_average(lambda c, t=t: c["test_topic"] == t)
                        for t in cfg.topics
                    },
                }
            )
            surface_by_table[(fmt, backend)] = table_scores

    significance = _matrix_significance(surface_by_table, cfg)

    manifest = _finish_manifest(
        {
            "design": "matrix",
            "config": cfg.as_manifest(),
            "corpus_digest": _corpus_digest(records),
            "exemplars": {t: samples[t].manifest() for t in cfg.topics},
            "test_items": {
                t: [r["mr_paren"] for r in test_items[t]] for t in cfg.topics
            },
        }
    )
    report = {
        "design": "matrix",
        "manifest_digest": manifest["digest"],
        "sub_tables": sub_tables,
        "significance": significance,
        "items": items_out,
        "totals": {
            "test_items_per_sub_table": sum(len(v) for v in test_items.values()),
            "generations": generations,
        },
    }
    markdown = _matrix_markdown(report, cfg)
    tsv = _matrix_tsv(sub_tables)
    paths = _write_outputs(out_dir, "matrix", report, manifest, markdown, tsv=tsv)
    return RunResult(design="matrix", report=report, manifest=manifest, paths=paths)


def _matrix_significance(
    surface_by_table: dict[tuple[str, str], dict[tuple, float]],
    cfg: ExperimentConfig,
) -> list[dict]:
    """Paired t-tests between sub-tables, pooled and per test topic.

    Pairing key is the test item within its (train, test) cell; items
    missing from either side (backend gaps) drop out of the pairing.
    """
    entries = []
    for (key_a, key_b) in combinations(surface_by_table, 2):
        scores_a, scores_b = surface_by_table[key_a], surface_by_table[key_b]
        common = sorted(set(scores_a) & set(scores_b))
        scopes = [("pooled", common)]
        for topic in cfg.topics:
            scopes.append(
                (f"test_topic:{topic}", [k for k in common if k[1] == topic])
            )
        for scope, keys in scopes:
            entry = {
                "a": {"format": key_a[0], "backend": key_a[1]},
                "b": {"format": key_b[0], "backend": key_b[1]},
                "metric": "surface_similarity",
                "scope": scope,
                "n": len(keys),
                "t_statistic": None,
                "p_value": None,
                "degenerate": True,
            }
            if len(keys) >= 2:
                try:
                    result = paired_t(
                        [scores_a[k] for k in keys], [scores_b[k] for k in keys]
                    )
                    entry.update(
                        t_statistic=result.t_statistic,
                        p_value=result.p_value,
                        degenerate=result.degenerate,
                    )
                except DegenerateSampleError:
                    pass
            entries.append(entry)
    return entries


def _matrix_markdown(report: dict, cfg: ExperimentConfig) -> str:
    parts = [
        "# Cross-domain generation matrix",
        "",
        f"Manifest digest: `{report['manifest_digest']}`",
        "",
    ]
    for table in report["sub_tables"]:
        parts.append(f"## Format {table['format']} — backend {table['backend']}")
        parts.append("")
        cell_of = {
            (c["train_topic"], c["test_topic"]): c for c in table["cells"]
        }
        for label, key in (
            ("Surface similarity", "surface_mean"),
            ("Semantic accuracy", "semantic_mean"),
        ):
            avg_key = key.split("_")[0]
            header = ["train \\ test", *cfg.topics, "row avg"]
            rows = []
            for train in cfg.topics:
                row = [train]
                for test in cfg.topics:
                    cell = cell_of[(train, test)]
                    marker = "*" if cell["within_domain"] else ""
                    value = cell[key]
                    row.append(GAP if value is None else f"{value:.2f}{marker}")
                row.append(_fmt2(table["row_averages"][train][avg_key]))
                rows.append(row)
            footer = ["col avg"]
            for test in cfg.topics:
                footer.append(_fmt2(table["column_averages"][test][avg_key]))
            footer.append("")
            rows.append(footer)
            parts.append(f"### {label}")
            parts.append("")
            parts.append(_md_table(header, rows))
            parts.append("")
        parts.append("\\* within-domain cell (train topic = test topic)")
        parts.append("")
    parts.append("## Significance (paired t on surface similarity)")
    parts.append("")
    sig_rows = [
        [
            f"{e['a']['format']}/{e['a']['backend']}",
            f"{e['b']['format']}/{e['b']['backend']}",
            e["scope"],
            str(e["n"]),
            _fmt2(e["t_statistic"]),
            _fmt2(e["p_value"]),
        ]
        for e in report["significance"]
    ]
    parts.append(_md_table(["a", "b", "scope", "n", "t", "p"], sig_rows))
    parts.append("")
    return "\n".join(parts)


def _matrix_tsv(sub_tables: list[dict]) -> str:
    header = [
        "format", "backend", "train_topic", "test_topic", "n", "error_count",
        "within_domain", "surface_mean", "semantic_mean",
    ]
    rows = []
    for table in sub_tables:
        for cell in table["cells"]:
            rows.append(
                [
                    table["format"], table["backend"], cell["train_topic"],
                    cell["test_topic"], cell["n"], cell["error_count"],
                    cell["within_domain"], cell["surface_mean"], cell["semantic_mean"],
                ]
            )
    return _tsv_table(header, rows)


# ---------------------------------------------------------------------------
# novel-MR protocol
# ---------------------------------------------------------------------------

def run_novel(
    cfg: ExperimentConfig,
    novel_mr_file: str | Path | None = None,
    *,
    out_dir: str | Path,
    clients: Mapping[str, CompletionClient] | None = None,
    store: GenerationStore | None = None,
    annotations: Iterable[AnnotationRecord] | None = None,
) -> RunResult:
    """Generate from reference-free MRs and package every candidate.

    Prompts are two-shot from the stock tuning pair, s2s format only.
    The package carries no automatic scores: without references the only
    applicable metrics are the human ones, so the report aggregates
    whatever annotations are supplied and nothing else.
    """
    novel = load_novel_mrs(novel_mr_file)
    stock = load_stock_exemplars()
    pairs = stock.sets[NOVEL_EXEMPLAR_SET]
    client_map = _clients_for(cfg, clients, store)

    items: list[dict] = []
    errors = 0
    for backend in cfg.backends:
        client = client_map[backend]
        for novel_mr in novel:
            serialized = serialize_kg_s2s(novel_mr.mr)
            bundle = build_s2s(pairs, serialized)
            params = CompletionParams(
                backend_id=backend,
                stop_sequences=bundle.stop_sequences,
                num_candidates=cfg.num_candidates,
            )
            try:
                generated = client.complete(bundle.rendered, params)
            except BackendError:
                errors += 1
                continue
            for index, text in enumerate(generated.candidates):
                items.append(
                    {
                        "backend": backend,
                        "candidate_index": index,
                        "item_key": f"{generated.cache_key}#{index}",
                        "mr": serialized,
                        "novel_id": novel_mr.id,
                        "text": text,
                        "topic": novel_mr.mr.topic,
                        "total": len(novel_mr.mr.triples),
                    }
                )

    human_metrics = None
    if annotations is not None:
        package_keys = {item["item_key"] for item in items}
        selected = tuple(r for r in annotations if r.item_key in package_keys)
        if selected:
            human_metrics = [asdict(row) for row in aggregate(selected)]

    manifest = _finish_manifest(
        {
            "design": "novel",
            "config": cfg.as_manifest(),
            "exemplar_set": NOVEL_EXEMPLAR_SET,
            "novel_digest": _canonical_digest(
                [
                    {
                        "id": n.id,
                        "topic": n.mr.topic,
                        "triples": [
                            [t.subject, t.relation, t.object] for t in n.mr.triples
                        ],
                    }
                    for n in novel
                ]
            ),
            "item_keys": [item["item_key"] for item in items],
        }
    )
    report = {
        "design": "novel",
        "manifest_digest": manifest["digest"],
        "counts": {
            "mrs": len(novel),
            "items": len(items),
            "errors": errors,
            "num_candidates": cfg.num_candidates,
        },
        "human_metrics": human_metrics,
    }
    markdown = _novel_markdown(report)
    package_lines = [
        json.dumps(item, ensure_ascii=False, sort_keys=True) for item in items
    ]
    paths = _write_outputs(
        out_dir, "novel", report, manifest, markdown, package_lines=package_lines
    )
    return RunResult(design="novel", report=report, manifest=manifest, paths=paths)


def _novel_markdown(report: dict) -> str:
    counts = report["counts"]
    parts = [
        "# Novel-MR annotation package",
        "",
        f"Manifest digest: `{report['manifest_digest']}`",
        "",
        f"MRs: {counts['mrs']}; candidates per MR: {counts['num_candidates']};"
        f" packaged items: {counts['items']}; backend errors: {counts['errors']}.",
        "",
        "Surface similarity is not computed for this design: the MRs have",
        "no reference texts.",
        "",
    ]
    if report["human_metrics"] is None:
        parts.append("Human metrics: not yet annotated.")
        parts.append("")
    else:
        header = [
            "group", "n", "coherence", "sem acc (pooled)", "sem acc (mean)",
            "good hall.", "bad hall.", "question added", "da match",
        ]
        rows = [
            [
                row["group"], str(row["n"]), _fmt2(row["coherence_mean"]),
                _fmt2(row["semantic_accuracy_pooled"]),
                _fmt2(row["semantic_accuracy_mean"]),
                _fmt2(row["good_hallucination_rate"]),
                _fmt2(row["bad_hallucination_rate"]),
                _fmt2(row["question_added_rate"]),
                _fmt2(row["da_match_rate"]),
            ]
            for row in report["human_metrics"]
        ]
        parts.append(_md_table(header, rows))
        parts.append("")
    return "\n".join(parts)


# ---------------------------------------------------------------------------
# dialogue-act grid
# ---------------------------------------------------------------------------

def run_viggo(
    cfg: ExperimentConfig,
    out_dir: str | Path,
    *,
    clients: Mapping[str, CompletionClient] | None = None,
    store: GenerationStore | None = None,
) -> RunResult:
    """Run the fixed {3, 10}-exemplar by {s2s, qa} grid per backend.

    Exemplars are drawn per dialogue act from the train split with the
    whole test split excluded; the manifest records the per-act counts so
    the no-leakage audit is mechanical.
    """
    split_path = (
        (lambda s: Path(cfg.viggo_dir) / f"{s}.csv") if cfg.viggo_dir else (lambda s: None)
    )
    train = load_viggo_split("train", path=split_path("train"))
    test = load_viggo_split("test", path=split_path("test"))

    test_sorted = sorted(test, key=lambda r: r.key)
    size = min(cfg.viggo_test_size, len(test_sorted))
    rng = random.Random(cfg.seed)
    chosen = [test_sorted[i] for i in sorted(rng.sample(range(len(test_sorted)), size))]
    test_keys = frozenset(r.key for r in test_sorted)

    samples = {
        k: sample_exemplars(train, k, "per_dialogue_act", cfg.seed, exclude_keys=test_keys)
        for k in VIGGO_KS
    }
    lexicon = load_lexicon()
    client_map = _clients_for(cfg, clients, store)

    cells = []
    items_out = []
    generations = 0
    for k in VIGGO_KS:
        sample = samples[k]
        exemplar_pairs = {
            "s2s": sample.pairs(),
            "qa": tuple(
                (serialize_viggo_qa(parse_viggo_mr(e.mr)), e.reference)
                for e in sample.exemplars
            ),
        }
        for fmt in FORMATS:
            for backend in cfg.backends:
                client = client_map[backend]
                surface_scores, semantic_scores = [], []
                da_counts: Counter[str] = Counter()
                errors = 0
                for record in chosen:
                    parsed = parse_viggo_mr(record.mr)
                    test_mr = record.mr if fmt == "s2s" else serialize_viggo_qa(parsed)
                    bundle = _build_prompt(fmt, exemplar_pairs[fmt], test_mr)
                    params = CompletionParams(
                        backend_id=backend,
                        stop_sequences=bundle.stop_sequences,
                        num_candidates=cfg.num_candidates,
                    )
                    try:
                        generated = client.complete(bundle.rendered, params)
                    except BackendError:
                        errors += 1
                        continue
                    text = generated.candidates[0] if generated.candidates else ""
                    surface = surface_similarity(text, record.reference)
                    semantic = semantic_accuracy(parsed, text, lexicon=lexicon).ratio
                    verdict = dialogue_act_match(parsed.dialogue_act, text)
                    surface_scores.append(surface)
                    semantic_scores.append(semantic)
                    da_counts[verdict] += 1
                    generations += 1
                    items_out.append(
                        {
                            "backend": backend,
                            "da_match": verdict,
                            "dialogue_act": parsed.dialogue_act,
                            "format": fmt,
                            "item_key": f"{generated.cache_key}#0",
                            "k": k,
                            "model": backend,
                            "semantic": semantic,
                            "surface": surface,
                        }
                    )
                n = len(surface_scores)
                cells.append(
                    {
                        "k": k,
                        "format": fmt,
                        "backend": backend,
                        "n": n,
                        "error_count": errors,
                        "surface_mean": _mean(surface_scores),
                        "semantic_mean": _mean(semantic_scores),
                        "da_match_rate": da_counts["match"] / n if n else None,
                        "da_uncertain_rate": da_counts["uncertain"] / n if n else None,
                    }
                )

    exemplar_manifest = {}
    counts_equal_k = True
    overlap: set[str] = set()
    for k, sample in samples.items():
        per_da = Counter(e.dialogue_act for e in sample.exemplars)
        counts_equal_k = counts_equal_k and all(c == k for c in per_da.values())
        overlap |= set(sample.keys) & test_keys
        exemplar_manifest[str(k)] = {
            **sample.manifest(),
            "per_dialogue_act_counts": {da: per_da[da] for da in sorted(per_da)},
        }

    manifest = _finish_manifest(
        {
            "design": "viggo",
            "config": cfg.as_manifest(),
            "corpus_sizes": {"train": len(train), "test": len(test)},
            "test_keys": [r.key for r in chosen],
            "exemplars": exemplar_manifest,
            "audit": {
                "exemplar_test_overlap": sorted(overlap),
                "per_dialogue_act_counts_equal_k": counts_equal_k,
            },
        }
    )
    report = {
        "design": "viggo",
        "manifest_digest": manifest["digest"],
        "cells": cells,
        "items": items_out,
        "totals": {"test_items": size, "generations": generations},
    }
    markdown = _viggo_markdown(report)
    tsv = _viggo_tsv(cells)
    paths = _write_outputs(out_dir, "viggo", report, manifest, markdown, tsv=tsv)
    return RunResult(design="viggo", report=report, manifest=manifest, paths=paths)


def _viggo_markdown(report: dict) -> str:
    header = [
        "k", "format", "backend", "n", "surface", "semantic", "da match",
        "da uncertain",
    ]
    rows = [
        [
            str(c["k"]), c["format"], c["backend"], str(c["n"]),
            _fmt2(c["surface_mean"]), _fmt2(c["semantic_mean"]),
            _fmt2(c["da_match_rate"]), _fmt2(c["da_uncertain_rate"]),
        ]
        for c in report["cells"]
    ]
    return "\n".join(
        [
            "# Dialogue-act generation grid",
            "",
            f"Manifest digest: `{report['manifest_digest']}`",
            "",
            f"Test items per cell: {report['totals']['test_items']}.",
            "",
            _md_table(header, rows),
            "",
        ]
    )


def _viggo_tsv(cells: list[dict]) -> str:
    header = [
        "k", "format", "backend", "n", "error_count", "surface_mean",
        "semantic_mean", "da_match_rate", "da_uncertain_rate",
    ]
    rows = [
        [
            c["k"], c["format"], c["backend"], c["n"], c["error_count"],
            c["surface_mean"], c["semantic_mean"], c["da_match_rate"],
            c["da_uncertain_rate"],
        ]
        for c in cells
    ]
    return _tsv_table(header, rows)


# ---------------------------------------------------------------------------
# correlation of automatic scores with human labels
# ---------------------------------------------------------------------------

def correlate(scored, annotations) -> tuple[CorrelationRow, ...]:
    """Pearson r between an automatic score and each human metric.

    ``scored`` is an iterable of ScoredItem or a RunResult; joins happen
    on item_key, one pair per annotation record (so every rater counts).
    Rows come out per model then overall, semantic accuracy before
    coherence.  Cells with fewer than two pairs or zero variance are
    reported degenerate rather than raised, because one flat model must
    not hide the others.
    """
    if hasattr(scored, "scored_items"):
        scored = scored.scored_items()
    by_key: dict[str, ScoredItem] = {}
    for item in scored:
        existing = by_key.get(item.item_key)
        if existing is not None and existing != item:
            raise ValueError(f"conflicting scores for item {item.item_key!r}")
        by_key[item.item_key] = item

    joined = [
        (by_key[record.item_key], record)
        for record in annotations
        if record.item_key in by_key
    ]
    if not joined:
        raise EmptyGroupError("no annotation shares an item key with the scored set")

    models = sorted({item.model for item, _ in joined})
    rows = []
    for model in [*models, "overall"]:
        selected = (
            joined
            if model == "overall"
            else [(i, r) for i, r in joined if i.model == model]
        )
        for metric in ("semantic_accuracy", "coherence"):
            xs, ys = [], []
            for item, record in selected:
                if metric == "semantic_accuracy":
                    if record.total == 0:
                        continue
                    ys.append(record.realized / record.total)
                else:
                    ys.append(float(record.coherence))
                xs.append(item.score)
            if len(xs) < 2:
                result = StatsResult(n=len(xs), degenerate=True)
            else:
                try:
                    result = pearson(xs, ys)
                except DegenerateSampleError:
                    result = StatsResult(n=len(xs), degenerate=True)
            rows.append(CorrelationRow(model=model, metric=metric, result=result))
    return tuple(rows)


def correlation_report(rows: Iterable[CorrelationRow]) -> dict:
    """JSON-ready view of a correlation table."""
    return {
        "design": "correlation",
        "rows": [
            {
                "model": row.model,
                "metric": row.metric,
                "n": row.result.n,
                "pearson_r": row.result.pearson_r,
                "degenerate": row.result.degenerate,
            }
            for row in rows
        ],
    }


def correlation_markdown(rows: Iterable[CorrelationRow]) -> str:
    body = [
        [row.model, row.metric, str(row.result.n), _fmt2(row.result.pearson_r)]
        for row in rows
    ]
    return "\n".join(
        [
            "# Automatic-vs-human correlation",
            "",
            _md_table(["model", "metric", "n", "r"], body),
            "",
        ]
    )

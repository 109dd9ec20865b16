"""HTTP service exposing the toolkit's pipeline.

The service is a thin layer: request models validate and default, the
endpoints delegate to the same functions the library exposes, and toolkit
errors map to problem responses (400 for bad inputs and configuration,
502 when a completion backend fails).  Experiment endpoints write their
artifacts under the caller-supplied output directory exactly as the
library does, and echo the report, manifest, and artifact paths back.
"""

from __future__ import annotations

import dataclasses
import importlib.metadata
import json
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict, Field

from .annotation import AnnotationStore, aggregate
from .corpus import load_viggo_split
from .errors import BackendError, M2tError, MrSyntaxError
from .experiments import (
    NOVEL_EXEMPLAR_SET,
    ExperimentConfig,
    RunResult,
    ScoredItem,
    correlate,
    correlation_report,
    run_matrix,
    run_novel,
    run_viggo,
)
from .llm import CompletionClient, CompletionParams, GenerationStore, MockBackend
from .mr import (
    ViggoMr,
    parse_any_mr,
    parse_viggo_mr,
    serialize_kg_s2s,
    serialize_viggo_mr,
    serialize_viggo_qa,
)
from .prompts import build_qa, build_s2s, load_stock_exemplars, sample_exemplars
from .realizer import load_corpus_records

# ---------------------------------------------------------------------------
# request / response models
# ---------------------------------------------------------------------------


class GenerateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    mrs: list[str]
    format: str = Field("s2s", pattern="^(s2s|qa)$")
    k: int = Field(2, ge=0)
    backend: str = "mock"
    seed: int = 0
    num_candidates: int = Field(1, ge=1)
    corpus_path: str | None = None
    viggo: bool = False
    store_path: str | None = None


class GeneratedRecord(BaseModel):
    mr: str
    prompt: str
    cache_key: str
    candidates: list[str]
    backend: str


class GenerateResponse(BaseModel):
    records: list[GeneratedRecord]


class ConfigModel(BaseModel):
    """Experiment configuration; omitted fields take the library defaults."""

    model_config = ConfigDict(extra="forbid")

    corpus_path: str | None = None
    topics: list[str] | None = None
    k: int | None = None
    formats: list[str] | None = None
    backends: list[str] | None = None
    seed: int | None = None
    train_per_topic: int | None = None
    test_per_topic: int | None = None
    viggo_mode: bool | None = None
    viggo_test_size: int | None = None
    num_candidates: int | None = None
    viggo_dir: str | None = None


class MatrixRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    config: ConfigModel = ConfigModel()
    out_dir: str


class NovelRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    config: ConfigModel = ConfigModel()
    out_dir: str
    mr_file: str | None = None
    annotation_store: str | None = None


class ViggoRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    config: ConfigModel = ConfigModel()
    out_dir: str


class RunResponse(BaseModel):
    design: str
    report: dict
    manifest: dict
    paths: dict[str, str]


class AggregateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    store_path: str
    group_by: str | None = None
    generation_store: str | None = None


class AggregateResponse(BaseModel):
    rows: list[dict]


class CorrelateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    report_path: str
    store_path: str


class CorrelateResponse(BaseModel):
    design: str
    rows: list[dict]


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _experiment_config(model: ConfigModel) -> ExperimentConfig:
    kwargs = model.model_dump(exclude_none=True)
    try:
        return ExperimentConfig(**kwargs)
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc))


def _client_for(req: GenerateRequest) -> CompletionClient:
    if req.backend != "mock":
        raise HTTPException(
            status_code=400,
            detail=f"no client configured for backend {req.backend!r}",
        )
    store = GenerationStore(req.store_path) if req.store_path else None
    return CompletionClient(MockBackend(), store=store)


def _exemplar_pairs(req: GenerateRequest) -> tuple[tuple[str, str], ...]:
    if req.viggo:
        train = load_viggo_split("train")
        sample = sample_exemplars(train, req.k, "per_dialogue_act", req.seed)
        if req.format == "qa":
            return tuple(
                (serialize_viggo_qa(parse_viggo_mr(e.mr)), e.reference)
                for e in sample.exemplars
            )
        return sample.pairs()
    if req.corpus_path:
        pool = [
            r
            for r in load_corpus_records(req.corpus_path)
            if r.get("split") == "train"
        ]
        pool.sort(key=lambda r: r["mr_paren"])
        sample = sample_exemplars(pool, req.k, "uniform", req.seed)
        return sample.pairs()
    if req.k == 0:
        return ()
    if req.k == 2:
        return load_stock_exemplars().sets[NOVEL_EXEMPLAR_SET]
    raise HTTPException(
        status_code=400,
        detail=(
            f"k={req.k} needs a corpus_path to sample exemplars from;"
            " only k=2 has a stock fallback"
        ),
    )


def _serialize_test_mr(line: str, fmt: str) -> str:
    try:
        mr = parse_any_mr(line)
    except MrSyntaxError as exc:
        raise HTTPException(
            status_code=400, detail=f"could not parse MR {line!r}: {exc}"
        )
    if isinstance(mr, ViggoMr):
        return serialize_viggo_qa(mr) if fmt == "qa" else serialize_viggo_mr(mr)
    return serialize_kg_s2s(mr)


def _run_response(result: RunResult) -> RunResponse:
    return RunResponse(
        design=result.design,
        report=result.report,
        manifest=result.manifest,
        paths={name: str(path) for name, path in result.paths.items()},
    )


def _load_annotations(path: str) -> tuple:
    return tuple(AnnotationStore(path))


# ---------------------------------------------------------------------------
# application
# ---------------------------------------------------------------------------


def create_app() -> FastAPI:
    app = FastAPI(
        title="m2t",
        version=importlib.metadata.version("m2t"),
        description="Meaning-to-text generation and evaluation service.",
    )

    @app.exception_handler(M2tError)
    async def _toolkit_error(request, exc: M2tError):
        status = 502 if isinstance(exc, BackendError) else 400
        return JSONResponse(status_code=status, content={"detail": str(exc)})

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": app.version}

    @app.post("/generate")
    def generate(req: GenerateRequest) -> GenerateResponse:
        if not req.mrs:
            raise HTTPException(status_code=400, detail="mrs must not be empty")
        client = _client_for(req)
        pairs = _exemplar_pairs(req)
        records = []
        for line in req.mrs:
            test_mr = _serialize_test_mr(line, req.format)
            bundle = (
                build_s2s(pairs, test_mr)
                if req.format == "s2s"
                else build_qa(pairs, test_mr)
            )
            params = CompletionParams(
                backend_id=req.backend,
                stop_sequences=bundle.stop_sequences,
                num_candidates=req.num_candidates,
            )
            record = client.complete(bundle.rendered, params)
            records.append(
                GeneratedRecord(
                    mr=test_mr,
                    prompt=record.prompt,
                    cache_key=record.cache_key,
                    candidates=list(record.candidates),
                    backend=req.backend,
                )
            )
        return GenerateResponse(records=records)

    @app.post("/matrix")
    def matrix(req: MatrixRequest) -> RunResponse:
        cfg = _experiment_config(req.config)
        try:
            result = run_matrix(cfg, req.out_dir)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return _run_response(result)

    @app.post("/novel")
    def novel(req: NovelRequest) -> RunResponse:
        cfg = _experiment_config(req.config)
        annotations = (
            _load_annotations(req.annotation_store) if req.annotation_store else None
        )
        try:
            result = run_novel(
                cfg, req.mr_file, out_dir=req.out_dir, annotations=annotations
            )
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return _run_response(result)

    @app.post("/viggo")
    def viggo(req: ViggoRequest) -> RunResponse:
        cfg = _experiment_config(req.config)
        try:
            result = run_viggo(cfg, req.out_dir)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return _run_response(result)

    @app.post("/aggregate")
    def aggregate_endpoint(req: AggregateRequest) -> AggregateResponse:
        records = _load_annotations(req.store_path)
        store = GenerationStore(req.generation_store) if req.generation_store else None
        rows = aggregate(records, group_by=req.group_by, store=store)
        return AggregateResponse(rows=[dataclasses.asdict(row) for row in rows])

    @app.post("/correlate")
    def correlate_endpoint(req: CorrelateRequest) -> CorrelateResponse:
        report_path = Path(req.report_path)
        if not report_path.exists():
            raise HTTPException(
                status_code=400, detail=f"report not found: {report_path}"
            )
        report = json.loads(report_path.read_text(encoding="utf-8"))
        items = report.get("items")
        if not items:
            raise HTTPException(
                status_code=400, detail="report carries no scored items"
            )
        scored = [
            ScoredItem(
                item_key=item["item_key"], model=item["model"], score=item["surface"]
            )
            for item in items
        ]
        rows = correlate(scored, _load_annotations(req.store_path))
        return CorrelateResponse(**correlation_report(rows))

    return app

"""HTTP wrapper around the fitted scorer.

Wire contract: POST /score takes {"pairs": [{"candidate", "reference"}]}
and returns {"scores": [...], "model_id": "..."}, scores order-aligned
with the request.  GET /health reports readiness and the loaded model
before any scoring happens.  The checkpoint path comes from the
SCORER_MODEL_PATH environment variable (or an explicit argument); when
it cannot be loaded the service stays up and answers 503 with a
Retry-After header instead of scoring.

Requests share no mutable state: the model is loaded once at startup
and scoring is a pure function, so concurrent handling is safe.
"""

from __future__ import annotations

import os

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict

from .model import CheckpointError, FittedScorer, load_scorer

RETRY_AFTER_SECONDS = "5"


class Pair(BaseModel):
    model_config = ConfigDict(extra="forbid")

    candidate: str
    reference: str


class ScoreRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    pairs: list[Pair]


class ScoreResponse(BaseModel):
    scores: list[float]
    model_id: str


def create_app(model_path: str | os.PathLike | None = None) -> FastAPI:
    app = FastAPI(
        title="scorer-service",
        description="Reference-based sentence scoring behind the shared wire contract.",
    )

    resolved = model_path if model_path is not None else os.environ.get("SCORER_MODEL_PATH")
    scorer: FittedScorer | None
    load_error: str | None
    try:
        scorer = load_scorer(resolved)
        load_error = None
    except CheckpointError as exc:
        scorer = None
        load_error = str(exc)

    @app.exception_handler(RequestValidationError)
    async def _malformed(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health")
    def health() -> JSONResponse:
        if scorer is None:
            return JSONResponse(
                {"status": "unavailable", "ready": False, "error": load_error}
            )
        return JSONResponse(
            {"status": "ok", "ready": True, "model_id": scorer.model_id}
        )

    @app.post("/score")
    def score(request: ScoreRequest):
        if scorer is None:
            return JSONResponse(
                status_code=503,
                content={"detail": f"model unavailable: {load_error}"},
                headers={"Retry-After": RETRY_AFTER_SECONDS},
            )
        if not request.pairs:
            return JSONResponse(
                status_code=400, content={"detail": "pairs must not be empty"}
            )
        scores = scorer.score_pairs(
            (pair.candidate, pair.reference) for pair in request.pairs
        )
        return ScoreResponse(scores=scores, model_id=scorer.model_id)

    return app

"""Uniform client for text-completion backends plus a deterministic mock.

Every generation is cached in an append-only on-disk store so that later
annotation passes can reference immutable outputs.  Store lines are JSON
objects with keys in this documented order:

    cache_key, created_at, latency, params, prompt, candidates

and ``params`` sub-keys in this order:

    backend_id, temperature, max_tokens, stop_sequences, num_candidates

The cache key is a SHA-256 digest over the backend id, the prompt, and every
parameter field, so a hit implies a byte-identical request.
"""

from __future__ import annotations

import hashlib
import json
import os
import random
import re
import threading
import time
from collections import deque
from concurrent.futures import Future
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import httpx

from .errors import (
    AuthMissingError,
    BackendError,
    BudgetExceededError,
    MrSyntaxError,
    NoTemplateForSignatureError,
    UnparsableTestMrError,
)
from .mr import KgMr, ViggoMr, parse_any_mr
from .realizer import TemplateBank, default_bank, realize, resolve_topic
from .viggo_text import realize_viggo

# a line consisting solely of a prompt marker, e.g. "[SENTENCE]:" or "A:"
_BARE_MARKER = re.compile(r"^\[?[A-Za-z_]+\]?:$")
_MARKER_PREFIX = re.compile(r"^\[?[A-Za-z_]+\]?:\s+")

_RETRYABLE_STATUSES = frozenset({408, 429, 500, 502, 503, 504})


@dataclass(frozen=True)
class CompletionParams:
    """Sampling settings for one completion request."""

    backend_id: str
    temperature: float = 0.7
    max_tokens: int = 80
    stop_sequences: tuple[str, ...] = ()
    num_candidates: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "stop_sequences", tuple(self.stop_sequences))
        if not self.backend_id:
            raise ValueError("backend_id must be non-empty")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")
        if self.num_candidates < 1:
            raise ValueError("num_candidates must be >= 1")
        if any(not s for s in self.stop_sequences):
            raise ValueError("stop sequences must be non-empty strings")

    def payload(self) -> dict:
        """Field dict in the documented store order."""
        return {
            "backend_id": self.backend_id,
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
            "stop_sequences": list(self.stop_sequences),
            "num_candidates": self.num_candidates,
        }


def completion_cache_key(prompt: str, params: CompletionParams) -> str:
    """SHA-256 over the backend id, prompt, and all sampling parameters."""
    canonical = json.dumps(
        {"params": params.payload(), "prompt": prompt},
        sort_keys=True,
        ensure_ascii=False,
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def truncate_at_stops(text: str, stops: tuple[str, ...]) -> str:
    """Cut ``text`` at the earliest occurrence of any stop sequence."""
    cut = len(text)
    for stop in stops:
        index = text.find(stop)
        if index != -1:
            cut = min(cut, index)
    return text[:cut]


@dataclass(frozen=True)
class GenerationRecord:
    prompt: str
    params: CompletionParams
    candidates: tuple[str, ...]
    latency: float
    cache_key: str
    created_at: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "candidates", tuple(self.candidates))
        if len(self.candidates) > self.params.num_candidates:
            raise ValueError("more candidates than num_candidates permits")
        if self.latency < 0:
            raise ValueError("latency must be >= 0")
        if self.cache_key != completion_cache_key(self.prompt, self.params):
            raise ValueError("cache_key is not the digest of (prompt, params)")

    @classmethod
    def create(
        cls,
        prompt: str,
        params: CompletionParams,
        candidates: tuple[str, ...],
        latency: float,
    ) -> "GenerationRecord":
        return cls(
            prompt=prompt,
            params=params,
            candidates=tuple(candidates),
            latency=latency,
            cache_key=completion_cache_key(prompt, params),
            created_at=datetime.now(timezone.utc).isoformat(),
        )

    def to_json_line(self) -> str:
        return json.dumps(
            {
                "cache_key": self.cache_key,
                "created_at": self.created_at,
                "latency": self.latency,
                "params": self.params.payload(),
                "prompt": self.prompt,
                "candidates": list(self.candidates),
            },
            ensure_ascii=False,
        )

    @classmethod
    def from_json_line(cls, line: str) -> "GenerationRecord":
        raw = json.loads(line)
        return cls(
            prompt=raw["prompt"],
            params=CompletionParams(
                backend_id=raw["params"]["backend_id"],
                temperature=raw["params"]["temperature"],
                max_tokens=raw["params"]["max_tokens"],
                stop_sequences=tuple(raw["params"]["stop_sequences"]),
                num_candidates=raw["params"]["num_candidates"],
            ),
            candidates=tuple(raw["candidates"]),
            latency=raw["latency"],
            cache_key=raw["cache_key"],
            created_at=raw["created_at"],
        )


class GenerationStore:
    """Append-only JSONL store of generation records, keyed by cache_key.

    Readers may share a store concurrently; writes are serialized by a lock.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._records: list[GenerationRecord] = []
        self._by_key: dict[str, GenerationRecord] = {}
        if self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    self._add(GenerationRecord.from_json_line(line))

    def _add(self, record: GenerationRecord) -> None:
        self._records.append(record)
        self._by_key.setdefault(record.cache_key, record)

    def append(self, record: GenerationRecord) -> None:
        with self._lock:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as handle:
                handle.write(record.to_json_line() + "\n")
            self._add(record)

    def get(self, cache_key: str) -> GenerationRecord | None:
        with self._lock:
            return self._by_key.get(cache_key)

    def __len__(self) -> int:
        with self._lock:
            return len(self._records)

    def __iter__(self):
        with self._lock:
            return iter(list(self._records))


# ---------------------------------------------------------------------------
# backends
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BackendConfig:
    """Declarative request/response adapter for one HTTP completion API.

    ``text_path`` walks each element of the response's completions list down
    to its candidate string; an empty path means the list holds plain strings.
    An empty ``api_key_env`` disables the auth header entirely.
    """

    backend_id: str
    endpoint: str
    api_key_env: str = ""
    auth_header: str = "Authorization"
    auth_template: str = "Bearer {key}"
    prompt_field: str = "prompt"
    temperature_field: str = "temperature"
    max_tokens_field: str = "maxTokens"
    stop_field: str = "stopSequences"
    num_candidates_field: str = "numResults"
    completions_field: str = "completions"
    text_path: tuple[str, ...] = ("data", "text")
    extra_payload: tuple[tuple[str, object], ...] = ()
    timeout: float = 30.0


class HttpBackend:
    """Single "complete text" operation against one configured endpoint."""

    def __init__(self, config: BackendConfig, client: httpx.Client | None = None):
        self.config = config
        self._owns_client = client is None
        self._client = client or httpx.Client(timeout=config.timeout)

    @property
    def backend_id(self) -> str:
        return self.config.backend_id

    def _headers(self) -> dict[str, str]:
        cfg = self.config
        if not cfg.api_key_env:
            return {}
        key = os.environ.get(cfg.api_key_env)
        if not key:
            raise AuthMissingError(
                f"environment variable {cfg.api_key_env} is unset for "
                f"backend {cfg.backend_id}"
            )
        return {cfg.auth_header: cfg.auth_template.format(key=key)}

    def _payload(self, prompt: str, params: CompletionParams) -> dict:
        cfg = self.config
        payload = {
            cfg.prompt_field: prompt,
            cfg.temperature_field: params.temperature,
            cfg.max_tokens_field: params.max_tokens,
            cfg.stop_field: list(params.stop_sequences),
            cfg.num_candidates_field: params.num_candidates,
        }
        payload.update(dict(cfg.extra_payload))
        return payload

    def raw_complete(self, prompt: str, params: CompletionParams) -> list[str]:
        cfg = self.config
        headers = self._headers()
        try:
            response = self._client.post(
                cfg.endpoint, json=self._payload(prompt, params), headers=headers
            )
        except httpx.HTTPError as exc:
            raise BackendError(
                f"{cfg.backend_id}: transport failure: {exc}", retryable=True
            ) from exc
        if response.status_code != 200:
            raise BackendError(
                f"{cfg.backend_id}: HTTP {response.status_code} from {cfg.endpoint}",
                retryable=response.status_code in _RETRYABLE_STATUSES,
            )
        try:
            completions = response.json()[cfg.completions_field]
            texts = []
            for item in completions:
                for step in cfg.text_path:
                    item = item[step]
                if not isinstance(item, str):
                    raise TypeError(f"candidate is {type(item).__name__}, not str")
                texts.append(item)
        except (KeyError, TypeError, IndexError, ValueError) as exc:
            raise BackendError(
                f"{cfg.backend_id}: malformed response: {exc}", retryable=False
            ) from exc
        return texts

    def close(self) -> None:
        if self._owns_client:
            self._client.close()


# ---------------------------------------------------------------------------
# deterministic mock backend
# ---------------------------------------------------------------------------

def parse_test_mr(prompt: str):
    """The MR on the prompt's final content line.

    Trailing blank lines and bare marker lines ("[SENTENCE]:", "A:") are
    skipped; a "[PROMPT]: "-style marker prefix on the MR line is stripped.
    Only that one line is considered: exemplar MRs earlier in the prompt must
    never be mistaken for the test MR.
    """
    for line in reversed(prompt.split("\n")):
        stripped = line.strip()
        if not stripped or _BARE_MARKER.match(stripped):
            continue
        attempts = []
        prefix = _MARKER_PREFIX.match(line)
        if prefix:
            attempts.append(line[prefix.end():])
        attempts.append(line)
        for text in attempts:
            try:
                return parse_any_mr(text)
            except MrSyntaxError:
                continue
        raise UnparsableTestMrError(
            f"final prompt line is not a parsable MR: {line!r}"
        )
    raise UnparsableTestMrError("prompt has no content lines")


def _fallback_surface(mr: KgMr) -> str:
    return " ".join(
        f"The {t.relation} of {t.subject} is {t.object}." for t in mr.triples
    )


def _mock_candidates(
    prompt: str, params: CompletionParams, bank: TemplateBank
) -> list[str]:
    mr = parse_test_mr(prompt)
    if isinstance(mr, ViggoMr):
        return [realize_viggo(mr)] * params.num_candidates
    resolved = resolve_topic(mr, bank)
    if resolved is None:
        return [_fallback_surface(mr)] * params.num_candidates
    key = completion_cache_key(prompt, params)
    out = []
    for index in range(params.num_candidates):
        digest = hashlib.sha256(f"{key}:{index}".encode("utf-8")).digest()
        seed = int.from_bytes(digest[:8], "big")
        try:
            out.append(realize(resolved, bank, choice_seed=seed))
        except NoTemplateForSignatureError:  # pragma: no cover - match checked
            out.append(_fallback_surface(mr))
    return out


class MockBackend:
    """Offline backend realizing the prompt's final MR, deterministic."""

    backend_id = "mock"

    def __init__(self, bank: TemplateBank | None = None):
        self._bank = bank or default_bank()

    def raw_complete(self, prompt: str, params: CompletionParams) -> list[str]:
        return _mock_candidates(prompt, params, self._bank)


def mock_complete(
    prompt: str,
    params: CompletionParams,
    bank: TemplateBank | None = None,
) -> GenerationRecord:
    """Deterministic offline completion; no store, no network."""
    if not prompt.strip():
        raise ValueError("prompt must be non-empty")
    start = time.monotonic()
    raw = _mock_candidates(prompt, params, bank or default_bank())
    candidates = tuple(
        truncate_at_stops(text, params.stop_sequences)
        for text in raw[: params.num_candidates]
    )
    return GenerationRecord.create(
        prompt=prompt,
        params=params,
        candidates=candidates,
        latency=time.monotonic() - start,
    )


# ---------------------------------------------------------------------------
# client
# ---------------------------------------------------------------------------

class _SlidingWindowRateLimiter:
    """At most ``rate`` acquisitions in any sliding one-second window."""

    def __init__(self, rate: int, clock, sleep):
        if rate < 1:
            raise ValueError("rate must be >= 1")
        self._rate = rate
        self._clock = clock
        self._sleep = sleep
        self._sent: deque[float] = deque()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = self._clock()
                while self._sent and self._sent[0] <= now - 1.0:
                    self._sent.popleft()
                if len(self._sent) < self._rate:
                    self._sent.append(now)
                    return
                wait = self._sent[0] + 1.0 - now
            self._sleep(wait)


class CompletionClient:
    """Caching, retrying, rate-limited front end over one backend.

    Shareable across threads: the store serializes writers, and identical
    concurrent requests are coalesced into a single backend call.
    """

    def __init__(
        self,
        backend,
        store: GenerationStore | None = None,
        *,
        max_retries: int = 3,
        backoff_base: float = 0.25,
        rate_limit: int | None = None,
        request_budget: int | None = None,
        sleep=time.sleep,
        clock=time.monotonic,
    ):
        if max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        self.backend = backend
        self.store = store
        self._max_retries = max_retries
        self._backoff_base = backoff_base
        self._sleep = sleep
        self._clock = clock
        self._limiter = (
            _SlidingWindowRateLimiter(rate_limit, clock, sleep) if rate_limit else None
        )
        self._budget = request_budget
        self._requests_used = 0
        self._lock = threading.Lock()
        self._inflight: dict[str, Future] = {}

    def _spend(self) -> None:
        with self._lock:
            if self._budget is not None and self._requests_used >= self._budget:
                raise BudgetExceededError(
                    f"request budget of {self._budget} exhausted"
                )
            self._requests_used += 1

    def _attempts(self, prompt: str, params: CompletionParams) -> list[str]:
        for attempt in range(self._max_retries + 1):
            self._spend()
            if self._limiter is not None:
                self._limiter.acquire()
            try:
                return self.backend.raw_complete(prompt, params)
            except BackendError as exc:
                if not exc.retryable or attempt == self._max_retries:
                    raise
                self._sleep(self._backoff_base * 2**attempt)
        raise AssertionError("unreachable")  # pragma: no cover

    def complete(self, prompt: str, params: CompletionParams) -> GenerationRecord:
        if not prompt.strip():
            raise ValueError("prompt must be non-empty")
        if params.backend_id != self.backend.backend_id:
            raise ValueError(
                f"params are for backend {params.backend_id!r} but this client "
                f"drives {self.backend.backend_id!r}"
            )
        key = completion_cache_key(prompt, params)
        if self.store is not None:
            hit = self.store.get(key)
            if hit is not None:
                return hit
        with self._lock:
            pending = self._inflight.get(key)
            if pending is None:
                future: Future = Future()
                self._inflight[key] = future
                owner = True
            else:
                future = pending
                owner = False
        if not owner:
            return future.result()
        try:
            record = self._run(prompt, params, key)
            future.set_result(record)
            return record
        except BaseException as exc:
            future.set_exception(exc)
            raise
        finally:
            with self._lock:
                self._inflight.pop(key, None)

    def _run(self, prompt: str, params: CompletionParams, key: str) -> GenerationRecord:
        if self.store is not None:
            # a concurrent owner may have finished between lookup and here
            hit = self.store.get(key)
            if hit is not None:
                return hit
        start = self._clock()
        raw = self._attempts(prompt, params)
        latency = self._clock() - start
        candidates = tuple(
            truncate_at_stops(text, params.stop_sequences)
            for text in raw[: params.num_candidates]
        )
        record = GenerationRecord.create(
            prompt=prompt, params=params, candidates=candidates, latency=latency
        )
        if self.store is not None:
            self.store.append(record)
        return record

"""Fitted linear scorer over surface-overlap features.

A checkpoint is a JSON file carrying a model identifier, a bias, and one
weight per feature.  Scoring is a pure function of the checkpoint and
the input pair, so identical requests always produce identical scores.
The absolute values mean nothing on their own; only comparisons under
the same model_id are meaningful.
"""

from __future__ import annotations

import json
import string
from dataclasses import dataclass
from pathlib import Path

FEATURE_ORDER = ("exact_match", "token_f1", "char_ngram_jaccard", "length_ratio")

_PUNCT = set(string.punctuation)


class CheckpointError(Exception):
    """The checkpoint file is missing or malformed."""


def _tokens(text: str) -> list[str]:
    out = []
    for raw in text.casefold().split():
        token = raw.strip("".join(_PUNCT & set(raw)))
        if token:
            out.append(token)
    return out


def _char_ngrams(tokens: list[str], n: int = 4) -> set[str]:
    joined = " ".join(tokens)
    if len(joined) < n:
        return {joined} if joined else set()
    return {joined[i : i + n] for i in range(len(joined) - n + 1)}


def features(candidate: str, reference: str) -> dict[str, float]:
    cand = _tokens(candidate)
    ref = _tokens(reference)

    exact = 1.0 if cand == ref else 0.0

    cand_set, ref_set = set(cand), set(ref)
    if cand_set or ref_set:
        token_f1 = 2 * len(cand_set & ref_set) / (len(cand_set) + len(ref_set))
    else:
        token_f1 = 1.0

    cand_grams, ref_grams = _char_ngrams(cand), _char_ngrams(ref)
    union = cand_grams | ref_grams
    jaccard = len(cand_grams & ref_grams) / len(union) if union else 1.0

    if cand and ref:
        length_ratio = min(len(cand), len(ref)) / max(len(cand), len(ref))
    else:
        length_ratio = 1.0 if len(cand) == len(ref) else 0.0

    return {
        "exact_match": exact,
        "token_f1": token_f1,
        "char_ngram_jaccard": jaccard,
        "length_ratio": length_ratio,
    }


@dataclass(frozen=True)
class FittedScorer:
    model_id: str
    bias: float
    weights: dict[str, float]

    def score(self, candidate: str, reference: str) -> float:
        values = features(candidate, reference)
        return self.bias + sum(
            self.weights[name] * values[name] for name in FEATURE_ORDER
        )

    def score_pairs(self, pairs) -> list[float]:
        return [self.score(candidate, reference) for candidate, reference in pairs]


def default_checkpoint_path() -> Path:
    return Path(__file__).parent / "checkpoints" / "default.json"


def load_scorer(path: str | Path | None = None) -> FittedScorer:
    """Load a checkpoint; raises CheckpointError when unusable."""
    path = Path(path) if path is not None else default_checkpoint_path()
    if not path.exists():
        raise CheckpointError(f"checkpoint not found: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"checkpoint unreadable: {exc}")
    try:
        model_id = raw["model_id"]
        bias = float(raw["bias"])
        weights = {name: float(raw["weights"][name]) for name in FEATURE_ORDER}
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"checkpoint malformed: {exc}")
    if not isinstance(model_id, str) or not model_id:
        raise CheckpointError("checkpoint model_id must be a non-empty string")
    return FittedScorer(model_id=model_id, bias=bias, weights=weights)

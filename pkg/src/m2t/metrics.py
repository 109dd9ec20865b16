"""Automatic evaluation metrics.

Semantic accuracy works by slot alignment: a triple or slot counts as
realized when its value's surface form (or a lexicon variant) occurs as a
substring of the normalized output text.  Normalization case-folds, drops
punctuation except intra-token apostrophes and hyphens, and treats hyphens
as spaces at match time, so "third-person" realizes "third person".

Surface similarity is a local character-n-gram F-score; scores are
comparable only within one run and one scorer.  A remote learned scorer can
be swapped in through :class:`RemoteScorerClient`, which speaks the shared
wire contract (POST /score with candidate/reference pairs).

All metric functions are pure.
"""

from __future__ import annotations

import importlib.resources
import json
import math
import re
import warnings
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import httpx
import yaml
from scipy.special import stdtr

from .errors import DegenerateSampleError, EmptyGroupError, MissingLexiconEntryWarning
from .mr import KgMr, MeaningRepresentation, Triple, ViggoMr

# ---------------------------------------------------------------------------
# normalization
# ---------------------------------------------------------------------------

_DROP_RE = re.compile(r"[^0-9a-z'\s-]")
_SPACE_RE = re.compile(r"\s+")


def normalize_for_alignment(text: str) -> str:
    """Case-fold, drop punctuation except intra-token ' and -, single-space."""
    folded = text.casefold().replace("’", "'")
    cleaned = _DROP_RE.sub(" ", folded)
    tokens = (t.strip("'-") for t in cleaned.split())
    return " ".join(t for t in tokens if t)


def _match_view(text: str) -> str:
    # hyphen and space are equivalent when checking containment
    return _SPACE_RE.sub(" ", normalize_for_alignment(text).replace("-", " ")).strip()


def _occurs(needle: str, haystack_view: str) -> bool:
    view = _match_view(needle)
    return bool(view) and view in haystack_view


# ---------------------------------------------------------------------------
# spelled-out year forms
# ---------------------------------------------------------------------------

_ONES = (
    "zero one two three four five six seven eight nine ten eleven twelve"
    " thirteen fourteen fifteen sixteen seventeen eighteen nineteen"
).split()
_TENS = "twenty thirty forty fifty sixty seventy eighty ninety".split()
_YEAR_RE = re.compile(r"[12][0-9]{3}")


def _words_under_100(n: int) -> str:
    if n < 20:
        return _ONES[n]
    tens, ones = divmod(n, 10)
    word = _TENS[tens - 2]
    return f"{word} {_ONES[ones]}" if ones else word


def _year_variants(value: str) -> tuple[str, ...]:
    if not _YEAR_RE.fullmatch(value):
        return ()
    year = int(value)
    century, rest = divmod(year, 100)
    forms = []
    if rest == 0:
        forms.append(f"{_words_under_100(century)} hundred")
    elif rest < 10:
        forms.append(f"{_words_under_100(century)} oh {_ONES[rest]}")
    else:
        forms.append(f"{_words_under_100(century)} {_words_under_100(rest)}")
    if 2000 <= year < 3000:
        base = f"{_ONES[century // 10]} thousand"
        forms.append(f"{base} {_words_under_100(rest)}" if rest else base)
    return tuple(forms)


# ---------------------------------------------------------------------------
# lexicon
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Lexicon:
    """Surface-variant tables for slot alignment.

    ``values`` maps a slot value to acceptable variants; ``booleans`` maps a
    boolean attribute to per-polarity keyword lists; ``empty_queries`` maps
    an attribute to keywords that realize an empty-value slot.  All lookups
    are case-folded.
    """

    values: dict[str, tuple[str, ...]] = field(default_factory=dict)
    booleans: dict[str, dict[str, tuple[str, ...]]] = field(default_factory=dict)
    empty_queries: dict[str, tuple[str, ...]] = field(default_factory=dict)

    @classmethod
    def empty(cls) -> "Lexicon":
        return cls()

    def variants_for(self, value: str) -> tuple[str, ...]:
        return self.values.get(value.casefold(), ())

    def boolean_rule(self, attribute: str, polarity: str) -> tuple[str, ...] | None:
        rule = self.booleans.get(attribute.casefold())
        if rule is None:
            return None
        return rule.get(polarity.casefold())

    def empty_rule(self, attribute: str) -> tuple[str, ...] | None:
        return self.empty_queries.get(attribute.casefold())


def load_lexicon(path: str | Path | None = None) -> Lexicon:
    """Load a lexicon file; defaults to the one shipped with the package."""
    if path is None:
        resource = importlib.resources.files("m2t").joinpath("data/lexicon.yaml")
        raw = yaml.safe_load(resource.read_text(encoding="utf-8"))
    else:
        raw = yaml.safe_load(Path(path).read_text(encoding="utf-8"))

    def clean(variants) -> tuple[str, ...]:
        out = tuple(str(v) for v in variants)
        if not out:
            raise ValueError("lexicon variant list is empty")
        return out

    values = {str(k).casefold(): clean(v) for k, v in (raw.get("values") or {}).items()}
    booleans = {
        str(attr).casefold(): {str(pol).casefold(): clean(kw) for pol, kw in rule.items()}
        for attr, rule in (raw.get("booleans") or {}).items()
    }
    empty_queries = {
        str(k).casefold(): clean(v) for k, v in (raw.get("empty_queries") or {}).items()
    }
    return Lexicon(values=values, booleans=booleans, empty_queries=empty_queries)


# ---------------------------------------------------------------------------
# semantic accuracy
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SlotMatch:
    key: str
    matched: bool
    matched_span: str | None = None


@dataclass(frozen=True)
class AlignmentReport:
    realized: int
    total: int
    ratio: float
    per_slot: tuple[SlotMatch, ...]


def _warn_missing(kind: str, name: str) -> None:
    warnings.warn(
        f"no {kind} lexicon entry for {name!r}; falling back to verbatim matching",
        MissingLexiconEntryWarning,
        stacklevel=3,
    )


def _find_span(candidates, haystack_view: str) -> str | None:
    for candidate in candidates:
        if _occurs(candidate, haystack_view):
            return candidate
    return None


def _value_candidates(value: str, lexicon: Lexicon) -> tuple[str, ...]:
    return (value, *lexicon.variants_for(value), *_year_variants(value))


def semantic_accuracy(
    mr: MeaningRepresentation, text: str, lexicon: Lexicon | None = None
) -> AlignmentReport:
    """Fraction of the MR's triples/slots realized in ``text``.

    A KG triple is realized iff its object (or a variant) occurs; a slot is
    realized iff every one of its values occurs.  Boolean and empty-value
    slots match on keyword rules; the dialogue act is not a scored slot.
    Empty text is legal and scores zero.
    """
    lexicon = lexicon or Lexicon.empty()
    haystack = _match_view(text)
    matches: list[SlotMatch] = []

    if isinstance(mr, KgMr):
        for triple in mr.triples:
            span = _find_span(_value_candidates(triple.object, lexicon), haystack)
            matches.append(
                SlotMatch(
                    key=f"({triple.subject}, {triple.relation}, {triple.object})",
                    matched=span is not None,
                    matched_span=span,
                )
            )
    elif isinstance(mr, ViggoMr):
        if not mr.slots:
            raise EmptyGroupError("MR has no scoreable slots")
        for attr, values in mr.slots:
            matches.append(_match_slot(attr, values, lexicon, haystack))
    else:
        raise TypeError(f"not a meaning representation: {type(mr).__name__}")

    realized = sum(1 for m in matches if m.matched)
    total = len(matches)
    return AlignmentReport(
        realized=realized,
        total=total,
        ratio=realized / total,
        per_slot=tuple(matches),
    )


def _match_slot(attr: str, values, lexicon: Lexicon, haystack: str) -> SlotMatch:
    key = f"{attr}[{', '.join(values)}]"
    if not values:
        keywords = lexicon.empty_rule(attr)
        if keywords is None:
            _warn_missing("empty-query", attr)
            keywords = (attr.replace("_", " "),)
        span = _find_span(keywords, haystack)
        return SlotMatch(key=key, matched=span is not None, matched_span=span)

    if len(values) == 1 and values[0].casefold() in ("yes", "no"):
        keywords = lexicon.boolean_rule(attr, values[0])
        if keywords is None and lexicon.boolean_rule(attr, "yes") is None:
            _warn_missing("boolean", attr)
            keywords = values
        elif keywords is None:
            keywords = values
        span = _find_span(keywords, haystack)
        return SlotMatch(key=key, matched=span is not None, matched_span=span)

    spans = []
    for value in values:
        span = _find_span(_value_candidates(value, lexicon), haystack)
        if span is None:
            return SlotMatch(key=key, matched=False)
        spans.append(span)
    return SlotMatch(key=key, matched=True, matched_span="; ".join(spans))


# ---------------------------------------------------------------------------
# hand-labeled alignment examples
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AlignedExample:
    """One hand-labeled (MR, output) pair with its gold alignment count."""

    id: str
    mr: KgMr
    text: str
    realized: int
    total: int


def load_aligned_examples(path: str | Path | None = None) -> tuple[AlignedExample, ...]:
    """Load the hand-labeled oracle set the aligner is calibrated against.

    The examples use relations outside the generation schema on purpose:
    the aligner scores arbitrary triples, so the set is parsed leniently
    and never schema-validated.
    """
    if path is None:
        resource = importlib.resources.files("m2t").joinpath(
            "data/fixtures/aligner_oracle.jsonl"
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
            AlignedExample(
                id=raw["id"],
                mr=KgMr(
                    topic=raw["topic"],
                    triples=tuple(Triple(s, r, o) for s, r, o in raw["triples"]),
                ),
                text=raw["text"],
                realized=raw["realized"],
                total=raw["total"],
            )
        )
    return tuple(out)


# ---------------------------------------------------------------------------
# dialogue-act form rules
# ---------------------------------------------------------------------------

CONFIRM_FRAMES = ("do you mean", "you mean", "referring to", "talking about")
QUESTION_DAS = frozenset(
    {"confirm", "suggest", "request", "request_attribute", "request_explanation",
     "verify_attribute"}
)
DECLARATIVE_DAS = frozenset({"inform", "give_opinion", "recommend"})

_SENTENCE_SPLIT_RE = re.compile(r"(?<=[.!?])\s+")


def _is_question(sentence: str) -> bool:
    return sentence.rstrip().rstrip(".").rstrip().endswith("?")


def _sentences(text: str) -> list[str]:
    return [s for s in _SENTENCE_SPLIT_RE.split(text.strip()) if s.strip()]


def dialogue_act_match(da: str, text: str) -> str:
    """Rule-based verdict "match"/"mismatch"/"uncertain".

    Advisory only; human labels override this in reports.
    """
    sentences = _sentences(text)
    if not sentences:
        return "mismatch"
    ends_q = _is_question(sentences[-1])

    if da == "confirm":
        if not ends_q:
            return "mismatch"
        folded = text.casefold()
        return "match" if any(f in folded for f in CONFIRM_FRAMES) else "uncertain"

    if da in QUESTION_DAS:
        return "match" if ends_q else "mismatch"

    if da in DECLARATIVE_DAS:
        question_idx = [i for i, s in enumerate(sentences) if _is_question(s)]
        if not question_idx:
            return "match"
        if question_idx == [len(sentences) - 1] and len(sentences) > 1:
            return "match"  # trailing question added to declarative content
        if len(sentences) == 1:
            return "mismatch"
        return "uncertain"

    return "uncertain"


def question_added(
    mr: MeaningRepresentation, text: str, licensed_das: frozenset[str] = QUESTION_DAS
) -> bool:
    """True iff the text ends in a question the MR did not license.

    KG MRs never license questions.  A question-licensing dialogue act
    licenses exactly one; a second question counts as added.
    """
    sentences = _sentences(text)
    if not sentences or not _is_question(sentences[-1]):
        return False
    if isinstance(mr, KgMr):
        return True
    if mr.dialogue_act not in licensed_das:
        return True
    question_count = sum(1 for s in sentences if _is_question(s))
    return question_count >= 2


# ---------------------------------------------------------------------------
# surface similarity: character n-gram F-score, n = 1..6, beta = 2
# ---------------------------------------------------------------------------

_MAX_ORDER = 6
_BETA_SQ = 4  # beta = 2 weights recall twice as much as precision


def _char_ngrams(text: str, n: int) -> Counter:
    return Counter(text[i : i + n] for i in range(len(text) - n + 1))


def surface_similarity(candidate: str, reference: str) -> float:
    """Local reference-based score in [0, 1].

    Whitespace is ignored; n-gram orders where both sides are too short are
    skipped.  Comparable only within one run; a learned scorer behind the
    shared wire contract can replace it for cross-checking.
    """
    cand = "".join(candidate.split())
    ref = "".join(reference.split())
    scores = []
    for n in range(1, _MAX_ORDER + 1):
        cgrams = _char_ngrams(cand, n)
        rgrams = _char_ngrams(ref, n)
        if not cgrams and not rgrams:
            continue
        if not cgrams or not rgrams:
            scores.append(0.0)
            continue
        overlap = sum((cgrams & rgrams).values())
        precision = overlap / sum(cgrams.values())
        recall = overlap / sum(rgrams.values())
        if precision + recall == 0:
            scores.append(0.0)
        else:
            scores.append(
                (1 + _BETA_SQ) * precision * recall / (_BETA_SQ * precision + recall)
            )
    return sum(scores) / len(scores) if scores else 0.0


def word_count(text: str) -> int:
    """Whitespace-token count after trimming."""
    return len(text.split())


# ---------------------------------------------------------------------------
# statistics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StatsResult:
    """Result of one statistical test; only that test's fields are set."""

    n: int
    pearson_r: float | None = None
    t_statistic: float | None = None
    p_value: float | None = None
    degenerate: bool = False


def pearson(xs, ys) -> StatsResult:
    """Sample Pearson correlation coefficient."""
    xs = [float(v) for v in xs]
    ys = [float(v) for v in ys]
    n = len(xs)
    if n != len(ys):
        raise ValueError("samples must have equal length")
    if n < 2:
        raise ValueError("need at least two points")
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    dx = [v - mx for v in xs]
    dy = [v - my for v in ys]
    sxx = math.fsum(a * a for a in dx)
    syy = math.fsum(b * b for b in dy)
    if sxx == 0 or syy == 0:
        raise DegenerateSampleError("zero variance in one of the samples")
    sxy = math.fsum(a * b for a, b in zip(dx, dy))
    return StatsResult(n=n, pearson_r=sxy / math.sqrt(sxx * syy))


def paired_t(xs, ys) -> StatsResult:
    """Two-sided paired t-test; p from the t distribution with n-1 dof.

    All-zero differences yield t = 0, p = 1 with the degenerate flag set;
    zero-variance nonzero-mean differences have no finite statistic and
    raise instead.
    """
    xs = [float(v) for v in xs]
    ys = [float(v) for v in ys]
    n = len(xs)
    if n != len(ys):
        raise ValueError("samples must have equal length")
    if n < 2:
        raise ValueError("need at least two points")
    diffs = [x - y for x, y in zip(xs, ys)]
    mean = math.fsum(diffs) / n
    var = math.fsum((d - mean) ** 2 for d in diffs) / (n - 1)
    if var == 0:
        if mean == 0:
            return StatsResult(n=n, t_statistic=0.0, p_value=1.0, degenerate=True)
        raise DegenerateSampleError(
            "differences have zero variance but nonzero mean; t is unbounded"
        )
    t = mean / math.sqrt(var / n)
    p = 2 * float(stdtr(n - 1, -abs(t)))
    return StatsResult(n=n, t_statistic=t, p_value=p)


# ---------------------------------------------------------------------------
# remote learned scorer client (shared wire contract)
# ---------------------------------------------------------------------------

class RemoteScorerClient:
    """Client for a scorer service: POST /score with candidate/reference pairs.

    Request: {"pairs": [{"candidate": ..., "reference": ...}, ...]}
    Response: {"scores": [...], "model_id": ...}
    """

    def __init__(self, base_url: str, timeout: float = 30.0, transport=None):
        self._client = httpx.Client(
            base_url=base_url, timeout=timeout, transport=transport
        )
        self.model_id: str | None = None

    def score(self, pairs: list[tuple[str, str]]) -> list[float]:
        payload = {
            "pairs": [{"candidate": c, "reference": r} for c, r in pairs]
        }
        response = self._client.post("/score", json=payload)
        response.raise_for_status()
        body = response.json()
        self.model_id = body.get("model_id")
        scores = [float(s) for s in body["scores"]]
        if len(scores) != len(pairs):
            raise ValueError("scorer returned misaligned score list")
        return scores

    def health(self) -> dict:
        response = self._client.get("/health")
        response.raise_for_status()
        return response.json()

    def close(self) -> None:
        self._client.close()

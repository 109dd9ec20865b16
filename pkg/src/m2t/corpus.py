"""Loading the shipped dialogue-act corpus.

The corpus ships as one CSV per split with an MR column and a reference
column.  Records get stable content-derived keys so exemplar sampling can
be audited against a test split regardless of row order.
"""

from __future__ import annotations

import csv
import hashlib
import importlib.resources
import io
from dataclasses import dataclass
from pathlib import Path

from .mr import parse_viggo_mr

SPLITS = ("train", "valid", "test")


@dataclass(frozen=True)
class ViggoRecord:
    mr: str
    reference: str
    dialogue_act: str
    key: str
    split: str


def record_key(mr: str, reference: str) -> str:
    """Stable content key for one (MR, reference) pair."""
    return hashlib.sha256(f"{mr}\t{reference}".encode()).hexdigest()[:16]


def load_viggo_split(split: str, path: str | Path | None = None) -> tuple[ViggoRecord, ...]:
    """Load one corpus split; every MR is parsed, so loading revalidates it."""
    if split not in SPLITS:
        raise ValueError(f"unknown split {split!r}; expected one of {SPLITS}")
    if path is None:
        resource = importlib.resources.files("m2t").joinpath(f"data/viggo/{split}.csv")
        text = resource.read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")

    records = []
    for row in csv.DictReader(io.StringIO(text)):
        mr = row["mr"]
        reference = row["ref"]
        records.append(
            ViggoRecord(
                mr=mr,
                reference=reference,
                dialogue_act=parse_viggo_mr(mr).dialogue_act,
                key=record_key(mr, reference),
                split=split,
            )
        )
    return tuple(records)

"""End-to-end checks: the toolkit's remote-scorer client against a live server.

Runs a real uvicorn instance on a loopback port so the wire format,
not just the ASGI app, is what gets exercised.
"""

import socket
import threading
import time

import pytest
import uvicorn

from m2t.annotation import AnnotationRecord
from m2t.experiments import ScoredItem, correlate
from m2t.metrics import RemoteScorerClient

from scorer_service.model import load_scorer
from scorer_service.service import create_app

COHERENT = "The film was released in 1996 and won two awards."
INCOHERENT_CANDIDATE = "Purple runs the seventeen backwards tomorrow."
INCOHERENT_REFERENCE = "The song reached number one on the charts."


@pytest.fixture(scope="module")
def base_url():
    with socket.socket() as probe:
        probe.bind(("127.0.0.1", 0))
        port = probe.getsockname()[1]
    config = uvicorn.Config(
        create_app(), host="127.0.0.1", port=port, log_level="warning"
    )
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.monotonic() + 10.0
    while not server.started:
        if time.monotonic() > deadline or not thread.is_alive():
            raise RuntimeError("scorer service did not start")
        time.sleep(0.02)
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=5.0)


@pytest.fixture(scope="module")
def remote(base_url):
    client = RemoteScorerClient(base_url)
    yield client
    client.close()


def test_health_over_the_wire(remote):
    body = remote.health()
    assert body["ready"] is True
    assert body["model_id"] == "overlap-ls-v1"


def test_scores_order_aligned_with_local_model(remote, ranking_pairs):
    pairs = [(x, x) for x, _ in ranking_pairs] + ranking_pairs
    scores = remote.score(pairs)
    assert scores == load_scorer().score_pairs(pairs)
    assert remote.model_id == "overlap-ls-v1"


def test_correlate_joins_remote_scores_with_annotations(remote):
    # ten coherent items share one pair and ten incoherent share another,
    # so score and label each take exactly two values and the join is
    # perfectly linear by construction
    pairs = [(COHERENT, COHERENT)] * 10
    pairs += [(INCOHERENT_CANDIDATE, INCOHERENT_REFERENCE)] * 10
    scores = remote.score(pairs)
    s_hi, s_lo = scores[0], scores[-1]
    assert s_hi > s_lo
    assert scores == [s_hi] * 10 + [s_lo] * 10

    scored = [
        ScoredItem(item_key=f"item-{i:02d}", model="sidecar", score=score)
        for i, score in enumerate(scores)
    ]
    annotations = tuple(
        AnnotationRecord(
            item_key=f"item-{i:02d}",
            rater_id="r1",
            coherence=3 if i < 10 else 1,
            realized=2 if i < 10 else 0,
            total=2,
            good_hallucination=False,
            bad_hallucination=i >= 10,
            question_added=False,
        )
        for i in range(20)
    )
    rows = correlate(scored, annotations)
    by_label = {(row.model, row.metric): row.result for row in rows}
    for model in ("sidecar", "overall"):
        for metric in ("semantic_accuracy", "coherence"):
            result = by_label[(model, metric)]
            assert result.n == 20
            assert not result.degenerate
            assert result.pearson_r == pytest.approx(1.0, abs=1e-9)

"""Contract tests for the scorer HTTP service."""

import json
import random

import pytest
from fastapi.testclient import TestClient

from scorer_service.model import load_scorer
from scorer_service.service import create_app


@pytest.fixture(scope="module")
def client():
    with TestClient(create_app()) as c:
        yield c


def score_payload(pairs):
    return {"pairs": [{"candidate": c, "reference": r} for c, r in pairs]}


class TestHealth:
    def test_ready(self, client):
        body = client.get("/health").json()
        assert body == {"status": "ok", "ready": True, "model_id": "overlap-ls-v1"}


class TestScore:
    def test_scores_match_model_exactly(self, client, ranking_pairs):
        # JSON floats round-trip exactly, so equality is strict
        rng = random.Random(11)
        pool = [x for pair in ranking_pairs for x in pair]
        pairs = [(rng.choice(pool), rng.choice(pool)) for _ in range(100)]
        body = client.post("/score", json=score_payload(pairs)).json()
        scorer = load_scorer()
        assert body["model_id"] == scorer.model_id
        assert body["scores"] == scorer.score_pairs(pairs)

    def test_order_alignment_under_permutation(self, client, ranking_pairs):
        base = client.post("/score", json=score_payload(ranking_pairs)).json()[
            "scores"
        ]
        order = list(range(len(ranking_pairs)))
        random.Random(7).shuffle(order)
        shuffled = client.post(
            "/score", json=score_payload([ranking_pairs[i] for i in order])
        ).json()["scores"]
        assert shuffled == [base[i] for i in order]

    def test_identity_outranks_unrelated(self, client, ranking_pairs):
        identity = client.post(
            "/score", json=score_payload([(x, x) for x, _ in ranking_pairs])
        ).json()["scores"]
        unrelated = client.post("/score", json=score_payload(ranking_pairs)).json()[
            "scores"
        ]
        assert all(hi > lo for hi, lo in zip(identity, unrelated))

    def test_identical_request_identical_response(self, client, ranking_pairs):
        payload = score_payload(ranking_pairs[:5])
        first = client.post("/score", json=payload)
        second = client.post("/score", json=payload)
        assert first.content == second.content

    def test_empty_pairs_rejected(self, client):
        response = client.post("/score", json={"pairs": []})
        assert response.status_code == 400
        assert "empty" in response.json()["detail"]

    @pytest.mark.parametrize(
        "payload",
        [
            {"pairs": [{"candidate": "a"}]},
            {"pairs": [{"candidate": "a", "reference": "b", "weight": 1}]},
            {"pairs": "not a list"},
            {},
        ],
    )
    def test_malformed_request_rejected(self, client, payload):
        assert client.post("/score", json=payload).status_code == 400


class TestUnavailableCheckpoint:
    def test_score_returns_503_with_retry_after(self, tmp_path):
        with TestClient(create_app(tmp_path / "missing.json")) as client:
            health = client.get("/health").json()
            assert health["ready"] is False
            assert "not found" in health["error"]
            response = client.post("/score", json=score_payload([("a", "a")]))
            assert response.status_code == 503
            assert response.headers["Retry-After"] == "5"


class TestModelPathEnv:
    def test_env_checkpoint_selected(self, tmp_path, monkeypatch):
        checkpoint = tmp_path / "alt.json"
        checkpoint.write_text(
            json.dumps(
                {
                    "model_id": "alt-v9",
                    "bias": 0.25,
                    "weights": {
                        "exact_match": 1.0,
                        "token_f1": 0.0,
                        "char_ngram_jaccard": 0.0,
                        "length_ratio": 0.0,
                    },
                }
            ),
            encoding="utf-8",
        )
        monkeypatch.setenv("SCORER_MODEL_PATH", str(checkpoint))
        with TestClient(create_app()) as client:
            assert client.get("/health").json()["model_id"] == "alt-v9"
            body = client.post(
                "/score", json=score_payload([("a", "a"), ("a", "b")])
            ).json()
            assert body["scores"] == [1.25, 0.25]
            assert body["model_id"] == "alt-v9"

import pytest
from fastapi.testclient import TestClient

from encoder_service.app import create_app
from encoder_service.tiny import build


@pytest.fixture(scope="session")
def model_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("model") / "tiny"
    build(out, dim=64, layers=2, heads=2, seed=0)
    return out


@pytest.fixture(scope="session")
def client(model_dir):
    return TestClient(create_app(str(model_dir)))


class TestHealth:
    def test_reports_status_and_dim(self, client):
        body = client.get("/health").json()
        assert body == {"status": "ok", "dim": 64}


class TestEmbed:
    def test_one_sequence_per_text_with_model_dim(self, client):
        resp = client.post("/v1/embed", json={"texts": ["farm land", "a"]})
        assert resp.status_code == 200
        body = resp.json()
        assert body["dim"] == 64
        assert len(body["embeddings"]) == 2
        for seq in body["embeddings"]:
            assert len(seq) >= 1
            assert all(len(vec) == 64 for vec in seq)

    def test_identical_texts_identical_sequences(self, client):
        body = client.post("/v1/embed", json={"texts": ["a", "a"]}).json()
        assert body["embeddings"][0] == body["embeddings"][1]

    def test_empty_text_still_encodes(self, client):
        body = client.post("/v1/embed", json={"texts": [""]}).json()
        assert len(body["embeddings"][0]) >= 1

    def test_idempotent_across_requests(self, client):
        payload = {"texts": ["the midwest has farmland"]}
        first = client.post("/v1/embed", json=payload).json()
        second = client.post("/v1/embed", json=payload).json()
        assert first == second

    def test_malformed_json_is_400(self, client):
        resp = client.post("/v1/embed", content=b"{oops",
                           headers={"Content-Type": "application/json"})
        assert resp.status_code == 400
        assert "error" in resp.json()

    def test_wrong_shape_is_400(self, client):
        resp = client.post("/v1/embed", json={"texts": "not a list"})
        assert resp.status_code == 400


class TestScore:
    def test_query_outranks_unrelated(self, client):
        resp = client.post("/v1/score", json={
            "query": "buy farmland in the midwest",
            "candidates": ["buy farmland in the midwest", "qqq zzz vvv"],
        })
        scores = resp.json()["scores"]
        assert len(scores) == 2
        assert scores[0] > scores[1]

    def test_score_count_matches_candidates(self, client):
        resp = client.post("/v1/score", json={"query": "a", "candidates": ["b", "c", "d"]})
        assert len(resp.json()["scores"]) == 3

    def test_idempotent(self, client):
        payload = {"query": "farm", "candidates": ["field", "engine"]}
        assert client.post("/v1/score", json=payload).json() == \
            client.post("/v1/score", json=payload).json()

import numpy as np
import pytest
from fastapi.testclient import TestClient

from requery.corpus import Document, tokenize
from requery.expand import ExpanderConfig, expand
from requery.search import build_index
from requery.service import create_app

DOCS = [Document("d0", "reverse an array in java", "int[] reverse(int[] xs)"),
        Document("d1", "reverse an array in python", "list(reversed(xs))"),
        Document("d2", "sort a list quickly", "sorted(xs)")]


@pytest.fixture(scope="module")
def client(toy_setup):
    index = build_index(DOCS)
    app = create_app(model=toy_setup["model"], index=index, documents=DOCS,
                     expander=ExpanderConfig(k=3, m=4), seed=101)
    return TestClient(app)


@pytest.fixture(scope="module")
def bare_client():
    return TestClient(create_app())


class TestHealth:
    def test_reports_loaded_components(self, client):
        payload = client.get("/health").json()
        assert payload["status"] == "ok"
        assert payload["model_loaded"] is True
        assert payload["index_docs"] == len(DOCS)

    def test_reports_missing_components(self, bare_client):
        payload = bare_client.get("/health").json()
        assert payload["model_loaded"] is False
        assert payload["index_docs"] == 0


class TestReformulate:
    def test_candidates_capped_and_sorted(self, client, toy_setup):
        query = " ".join(toy_setup["queries"][0][:4])
        resp = client.post("/reformulate", json={"query": query, "k": 2})
        assert resp.status_code == 200
        candidates = resp.json()["candidates"]
        assert len(candidates) <= 2
        scores = [c["score"] for c in candidates]
        assert scores == sorted(scores, reverse=True)
        assert {"reformulated", "position", "span", "ig", "score"} <= set(candidates[0])

    def test_matches_in_process_expander(self, client, toy_setup):
        query = " ".join(toy_setup["queries"][1][:4])
        resp = client.post("/reformulate", json={"query": query})
        got = resp.json()["candidates"]
        expected = expand(tokenize(query), toy_setup["model"], ExpanderConfig(k=3, m=4))
        assert [c["reformulated"] for c in got] == [c.reformulated for c in expected]
        assert [c["ig"] for c in got] == pytest.approx([c.ig for c in expected])

    def test_empty_query_is_400(self, client):
        resp = client.post("/reformulate", json={"query": "  !? "})
        assert resp.status_code == 400
        assert "error" in resp.json()

    def test_invalid_strategy_is_400(self, client):
        resp = client.post("/reformulate", json={"query": "sort list", "strategy": "BOGUS"})
        assert resp.status_code == 400

    def test_rand_strategy_is_reproducible(self, client, toy_setup):
        query = " ".join(toy_setup["queries"][2][:4])
        body = {"query": query, "strategy": "RAND"}
        a = client.post("/reformulate", json=body).json()
        b = client.post("/reformulate", json=body).json()
        assert a == b

    def test_no_model_is_503(self, bare_client):
        resp = bare_client.post("/reformulate", json={"query": "sort list"})
        assert resp.status_code == 503
        assert "error" in resp.json()

    def test_missing_body_field_is_400(self, client):
        resp = client.post("/reformulate", json={})
        assert resp.status_code == 400
        assert "error" in resp.json()


class TestSearch:
    def test_scores_non_increasing_and_snippets_present(self, client):
        resp = client.post("/search", json={"query": "reverse array python"})
        assert resp.status_code == 200
        results = resp.json()["results"]
        scores = [r["score"] for r in results]
        assert scores == sorted(scores, reverse=True)
        assert results[0]["text_snippet"]

    def test_unknown_terms_give_empty_200(self, client):
        resp = client.post("/search", json={"query": "quaternion manifold"})
        assert resp.status_code == 200
        assert resp.json()["results"] == []

    def test_matches_direct_index_search(self, client):
        index = build_index(DOCS)
        resp = client.post("/search", json={"query": "reverse array", "top_n": 2})
        got = resp.json()["results"]
        expected = index.search("reverse array", top_n=2)
        assert [r["doc_id"] for r in got] == [r.doc_id for r in expected]
        assert [r["score"] for r in got] == pytest.approx([r.score for r in expected])

    def test_empty_query_is_400(self, client):
        resp = client.post("/search", json={"query": ""})
        assert resp.status_code == 400

    def test_bad_top_n_is_400(self, client):
        resp = client.post("/search", json={"query": "sort", "top_n": 0})
        assert resp.status_code == 400

    def test_no_index_is_503(self, bare_client):
        resp = bare_client.post("/search", json={"query": "sort"})
        assert resp.status_code == 503

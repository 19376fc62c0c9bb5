"""HTTP layer: endpoints, wire formats, error mapping."""

import pytest
from fastapi.testclient import TestClient

from smstriage.httpapi import create_app

from conftest import make_labeled_corpus

CATS = ["Symptoms", "Testing", "Treatment", "Prevention"]


@pytest.fixture
def client(sync_service):
    service = sync_service()
    return TestClient(create_app(service)), service


def create_collection(client, name="webtest", char_limit=140):
    response = client.post(
        "/collections", json={"name": name, "charLimit": char_limit}
    )
    assert response.status_code == 201
    return response.json()


def create_classifier(client, collection_id, **overrides):
    body = {
        "collectionId": collection_id,
        "categories": [{"name": c, "description": c + " questions"} for c in CATS],
        "retrainEvery": 10,
        "numTrees": 15,
        "k": 300,
        "seed": 4,
    }
    body.update(overrides)
    response = client.post("/classifiers", json=body)
    assert response.status_code == 201
    return response.json()


class TestCollections:
    def test_create_and_get(self, client):
        http, _ = client
        coll = create_collection(http)
        assert coll["status"] == "running"
        assert coll["charLimit"] == 140
        fetched = http.get(f"/collections/{coll['id']}").json()
        assert fetched == coll

    def test_duplicate_name_409(self, client):
        http, _ = client
        create_collection(http, "dup")
        response = http.post("/collections", json={"name": "dup"})
        assert response.status_code == 409
        assert response.json()["error"]["type"] == "ConflictError"

    def test_pause_resume(self, client):
        http, _ = client
        coll = create_collection(http)
        assert (
            http.post(f"/collections/{coll['id']}/pause").json()["status"]
            == "paused"
        )
        push = http.post(
            f"/push/{coll['endpointPath']}", json={"text": "hello"}
        )
        assert push.status_code == 409
        assert (
            http.post(f"/collections/{coll['id']}/resume").json()["status"]
            == "running"
        )

    def test_unknown_collection_404(self, client):
        http, _ = client
        assert http.get("/collections/c999999").status_code == 404


class TestPush:
    def test_push_returns_message_id(self, client):
        http, _ = client
        coll = create_collection(http)
        response = http.post(
            f"/push/{coll['endpointPath']}",
            json={"text": "Where does HIV come frm?", "senderRef": "u1"},
        )
        assert response.status_code == 200
        assert response.json()["messageId"].startswith("m")
        counters = http.get(f"/collections/{coll['id']}").json()["counters"]
        assert counters["received"] == 1

    def test_unknown_endpoint_404(self, client):
        http, _ = client
        assert (
            http.post("/push/nonexistent", json={"text": "x"}).status_code == 404
        )

    def test_empty_text_422(self, client):
        http, _ = client
        coll = create_collection(http)
        response = http.post(f"/push/{coll['endpointPath']}", json={"text": "  "})
        assert response.status_code == 422

    def test_too_long_422(self, client):
        http, _ = client
        coll = create_collection(http)
        response = http.post(
            f"/push/{coll['endpointPath']}", json={"text": "x" * 141}
        )
        assert response.status_code == 422
        counters = http.get(f"/collections/{coll['id']}").json()["counters"]
        assert counters["received"] == 0


class TestLabelingFlow:
    def _seed_messages(self, http, coll, n=30):
        corpus = make_labeled_corpus(n, CATS, seed=12)
        truth = {}
        for text, cat in corpus:
            http.post(f"/push/{coll['endpointPath']}", json={"text": text})
            truth[text] = cat
        return truth

    def test_full_round_trip(self, client):
        http, _ = client
        coll = create_collection(http)
        schema = create_classifier(http, coll["id"])
        truth = self._seed_messages(http, coll)

        resolved = 0
        while resolved < 10:
            for labeler in ("expert1", "expert2"):
                task = http.get(
                    "/tasks/next",
                    params={"labeler": labeler, "schema": schema["id"]},
                ).json()["task"]
                assert task is not None
                assert len(task["categories"]) == 4
                assert task["categories"][0]["description"]
                vote = http.post(
                    f"/tasks/{task['taskId']}/vote",
                    json={"labeler": labeler, "category": truth[task["text"]]},
                ).json()
                if vote["status"] == "resolved":
                    resolved += 1

        metrics = http.get(f"/classifiers/{schema['id']}/metrics").json()
        assert metrics["version"] == 1
        assert metrics["labeledTotal"] >= 10
        assert 0 <= metrics["macroAuc"] <= 1

        vocab = http.get(f"/classifiers/{schema['id']}/vocabulary")
        assert vocab.status_code == 200
        lines = vocab.text.splitlines()
        assert lines[0] == "feature,arity,ig_bits"
        assert len(lines) > 1

    def test_vocabulary_before_model_404(self, client):
        http, _ = client
        coll = create_collection(http)
        schema = create_classifier(http, coll["id"])
        assert http.get(f"/classifiers/{schema['id']}/vocabulary").status_code == 404

    def test_next_task_without_schema_param(self, client):
        http, _ = client
        coll = create_collection(http)
        schema = create_classifier(http, coll["id"])
        self._seed_messages(http, coll, 3)
        response = http.get("/tasks/next", params={"labeler": "e1"})
        assert response.status_code == 200
        task = response.json()["task"]
        assert task is not None
        assert task["schemaId"] == schema["id"]

    def test_next_task_none_available(self, client):
        http, _ = client
        coll = create_collection(http)
        schema = create_classifier(http, coll["id"])
        response = http.get(
            "/tasks/next", params={"labeler": "e1", "schema": schema["id"]}
        )
        assert response.status_code == 200
        assert response.json()["task"] is None

    def test_duplicate_vote_409(self, client):
        http, _ = client
        coll = create_collection(http)
        schema = create_classifier(http, coll["id"])
        self._seed_messages(http, coll, 5)
        task = http.get(
            "/tasks/next", params={"labeler": "e1", "schema": schema["id"]}
        ).json()["task"]
        vote = {"labeler": "e1", "category": CATS[0]}
        assert http.post(f"/tasks/{task['taskId']}/vote", json=vote).status_code == 200
        assert http.post(f"/tasks/{task['taskId']}/vote", json=vote).status_code == 409

    def test_labels_listing_and_delete(self, client):
        http, service = client
        coll = create_collection(http)
        schema = create_classifier(http, coll["id"], retrainEvery=50)
        truth = self._seed_messages(http, coll, 10)
        from conftest import drive_labels

        drive_labels(service, schema["id"], truth, limit=4)
        listing = http.get(
            "/labels", params={"schema": schema["id"], "page": 1}
        ).json()
        assert listing["total"] == 4
        assert len(listing["items"]) == 4
        row = listing["items"][0]
        assert set(row) == {"messageId", "text", "category", "labelerCount", "resolvedAt"}

        deleted = http.delete(
            f"/labels/{row['messageId']}", params={"schema": schema["id"]}
        )
        assert deleted.status_code == 200
        listing = http.get(
            "/labels", params={"schema": schema["id"], "page": 1}
        ).json()
        assert listing["total"] == 3

    def test_delete_unknown_label_404(self, client):
        http, _ = client
        coll = create_collection(http)
        schema = create_classifier(http, coll["id"])
        response = http.delete(
            "/labels/m99999999", params={"schema": schema["id"]}
        )
        assert response.status_code == 404


class TestExportAndStats:
    def test_csv_export_and_stats(self, client):
        http, service = client
        coll = create_collection(http)
        schema = create_classifier(http, coll["id"])
        truth = TestLabelingFlow()._seed_messages(http, coll, 30)
        from conftest import drive_labels

        drive_labels(service, schema["id"], truth, limit=10)
        total_rows = 0
        for category in CATS:
            response = http.get(
                f"/export/{coll['id']}/{schema['id']}/{category}",
                params={"format": "csv"},
            )
            assert response.status_code == 200
            lines = response.text.splitlines()
            assert lines[0] == "message_id,text,category,confidence,model_version,received_at"
            total_rows += len(lines) - 1
        assert total_rows == 30

        stats = http.get(f"/stats/{coll['id']}/{schema['id']}").json()
        assert stats["classifiedTotal"] == 30
        assert sum(stats["proportions"].values()) == pytest.approx(1.0, abs=1e-9)

    def test_unknown_category_422(self, client):
        http, _ = client
        coll = create_collection(http)
        schema = create_classifier(http, coll["id"])
        response = http.get(f"/export/{coll['id']}/{schema['id']}/Bogus")
        assert response.status_code == 422

"""Collection lifecycle and the ingest contract."""

import pytest

from smstriage.errors import ConflictError, NotFoundError, ValidationError


class TestCreateCollection:
    def test_defaults(self, sync_service):
        service = sync_service()
        coll = service.create_collection("zambia-health", 140)
        assert coll.status == "running"
        assert coll.char_limit == 140
        assert len(coll.endpoint_path) >= 16
        assert coll.received == coll.classified == coll.labeled == 0

    def test_char_limit_boundary(self, sync_service):
        service = sync_service()
        coll = service.create_collection("tiny", 1)
        service.ingest(coll.endpoint_path, "x")
        with pytest.raises(ValidationError):
            service.ingest(coll.endpoint_path, "xy")

    def test_duplicate_name_conflict(self, sync_service):
        service = sync_service()
        service.create_collection("zambia-health", 140)
        with pytest.raises(ConflictError):
            service.create_collection("zambia-health", 140)

    def test_invalid_char_limit(self, sync_service):
        service = sync_service()
        with pytest.raises(ValidationError):
            service.create_collection("bad", 0)

    def test_endpoint_paths_unique(self, sync_service):
        service = sync_service()
        paths = {
            service.create_collection("coll-%d" % i).endpoint_path
            for i in range(20)
        }
        assert len(paths) == 20


class TestIngest:
    def test_ack_without_any_model(self, sync_service):
        service = sync_service()
        coll = service.create_collection("c", 140)
        message = service.ingest(
            coll.endpoint_path,
            "Where does HIV come frm? Does HIV act like other diseases",
        )
        assert message.id
        assert service.get_collection(coll.id).received == 1

    def test_n_ingests_n_distinct_ids(self, sync_service):
        service = sync_service()
        coll = service.create_collection("c", 140)
        ids = {
            service.ingest(coll.endpoint_path, "msg %d" % i).id for i in range(25)
        }
        assert len(ids) == 25
        assert service.get_collection(coll.id).received == 25

    def test_replay_same_payload_stores_two(self, sync_service):
        service = sync_service()
        coll = service.create_collection("c", 140)
        first = service.ingest(coll.endpoint_path, "same text", "sender1")
        second = service.ingest(coll.endpoint_path, "same text", "sender1")
        assert first.id != second.id
        assert service.get_collection(coll.id).received == 2

    def test_empty_text_rejected_counters_unchanged(self, sync_service):
        service = sync_service()
        coll = service.create_collection("c", 140)
        with pytest.raises(ValidationError):
            service.ingest(coll.endpoint_path, "")
        with pytest.raises(ValidationError):
            service.ingest(coll.endpoint_path, "   ")
        assert service.get_collection(coll.id).received == 0

    def test_over_limit_rejected(self, sync_service):
        service = sync_service()
        coll = service.create_collection("c", 140)
        with pytest.raises(ValidationError):
            service.ingest(coll.endpoint_path, "x" * 141)
        assert service.get_collection(coll.id).received == 0
        assert len(service.gateway.messages) == 0

    def test_unknown_endpoint(self, sync_service):
        service = sync_service()
        with pytest.raises(NotFoundError):
            service.ingest("nope", "hello")

    def test_source_meta_stored_verbatim(self, sync_service):
        service = sync_service()
        coll = service.create_collection("c", 140)
        meta = {"carrier": "mtn", "shortcode": "878"}
        message = service.ingest(coll.endpoint_path, "hi", "s1", meta)
        assert service.gateway.messages[message.id].source_meta == meta

    def test_received_at_assigned_once(self, sync_service):
        service = sync_service()
        coll = service.create_collection("c", 140)
        message = service.ingest(coll.endpoint_path, "hello")
        assert service.gateway.messages[message.id].received_at == message.received_at


class TestPauseResume:
    def test_pause_rejects_ingest(self, sync_service):
        service = sync_service()
        coll = service.create_collection("c", 140)
        service.pause_collection(coll.id)
        with pytest.raises(ConflictError):
            service.ingest(coll.endpoint_path, "hello")

    def test_resume_accepts_again(self, sync_service):
        service = sync_service()
        coll = service.create_collection("c", 140)
        service.pause_collection(coll.id)
        service.resume_collection(coll.id)
        assert service.ingest(coll.endpoint_path, "hello").id

    def test_pause_idempotent(self, sync_service):
        service = sync_service()
        coll = service.create_collection("c", 140)
        service.pause_collection(coll.id)
        assert service.pause_collection(coll.id).status == "paused"

    def test_unknown_collection(self, sync_service):
        service = sync_service()
        with pytest.raises(NotFoundError):
            service.pause_collection("c999999")

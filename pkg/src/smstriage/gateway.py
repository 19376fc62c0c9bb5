"""Push gateway: collections and message intake.

Every collection gets an unguessable endpoint path; pushes to it are
validated, enriched with a fresh id and an ingest timestamp, persisted,
and only then handed to the classification pipeline. The gateway never
deduplicates — replaying the same payload stores two messages — because
duplicate suppression is a labeling concern downstream.
"""

import random
import threading
from dataclasses import dataclass, field

from .clock import from_rfc3339, to_rfc3339
from .errors import ConflictError, NotFoundError, ValidationError
from .store import Store

_PATH_ALPHABET = "abcdefghijklmnopqrstuvwxyz0123456789"
_PATH_LENGTH = 22

DEFAULT_CHAR_LIMIT = 140


@dataclass
class Collection:
    id: str
    name: str
    endpoint_path: str
    created_at: float
    status: str = "running"  # running | paused
    char_limit: int = DEFAULT_CHAR_LIMIT
    received: int = 0
    classified: int = 0
    labeled: int = 0

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "endpointPath": self.endpoint_path,
            "createdAt": to_rfc3339(self.created_at),
            "status": self.status,
            "charLimit": self.char_limit,
            "counters": {
                "received": self.received,
                "classified": self.classified,
                "labeled": self.labeled,
            },
        }


@dataclass(frozen=True)
class ShortMessage:
    id: str
    collection_id: str
    text: str
    sender_ref: str
    received_at: float
    source_meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "collectionId": self.collection_id,
            "text": self.text,
            "senderRef": self.sender_ref,
            "receivedAt": to_rfc3339(self.received_at),
            "sourceMeta": dict(self.source_meta),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ShortMessage":
        return cls(
            id=data["id"],
            collection_id=data["collectionId"],
            text=data["text"],
            sender_ref=data["senderRef"],
            received_at=from_rfc3339(data["receivedAt"]),
            source_meta=data.get("sourceMeta", {}),
        )


class Gateway:
    """Collection registry plus the validated intake path."""

    def __init__(self, store: Store, clock, rng: random.Random,
                 default_char_limit: int = DEFAULT_CHAR_LIMIT):
        self._store = store
        self._clock = clock
        self._rng = rng
        self._default_char_limit = default_char_limit
        self._lock = threading.RLock()
        self.collections: dict[str, Collection] = {}
        self.messages: dict[str, ShortMessage] = {}
        self.messages_by_collection: dict[str, list[str]] = {}
        self._by_path: dict[str, str] = {}
        self._by_name: dict[str, str] = {}
        self._collection_seq = 0
        self._message_seq = 0

    # -- collections ------------------------------------------------------

    def create_collection(self, name: str, char_limit: int | None = None) -> Collection:
        if not name or not name.strip():
            raise ValidationError("collection name must be non-empty")
        limit = self._default_char_limit if char_limit is None else char_limit
        if limit < 1:
            raise ValidationError("charLimit must be >= 1")
        with self._lock:
            if name in self._by_name:
                raise ConflictError(f"collection name already in use: {name}")
            self._collection_seq += 1
            cid = "c%06d" % self._collection_seq
            path = "".join(
                self._rng.choice(_PATH_ALPHABET) for _ in range(_PATH_LENGTH)
            )
            while path in self._by_path:
                path = "".join(
                    self._rng.choice(_PATH_ALPHABET) for _ in range(_PATH_LENGTH)
                )
            coll = Collection(
                id=cid,
                name=name,
                endpoint_path=path,
                created_at=self._clock.now(),
                char_limit=limit,
            )
            self._store.append(
                "collections",
                {
                    "event": "created",
                    "id": cid,
                    "name": name,
                    "endpointPath": path,
                    "charLimit": limit,
                    "createdAt": to_rfc3339(coll.created_at),
                },
            )
            self._register(coll)
            return coll

    def _register(self, coll: Collection) -> None:
        self.collections[coll.id] = coll
        self._by_path[coll.endpoint_path] = coll.id
        self._by_name[coll.name] = coll.id
        self.messages_by_collection.setdefault(coll.id, [])

    def get_collection(self, collection_id: str) -> Collection:
        coll = self.collections.get(collection_id)
        if coll is None:
            raise NotFoundError(f"no such collection: {collection_id}")
        return coll

    def _set_status(self, collection_id: str, status: str) -> Collection:
        with self._lock:
            coll = self.get_collection(collection_id)
            if coll.status != status:
                coll.status = status
                self._store.append(
                    "collections", {"event": status, "id": collection_id}
                )
            return coll

    def pause_collection(self, collection_id: str) -> Collection:
        return self._set_status(collection_id, "paused")

    def resume_collection(self, collection_id: str) -> Collection:
        return self._set_status(collection_id, "running")

    # -- intake -----------------------------------------------------------

    def ingest(
        self,
        endpoint_path: str,
        text: str,
        sender_ref: str = "",
        source_meta: dict | None = None,
    ) -> ShortMessage:
        collection_id = self._by_path.get(endpoint_path)
        if collection_id is None:
            raise NotFoundError(f"no collection at endpoint: {endpoint_path}")
        coll = self.collections[collection_id]
        if coll.status != "running":
            raise ConflictError(f"collection {collection_id} is paused")
        if not isinstance(text, str) or not text.strip():
            raise ValidationError("message text must be non-empty")
        if len(text) > coll.char_limit:
            raise ValidationError(
                "message text exceeds the %d-character limit" % coll.char_limit
            )
        with self._lock:
            self._message_seq += 1
            message = ShortMessage(
                id="m%08d" % self._message_seq,
                collection_id=collection_id,
                text=text,
                sender_ref=sender_ref or "",
                received_at=self._clock.now(),
                source_meta=dict(source_meta or {}),
            )
            self._store.append("messages", message.to_dict())
            self.messages[message.id] = message
            self.messages_by_collection[collection_id].append(message.id)
            coll.received += 1
        return message

    # -- restart ----------------------------------------------------------

    def load(self) -> None:
        """Rebuild collections and messages by replaying the logs."""
        for event in self._store.replay("collections"):
            if event["event"] == "created":
                coll = Collection(
                    id=event["id"],
                    name=event["name"],
                    endpoint_path=event["endpointPath"],
                    created_at=from_rfc3339(event["createdAt"]),
                    char_limit=event["charLimit"],
                )
                self._register(coll)
                seq = int(event["id"][1:])
                self._collection_seq = max(self._collection_seq, seq)
            elif event["event"] in ("paused", "running"):
                self.collections[event["id"]].status = (
                    "paused" if event["event"] == "paused" else "running"
                )
        for record in self._store.replay("messages"):
            message = ShortMessage.from_dict(record)
            self.messages[message.id] = message
            self.messages_by_collection[message.collection_id].append(message.id)
            self.collections[message.collection_id].received += 1
            self._message_seq = max(self._message_seq, int(message.id[1:]))

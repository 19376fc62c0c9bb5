"""Service wiring: gateway -> pipeline -> labeling -> retraining -> export.

Two execution modes share all the logic:

* ``live`` — ingest acknowledges after durable persistence and hands the
  message to a classification worker thread; trainings run on a separate
  trainer thread; model publication is an atomic reference swap. An
  admission window bounds in-flight messages so the classify queue (and
  with it ingest-to-classified latency) stays small under burst load.
* ``sync`` — everything runs inline on the caller's thread with a logical
  clock, so a replayed corpus with fixed seeds reproduces identical ids,
  timestamps, models and export files byte for byte.
"""

import logging
import queue
import random
import threading
import time

from .clock import LogicalClock, SystemClock, to_rfc3339
from .config import ServiceConfig
from .errors import CannotTrainError, NotFoundError, ValidationError
from .features import dense_matrix, vectorize
from .gateway import Gateway, ShortMessage
from .labeling import LabelingEngine, LabelTask
from .learning import (
    Classification,
    ClassifierSchema,
    classify_scores,
    load_model,
    save_model,
    train_model,
)
from .store import Store, export_csv_lines, export_jsonl_lines, rank_export_rows

log = logging.getLogger(__name__)

_SHUTDOWN = object()


class TriageService:
    def __init__(self, config: ServiceConfig | None = None):
        self.config = config or ServiceConfig()
        self.clock = SystemClock() if self.config.mode == "live" else LogicalClock()
        seed = self.config.seed
        self._rng = random.Random(seed) if seed is not None else random.Random()
        self.store = Store(self.config.data_dir, fsync=self.config.fsync)
        self.gateway = Gateway(
            self.store, self.clock, self._rng, self.config.default_char_limit
        )
        self.engine = LabelingEngine(
            self.store,
            self.clock,
            lease_seconds=self.config.lease_seconds,
            selection=self.config.selection,
            selection_seed=(seed or 0) + 1,
        )
        self.schemas: dict[str, ClassifierSchema] = {}
        self.schemas_by_collection: dict[str, list[str]] = {}
        self.models: dict[str, object] = {}  # schema id -> TrainedModel
        self.model_versions: dict[str, int] = {}
        self.last_train_seq: dict[str, int] = {}
        self.classifications: dict[str, dict[str, Classification]] = {}
        self._messages_classified: set[str] = set()
        self._label_refs: dict[str, int] = {}  # message id -> active labels
        self._schema_seq = 0
        self._class_lock = threading.RLock()
        self._train_lock = threading.Lock()

        self._running = True
        self._inflight = threading.Semaphore(self.config.max_inflight)
        self._work_queue: queue.Queue = queue.Queue()
        self._train_queue: queue.Queue = queue.Queue()
        self._worker: threading.Thread | None = None
        self._trainer: threading.Thread | None = None
        self._worker_busy = False
        self._trainer_busy = False
        if self.config.mode == "live":
            self._worker = threading.Thread(
                target=self._worker_loop, name="classify-worker", daemon=True
            )
            self._trainer = threading.Thread(
                target=self._trainer_loop, name="trainer", daemon=True
            )
            self._worker.start()
            self._trainer.start()

    # -- lifecycle ----------------------------------------------------------

    @classmethod
    def open(cls, config: ServiceConfig) -> "TriageService":
        """Start a service over an existing data directory, replaying logs."""
        service = cls(config)
        service.gateway.load()
        for record in service.store.replay("schemas"):
            schema = ClassifierSchema.from_dict(record)
            service._register_schema(schema)
        service.engine.load()
        for event in service.store.replay("trainings"):
            sid = event["schemaId"]
            service.model_versions[sid] = event["version"]
            service.last_train_seq[sid] = event["lastTrainSeq"]
        for sid, version in service.model_versions.items():
            if version > 0:
                path = service.store.model_dir(sid) / ("model-v%d.json" % version)
                service.models[sid] = load_model(path)
        for record in service.store.replay("classifications"):
            c = Classification(
                message_id=record["messageId"],
                model_version=record["modelVersion"],
                category=record["category"],
                confidence=record["confidence"],
                per_category_scores=record["scores"],
                classified_at=record["classifiedAt"],
            )
            service.classifications[record["schemaId"]][c.message_id] = c
            service._messages_classified.add(c.message_id)
        for (_, mid), label in service.engine.labels.items():
            if not label.deleted:
                service._label_refs[mid] = service._label_refs.get(mid, 0) + 1
        for coll in service.gateway.collections.values():
            members = service.gateway.messages_by_collection[coll.id]
            coll.classified = sum(
                1 for mid in members if mid in service._messages_classified
            )
            coll.labeled = sum(
                1 for mid in members if service._label_refs.get(mid, 0) > 0
            )
        for sid, model in service.models.items():
            service._apply_model_side_effects(service.schemas[sid], model)
        return service

    def close(self) -> None:
        self._running = False
        if self._worker is not None:
            self._work_queue.put(_SHUTDOWN)
            self._worker.join(timeout=10)
        if self._trainer is not None:
            self._train_queue.put(_SHUTDOWN)
            self._trainer.join(timeout=60)
        self.store.close()

    def drain(self, timeout: float = 60.0) -> None:
        """Block until queued work (classification, training) has settled."""
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            if (
                self._work_queue.empty()
                and self._train_queue.empty()
                and not self._worker_busy
                and not self._trainer_busy
            ):
                return
            time.sleep(0.005)
        raise TimeoutError("service did not drain in time")

    # -- collections and classifiers -----------------------------------------

    def create_collection(self, name: str, char_limit: int | None = None):
        return self.gateway.create_collection(name, char_limit)

    def get_collection(self, collection_id: str):
        return self.gateway.get_collection(collection_id)

    def pause_collection(self, collection_id: str):
        return self.gateway.pause_collection(collection_id)

    def resume_collection(self, collection_id: str):
        return self.gateway.resume_collection(collection_id)

    def create_classifier(
        self,
        collection_id: str,
        categories: list[tuple[str, str]],
        *,
        k: int = 800,
        retrain_every: int = 50,
        active_threshold: float = 0.60,
        holdout_fraction: float = 0.20,
        num_trees: int = 100,
        seed: int | None = None,
    ) -> ClassifierSchema:
        self.gateway.get_collection(collection_id)
        self._schema_seq += 1
        schema = ClassifierSchema(
            id="s%04d" % self._schema_seq,
            collection_id=collection_id,
            categories=tuple((n, d) for n, d in categories),
            k=k,
            retrain_every=retrain_every,
            active_threshold=active_threshold,
            holdout_fraction=holdout_fraction,
            num_trees=num_trees,
            seed=seed if seed is not None else self._rng.getrandbits(32),
            created_at=self.clock.now(),
        )
        self.store.append("schemas", schema.to_dict())
        self._register_schema(schema)
        return schema

    def _register_schema(self, schema: ClassifierSchema) -> None:
        self.schemas[schema.id] = schema
        self.schemas_by_collection.setdefault(schema.collection_id, []).append(
            schema.id
        )
        self.classifications.setdefault(schema.id, {})
        self.model_versions.setdefault(schema.id, 0)
        self.last_train_seq.setdefault(schema.id, 0)
        self.engine.register_schema(schema.id)
        self._schema_seq = max(self._schema_seq, int(schema.id[1:]))

    def get_schema(self, schema_id: str) -> ClassifierSchema:
        schema = self.schemas.get(schema_id)
        if schema is None:
            raise NotFoundError(f"no such classifier: {schema_id}")
        return schema

    # -- ingest and the classify pipeline -------------------------------------

    def ingest(
        self,
        endpoint_path: str,
        text: str,
        sender_ref: str = "",
        source_meta: dict | None = None,
    ) -> ShortMessage:
        if self.config.mode == "sync":
            message = self.gateway.ingest(endpoint_path, text, sender_ref, source_meta)
            try:
                self._process_batch([message])
            except Exception:
                # classification problems never surface to the pusher;
                # the message is persisted and acknowledged regardless
                log.exception("inline classification failed for %s", message.id)
            return message
        self._inflight.acquire()
        try:
            message = self.gateway.ingest(endpoint_path, text, sender_ref, source_meta)
        except Exception:
            self._inflight.release()
            raise
        self._work_queue.put(message)
        return message

    def _worker_loop(self) -> None:
        while True:
            item = self._work_queue.get()
            if item is _SHUTDOWN:
                return
            self._worker_busy = True
            batch = [item]
            while len(batch) < self.config.batch_size:
                try:
                    extra = self._work_queue.get_nowait()
                except queue.Empty:
                    break
                if extra is _SHUTDOWN:
                    self._work_queue.put(_SHUTDOWN)
                    break
                batch.append(extra)
            try:
                self._process_batch(batch)
            except Exception:
                log.exception("classification batch failed")
            finally:
                for _ in batch:
                    self._inflight.release()
                self._worker_busy = False

    def _process_batch(self, batch: list[ShortMessage]) -> None:
        by_collection: dict[str, list[ShortMessage]] = {}
        for message in batch:
            by_collection.setdefault(message.collection_id, []).append(message)
        for collection_id, messages in by_collection.items():
            for schema_id in self.schemas_by_collection.get(collection_id, []):
                self._classify_and_enqueue(self.schemas[schema_id], messages)

    def _classify_and_enqueue(
        self, schema: ClassifierSchema, messages: list[ShortMessage]
    ) -> None:
        model = self.models.get(schema.id)
        confidences: list[float | None] = [None] * len(messages)
        if model is not None:
            scores = self._score_texts(model, [m.text for m in messages])
            for i, message in enumerate(messages):
                category, confidence, per = classify_scores(
                    scores[i], model.categories
                )
                self._record_classification(
                    schema.id,
                    message,
                    Classification(
                        message_id=message.id,
                        model_version=model.version,
                        category=category,
                        confidence=confidence,
                        per_category_scores=per,
                        classified_at=self.clock.now(),
                    ),
                )
                confidences[i] = confidence
        for message, confidence in zip(messages, confidences):
            self.engine.enqueue_candidate(message, schema, confidence)

    def _score_texts(self, model, texts: list[str]):
        vectors = [vectorize(text, model.vocabulary) for text in texts]
        return model.forest.predict_batch(
            dense_matrix(vectors, len(model.vocabulary))
        )

    def _record_classification(
        self, schema_id: str, message: ShortMessage, classification: Classification
    ) -> bool:
        """Store a classification unless the message already has one for
        this schema (first one wins; later models never overwrite)."""
        with self._class_lock:
            per_schema = self.classifications[schema_id]
            if classification.message_id in per_schema:
                return False
            self.store.append(
                "classifications",
                {
                    "schemaId": schema_id,
                    "messageId": classification.message_id,
                    "modelVersion": classification.model_version,
                    "category": classification.category,
                    "confidence": classification.confidence,
                    "scores": classification.per_category_scores,
                    "classifiedAt": classification.classified_at,
                },
            )
            per_schema[classification.message_id] = classification
            if classification.message_id not in self._messages_classified:
                self._messages_classified.add(classification.message_id)
                self.gateway.collections[message.collection_id].classified += 1
            return True

    # -- labeling --------------------------------------------------------------

    def next_task(self, labeler_id: str, schema_id: str | None = None) -> dict | None:
        """Lease the best open task; across every classifier when no
        schema is given."""
        if schema_id is not None:
            self.get_schema(schema_id)
            task = self.engine.next_task(labeler_id, schema_id)
        else:
            task = self.engine.next_task_across(
                labeler_id, list(self.schemas.keys())
            )
        if task is None:
            return None
        return self._task_view(task, self.get_schema(task.schema_id))

    def _task_view(self, task: LabelTask, schema: ClassifierSchema) -> dict:
        message = self.gateway.messages[task.message_id]
        return {
            "taskId": task.id,
            "messageId": task.message_id,
            "schemaId": schema.id,
            "text": message.text,
            "priority": task.priority,
            "leaseExpiresAt": to_rfc3339(task.lease_expires),
            "categories": [
                {"name": n, "description": d} for n, d in schema.categories
            ],
        }

    def submit_vote(self, task_id: str, labeler_id: str, category: str) -> dict:
        task = self.engine.tasks.get(task_id)
        if task is None:
            raise NotFoundError(f"no such task: {task_id}")
        schema = self.get_schema(task.schema_id)
        task = self.engine.submit_vote(task_id, labeler_id, category, schema)
        result = {
            "taskId": task.id,
            "status": task.status,
            "resolvedCategory": task.resolved_category,
        }
        if task.status == "resolved":
            self._track_label(schema.collection_id, task.message_id, +1)
            if self.config.mode == "sync":
                result["retrain"] = self.maybe_retrain(schema.id)
            else:
                self._train_queue.put(schema.id)
        return result

    def _track_label(self, collection_id: str, message_id: str, delta: int) -> None:
        """Keep counters.labeled = distinct messages with an active label."""
        with self._class_lock:
            before = self._label_refs.get(message_id, 0)
            after = before + delta
            self._label_refs[message_id] = after
            collection = self.gateway.get_collection(collection_id)
            if before == 0 and after > 0:
                collection.labeled += 1
            elif before > 0 and after == 0:
                collection.labeled -= 1

    def delete_label(self, message_id: str, schema_id: str) -> dict:
        schema = self.get_schema(schema_id)
        _, changed = self.engine.delete_label(message_id, schema_id)
        if changed:
            self._track_label(schema.collection_id, message_id, -1)
        return {"messageId": message_id, "schemaId": schema_id, "deleted": True}

    def list_labeled(self, schema_id: str, page: int, page_size: int = 50) -> dict:
        schema = self.get_schema(schema_id)
        labels = self.engine.list_labeled(schema_id, page, page_size)
        total = len(self.engine.active_labels(schema_id))
        items = []
        for label in labels:
            task = self.engine.task_for_message(schema_id, label.message_id)
            items.append(
                {
                    "messageId": label.message_id,
                    "text": self.gateway.messages[label.message_id].text,
                    "category": label.category,
                    "labelerCount": len(task.votes) if task else 0,
                    "resolvedAt": to_rfc3339(label.resolved_at),
                }
            )
        return {"page": page, "pageSize": page_size, "total": total, "items": items}

    # -- training ----------------------------------------------------------------

    def _trainer_loop(self) -> None:
        while True:
            item = self._train_queue.get()
            if item is _SHUTDOWN:
                return
            self._trainer_busy = True
            try:
                self.maybe_retrain(item)
            except Exception:
                log.exception("training failed for %s", item)
            finally:
                self._trainer_busy = False

    def maybe_retrain(self, schema_id: str) -> dict:
        """Retrain when enough fresh labels accumulated; atomic publish."""
        with self._train_lock:
            schema = self.get_schema(schema_id)
            pending = self.engine.pending_count(
                schema_id, self.last_train_seq[schema_id]
            )
            if pending < schema.retrain_every:
                return {"retrained": False, "pending": pending}
            labels = self.engine.active_labels(schema_id)
            triples = [
                (lab.message_id, self.gateway.messages[lab.message_id].text, lab.category)
                for lab in labels
            ]
            version = self.model_versions[schema_id] + 1
            try:
                model = train_model(schema, triples, version, self.clock.now())
            except CannotTrainError as exc:
                log.warning("retrain skipped for %s: %s", schema_id, exc)
                return {"retrained": False, "pending": pending, "warning": str(exc)}
            save_model(model, self.store.model_dir(schema_id))
            max_seq = max(lab.seq for lab in labels)
            self.store.append(
                "trainings",
                {
                    "schemaId": schema_id,
                    "version": version,
                    "lastTrainSeq": max_seq,
                    "trainSize": model.train_size,
                    "holdoutSize": model.holdout_size,
                    "macroAuc": model.metrics.macro,
                    "trainedAt": to_rfc3339(model.trained_at),
                },
            )
            self.model_versions[schema_id] = version
            self.models[schema_id] = model  # atomic publish
            self.last_train_seq[schema_id] = max_seq
            self._apply_model_side_effects(schema, model)
            return {"retrained": True, "newVersion": version}

    def _apply_model_side_effects(self, schema: ClassifierSchema, model) -> None:
        """Classify the never-classified backlog (oldest first) and refresh
        open-task priorities against the newly published model."""
        backlog = [
            self.gateway.messages[mid]
            for mid in self.gateway.messages_by_collection.get(schema.collection_id, [])
            if mid not in self.classifications[schema.id]
        ]
        backlog.sort(key=lambda m: (m.received_at, m.id))
        for start in range(0, len(backlog), 512):
            chunk = backlog[start : start + 512]
            scores = self._score_texts(model, [m.text for m in chunk])
            for i, message in enumerate(chunk):
                category, confidence, per = classify_scores(scores[i], model.categories)
                self._record_classification(
                    schema.id,
                    message,
                    Classification(
                        message_id=message.id,
                        model_version=model.version,
                        category=category,
                        confidence=confidence,
                        per_category_scores=per,
                        classified_at=self.clock.now(),
                    ),
                )

        open_ids = [
            task.message_id
            for task in self.engine.tasks.values()
            if task.schema_id == schema.id and task.status == "open"
        ]
        conf_map: dict[str, float] = {}
        for start in range(0, len(open_ids), 512):
            chunk = open_ids[start : start + 512]
            scores = self._score_texts(
                model, [self.gateway.messages[mid].text for mid in chunk]
            )
            for i, mid in enumerate(chunk):
                conf_map[mid] = float(scores[i].max())
        self.engine.reprioritize(
            schema.id, lambda mid: conf_map.get(mid), schema.active_threshold
        )

    # -- metrics, exports, stats ---------------------------------------------------

    def classifier_metrics(self, schema_id: str) -> dict:
        schema = self.get_schema(schema_id)
        model = self.models.get(schema_id)
        labeled_total = len(self.engine.active_labels(schema_id))
        data = {
            "schemaId": schema_id,
            "collectionId": schema.collection_id,
            "version": model.version if model else None,
            "macroAuc": model.metrics.macro if model else None,
            "perCategoryAuc": dict(model.metrics.per_category) if model else {},
            "trainSize": model.train_size if model else 0,
            "holdoutSize": model.holdout_size if model else 0,
            "labeledTotal": labeled_total,
            "pendingLabels": self.engine.pending_count(
                schema_id, self.last_train_seq[schema_id]
            ),
            "retrainEvery": schema.retrain_every,
            "classifiedTotal": len(self.classifications[schema_id]),
            "openTasks": self.engine.open_count(schema_id),
        }
        return data

    def _deleted_message_ids(self, schema_id: str) -> set[str]:
        return {
            mid
            for (sid, mid), label in self.engine.labels.items()
            if sid == schema_id and label.deleted
        }

    def export_category(
        self, collection_id: str, schema_id: str, category: str, fmt: str = "csv"
    ):
        """Ranked export of one category as an iterator of text lines."""
        self.gateway.get_collection(collection_id)
        schema = self.get_schema(schema_id)
        if schema.collection_id != collection_id:
            raise ValidationError("classifier does not belong to this collection")
        if category not in schema.category_names:
            raise ValidationError(f"unknown category: {category}")
        if fmt not in ("csv", "jsonl"):
            raise ValidationError("format must be csv or jsonl")
        deleted = self._deleted_message_ids(schema_id)
        rows = []
        with self._class_lock:
            classifications = list(self.classifications[schema_id].values())
        for c in classifications:
            if c.category != category or c.message_id in deleted:
                continue
            message = self.gateway.messages[c.message_id]
            rows.append(
                {
                    "message_id": c.message_id,
                    "text": message.text,
                    "category": c.category,
                    "confidence": c.confidence,
                    "model_version": c.model_version,
                    "received_at": message.received_at,
                }
            )
        ranked = rank_export_rows(rows)
        if fmt == "csv":
            return export_csv_lines(iter(ranked))
        return export_jsonl_lines(iter(ranked))

    def category_proportions(self, collection_id: str, schema_id: str) -> dict[str, float]:
        """Fractions of classified messages per category, descending."""
        self.gateway.get_collection(collection_id)
        self.get_schema(schema_id)
        deleted = self._deleted_message_ids(schema_id)
        counts: dict[str, int] = {}
        with self._class_lock:
            for c in self.classifications[schema_id].values():
                if c.message_id in deleted:
                    continue
                counts[c.category] = counts.get(c.category, 0) + 1
        total = sum(counts.values())
        if total == 0:
            return {}
        ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        return {category: count / total for category, count in ordered}

"""Labeling engine: dedup, task queue, 2-of-3 votes, label lifecycle.

Tasks are created only for novel message text (exact match after
normalization, per schema); once any text has produced a task — open,
resolved or discarded — later copies are skipped. Open tasks are served
lowest priority first: confidence for uncertain messages (at or below the
active-learning threshold), 1 + confidence for confident ones, 0.5 before
any model exists. A task resolves as soon as two labelers agree, and is
discarded when three labelers pick three different categories.
"""

import random
import threading
from bisect import insort
from dataclasses import dataclass, field

from .clock import from_rfc3339, to_rfc3339
from .errors import ConflictError, NotFoundError, ValidationError
from .gateway import ShortMessage
from .learning import ClassifierSchema
from .store import Store
from .textproc import normalize

DEFAULT_LEASE_SECONDS = 120.0
NO_MODEL_PRIORITY = 0.5


def prioritize(confidence: float | None, threshold: float) -> float:
    """Queue priority (lower serves first) from machine confidence."""
    if confidence is None:
        return NO_MODEL_PRIORITY
    if confidence <= threshold:
        return confidence
    return 1.0 + confidence


@dataclass
class LabelVote:
    task_id: str
    labeler_id: str
    category: str
    voted_at: float


@dataclass
class LabelTask:
    id: str
    message_id: str
    schema_id: str
    dedup_key: str
    priority: float
    created_at: float
    received_at: float
    status: str = "open"  # open | resolved | discarded
    votes: list[LabelVote] = field(default_factory=list)
    resolved_category: str | None = None
    leased_by: str | None = None
    lease_expires: float = 0.0

    def sort_key(self) -> tuple:
        return (self.priority, self.received_at, self.id)

    def voters(self) -> set[str]:
        return {v.labeler_id for v in self.votes}


@dataclass
class ResolvedLabel:
    message_id: str
    schema_id: str
    category: str
    resolved_at: float
    seq: int
    deleted: bool = False


@dataclass(frozen=True)
class Skipped:
    reason: str


class LabelingEngine:
    """Per-service task queues, one logical queue per schema."""

    def __init__(
        self,
        store: Store,
        clock,
        lease_seconds: float = DEFAULT_LEASE_SECONDS,
        selection: str = "uncertainty",
        selection_seed: int = 0,
    ):
        if selection not in ("uncertainty", "random"):
            raise ValidationError("selection must be 'uncertainty' or 'random'")
        self._store = store
        self._clock = clock
        self._lease_seconds = lease_seconds
        self._selection = selection
        self._rng = random.Random(selection_seed)
        self._lock = threading.RLock()
        self.tasks: dict[str, LabelTask] = {}
        self.labels: dict[tuple[str, str], ResolvedLabel] = {}  # (schema, message)
        self._by_dedup: dict[tuple[str, str], str] = {}
        self._by_message: dict[tuple[str, str], str] = {}
        self._queues: dict[str, list[tuple[tuple, str]]] = {}  # sorted (key, task_id)
        self._open_counts: dict[str, int] = {}
        self._task_seq = 0
        self._label_seq = 0

    # -- queue ------------------------------------------------------------

    def register_schema(self, schema_id: str) -> None:
        with self._lock:
            self._queues.setdefault(schema_id, [])
            self._open_counts.setdefault(schema_id, 0)

    def enqueue_candidate(
        self,
        message: ShortMessage,
        schema: ClassifierSchema,
        confidence: float | None,
    ) -> LabelTask | Skipped:
        dedup_key = normalize(message.text)
        with self._lock:
            if schema.id not in self._queues:
                raise NotFoundError(f"no such classifier: {schema.id}")
            if (schema.id, dedup_key) in self._by_dedup:
                return Skipped(reason="duplicate")
            self._task_seq += 1
            task = LabelTask(
                id="t%08d" % self._task_seq,
                message_id=message.id,
                schema_id=schema.id,
                dedup_key=dedup_key,
                priority=prioritize(confidence, schema.active_threshold),
                created_at=self._clock.now(),
                received_at=message.received_at,
            )
            self._store.append(
                "tasks",
                {
                    "event": "created",
                    "taskId": task.id,
                    "messageId": message.id,
                    "schemaId": schema.id,
                    "dedupKey": dedup_key,
                    "priority": task.priority,
                    "createdAt": to_rfc3339(task.created_at),
                    "receivedAt": to_rfc3339(task.received_at),
                },
            )
            self.tasks[task.id] = task
            self._by_dedup[(schema.id, dedup_key)] = task.id
            self._by_message[(schema.id, message.id)] = task.id
            insort(self._queues[schema.id], (task.sort_key(), task.id))
            self._open_counts[schema.id] += 1
            return task

    def reprioritize(self, schema_id: str, confidence_of, threshold: float) -> None:
        """Recompute open-task priorities after a model publish.

        ``confidence_of`` maps a message id to the current model's
        confidence for that message.
        """
        with self._lock:
            fresh: list[tuple[tuple, str]] = []
            for _, task_id in self._queues.get(schema_id, []):
                task = self.tasks[task_id]
                if task.status != "open":
                    continue
                task.priority = prioritize(
                    confidence_of(task.message_id), threshold
                )
                fresh.append((task.sort_key(), task_id))
            fresh.sort()
            self._queues[schema_id] = fresh

    def _eligible(self, task_id: str, labeler_id: str, now: float) -> bool:
        task = self.tasks[task_id]
        if task.status != "open":
            return False
        if labeler_id in task.voters():
            return False
        if (
            task.leased_by is not None
            and task.leased_by != labeler_id
            and task.lease_expires > now
        ):
            return False
        return True

    def next_task(self, labeler_id: str, schema_id: str) -> LabelTask | None:
        """Lease the best available open task to this labeler, or None."""
        return self.next_task_across(labeler_id, [schema_id])

    def next_task_across(
        self, labeler_id: str, schema_ids: list[str]
    ) -> LabelTask | None:
        """Best eligible task over several queues; leases the winner."""
        if not labeler_id:
            raise ValidationError("labeler token must be non-empty")
        now = self._clock.now()
        with self._lock:
            for schema_id in schema_ids:
                if schema_id not in self._queues:
                    raise NotFoundError(f"no such classifier: {schema_id}")
            chosen: LabelTask | None = None
            if self._selection == "random":
                pool = [
                    tid
                    for schema_id in schema_ids
                    for _, tid in self._queues[schema_id]
                    if self._eligible(tid, labeler_id, now)
                ]
                if pool:
                    chosen = self.tasks[self._rng.choice(pool)]
            else:
                for schema_id in schema_ids:
                    candidate = self._first_eligible(schema_id, labeler_id, now)
                    if candidate is not None and (
                        chosen is None or candidate.sort_key() < chosen.sort_key()
                    ):
                        chosen = candidate
            if chosen is None:
                return None
            chosen.leased_by = labeler_id
            chosen.lease_expires = now + self._lease_seconds
            return chosen

    def _first_eligible(
        self, schema_id: str, labeler_id: str, now: float
    ) -> LabelTask | None:
        queue = self._queues[schema_id]
        if len(queue) > 2 * max(self._open_counts.get(schema_id, 0), 1):
            queue = [
                entry for entry in queue if self.tasks[entry[1]].status == "open"
            ]
            self._queues[schema_id] = queue
        for _, tid in queue:
            if self._eligible(tid, labeler_id, now):
                return self.tasks[tid]
        return None

    # -- votes ------------------------------------------------------------

    def submit_vote(
        self, task_id: str, labeler_id: str, category: str, schema: ClassifierSchema
    ) -> LabelTask:
        """Record one vote and apply the 2-of-3 rule.

        Resolution happens at the first pair agreement; three distinct
        votes discard the task. Returns the task in its new state.
        """
        with self._lock:
            task = self.tasks.get(task_id)
            if task is None:
                raise NotFoundError(f"no such task: {task_id}")
            if task.status != "open":
                raise ConflictError(f"task {task_id} is {task.status}")
            if category not in schema.category_names:
                raise ValidationError(f"unknown category: {category}")
            if labeler_id in task.voters():
                raise ConflictError("labeler already voted on this task")

            vote = LabelVote(
                task_id=task_id,
                labeler_id=labeler_id,
                category=category,
                voted_at=self._clock.now(),
            )
            task.votes.append(vote)
            task.leased_by = None
            task.lease_expires = 0.0
            self._store.append(
                "tasks",
                {
                    "event": "vote",
                    "taskId": task_id,
                    "labelerId": labeler_id,
                    "category": category,
                    "votedAt": to_rfc3339(vote.voted_at),
                },
            )

            tally: dict[str, int] = {}
            for v in task.votes:
                tally[v.category] = tally.get(v.category, 0) + 1
            agreed = [c for c, n in tally.items() if n >= 2]
            if agreed:
                self._resolve(task, agreed[0])
            elif len(task.votes) >= 3:
                self._discard(task)
            return task

    def _resolve(self, task: LabelTask, category: str) -> None:
        task.status = "resolved"
        task.resolved_category = category
        self._open_counts[task.schema_id] -= 1
        self._label_seq += 1
        label = ResolvedLabel(
            message_id=task.message_id,
            schema_id=task.schema_id,
            category=category,
            resolved_at=self._clock.now(),
            seq=self._label_seq,
        )
        self.labels[(task.schema_id, task.message_id)] = label
        self._store.append(
            "tasks", {"event": "resolved", "taskId": task.id, "category": category}
        )
        self._store.append(
            "labels",
            {
                "event": "resolved",
                "messageId": label.message_id,
                "schemaId": label.schema_id,
                "category": category,
                "resolvedAt": to_rfc3339(label.resolved_at),
                "seq": label.seq,
            },
        )

    def _discard(self, task: LabelTask) -> None:
        task.status = "discarded"
        self._open_counts[task.schema_id] -= 1
        self._store.append("tasks", {"event": "discarded", "taskId": task.id})

    # -- labels -----------------------------------------------------------

    def delete_label(self, message_id: str, schema_id: str) -> tuple[ResolvedLabel, bool]:
        """Mark a label deleted; returns (label, changed). Idempotent."""
        with self._lock:
            label = self.labels.get((schema_id, message_id))
            if label is None:
                raise NotFoundError(
                    f"no label for message {message_id} in {schema_id}"
                )
            if label.deleted:
                return label, False
            label.deleted = True
            self._store.append(
                "labels",
                {
                    "event": "deleted",
                    "messageId": message_id,
                    "schemaId": schema_id,
                },
            )
            return label, True

    def active_labels(self, schema_id: str) -> list[ResolvedLabel]:
        """Non-deleted resolved labels, oldest first."""
        found = [
            label
            for (sid, _), label in self.labels.items()
            if sid == schema_id and not label.deleted
        ]
        found.sort(key=lambda lab: lab.seq)
        return found

    def pending_count(self, schema_id: str, since_seq: int) -> int:
        return sum(
            1
            for (sid, _), label in self.labels.items()
            if sid == schema_id and not label.deleted and label.seq > since_seq
        )

    def list_labeled(
        self, schema_id: str, page: int, page_size: int = 50
    ) -> list[ResolvedLabel]:
        """One newest-first page of non-deleted resolved labels."""
        if page < 1:
            raise ValidationError("page numbers start at 1")
        ordered = self.active_labels(schema_id)
        ordered.reverse()
        start = (page - 1) * page_size
        return ordered[start : start + page_size]

    def task_for_message(self, schema_id: str, message_id: str) -> LabelTask | None:
        task_id = self._by_message.get((schema_id, message_id))
        return self.tasks.get(task_id) if task_id else None

    def open_count(self, schema_id: str) -> int:
        return self._open_counts.get(schema_id, 0)

    # -- restart ----------------------------------------------------------

    def load(self) -> None:
        for event in self._store.replay("tasks"):
            kind = event["event"]
            if kind == "created":
                task = LabelTask(
                    id=event["taskId"],
                    message_id=event["messageId"],
                    schema_id=event["schemaId"],
                    dedup_key=event["dedupKey"],
                    priority=event["priority"],
                    created_at=from_rfc3339(event["createdAt"]),
                    received_at=from_rfc3339(event["receivedAt"]),
                )
                self.tasks[task.id] = task
                self._by_dedup[(task.schema_id, task.dedup_key)] = task.id
                self._by_message[(task.schema_id, task.message_id)] = task.id
                self._task_seq = max(self._task_seq, int(task.id[1:]))
            elif kind == "vote":
                self.tasks[event["taskId"]].votes.append(
                    LabelVote(
                        task_id=event["taskId"],
                        labeler_id=event["labelerId"],
                        category=event["category"],
                        voted_at=from_rfc3339(event["votedAt"]),
                    )
                )
            elif kind == "resolved":
                task = self.tasks[event["taskId"]]
                task.status = "resolved"
                task.resolved_category = event["category"]
            elif kind == "discarded":
                self.tasks[event["taskId"]].status = "discarded"
        for event in self._store.replay("labels"):
            if event["event"] == "resolved":
                label = ResolvedLabel(
                    message_id=event["messageId"],
                    schema_id=event["schemaId"],
                    category=event["category"],
                    resolved_at=from_rfc3339(event["resolvedAt"]),
                    seq=event["seq"],
                )
                self.labels[(label.schema_id, label.message_id)] = label
                self._label_seq = max(self._label_seq, label.seq)
            elif event["event"] == "deleted":
                self.labels[(event["schemaId"], event["messageId"])].deleted = True
        for task in self.tasks.values():
            self.register_schema(task.schema_id)
            if task.status == "open":
                insort(
                    self._queues[task.schema_id], (task.sort_key(), task.id)
                )
                self._open_counts[task.schema_id] += 1

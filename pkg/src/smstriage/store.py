"""Durable persistence and the ranked per-category export.

Persistence is a set of append-only JSON-lines event logs, one per entity
kind, plus one JSON snapshot file per trained model version. A write is
acknowledged after it reaches the OS (flush on every append), so an
acknowledged write survives a process restart; state is rebuilt by
replaying the logs on open.

Exports are pure views: a generator of CSV or JSON-lines rows ranked by
confidence within a category, never mutating anything.
"""

import csv
import io
import json
import os
import threading
from pathlib import Path
from typing import Iterable, Iterator

from .clock import to_rfc3339

LOG_KINDS = (
    "collections",
    "messages",
    "schemas",
    "tasks",
    "labels",
    "classifications",
    "trainings",
)

EXPORT_HEADER = ["message_id", "text", "category", "confidence", "model_version", "received_at"]


class Store:
    """Append-log store rooted at one directory."""

    def __init__(self, directory: str | Path, fsync: bool = False):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._fsync = fsync
        self._files: dict[str, io.TextIOWrapper] = {}
        self._locks = {kind: threading.Lock() for kind in LOG_KINDS}

    def _path(self, kind: str) -> Path:
        return self.directory / f"{kind}.jsonl"

    def append(self, kind: str, record: dict) -> None:
        """Durably append one event; returns after the OS has the bytes."""
        line = json.dumps(record, ensure_ascii=False, separators=(",", ":"))
        with self._locks[kind]:
            handle = self._files.get(kind)
            if handle is None:
                handle = open(self._path(kind), "a", encoding="utf-8")
                self._files[kind] = handle
            handle.write(line + "\n")
            handle.flush()
            if self._fsync:
                os.fsync(handle.fileno())

    def replay(self, kind: str) -> Iterator[dict]:
        path = self._path(kind)
        if not path.exists():
            return
        with open(path, encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if line:
                    yield json.loads(line)

    def model_dir(self, schema_id: str) -> Path:
        return self.directory / "models" / schema_id

    def close(self) -> None:
        for handle in self._files.values():
            handle.close()
        self._files.clear()


def export_csv_lines(rows: Iterable[dict]) -> Iterator[str]:
    """Stream RFC-4180 CSV: header first, then one line per ranked row."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(EXPORT_HEADER)
    yield buf.getvalue()
    for row in rows:
        buf.seek(0)
        buf.truncate()
        writer.writerow(
            [
                row["message_id"],
                row["text"],
                row["category"],
                repr(row["confidence"]),
                row["model_version"],
                to_rfc3339(row["received_at"]),
            ]
        )
        yield buf.getvalue()


def export_jsonl_lines(rows: Iterable[dict]) -> Iterator[str]:
    for row in rows:
        yield json.dumps(
            {
                "messageId": row["message_id"],
                "text": row["text"],
                "category": row["category"],
                "confidence": row["confidence"],
                "modelVersion": row["model_version"],
                "receivedAt": to_rfc3339(row["received_at"]),
            },
            ensure_ascii=False,
        ) + "\n"


def rank_export_rows(rows: list[dict]) -> list[dict]:
    """Order within a category: confidence descending, ties by receivedAt
    ascending, then message id for a total order."""
    return sorted(
        rows,
        key=lambda r: (-r["confidence"], r["received_at"], r["message_id"]),
    )

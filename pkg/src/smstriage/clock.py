"""Clock abstraction so deterministic runs produce identical timestamps.

The live service uses the system clock. Replay/acceptance runs use a
logical clock that starts at a fixed instant and advances a fixed step on
every read, which makes stored timestamps (and therefore export files)
reproducible across runs.
"""

import time
from datetime import datetime, timezone

_RFC3339 = "%Y-%m-%dT%H:%M:%S.%fZ"


def to_rfc3339(epoch: float) -> str:
    """Format an epoch-seconds value as an RFC 3339 UTC string."""
    return datetime.fromtimestamp(epoch, tz=timezone.utc).strftime(_RFC3339)


def from_rfc3339(text: str) -> float:
    dt = datetime.strptime(text, _RFC3339).replace(tzinfo=timezone.utc)
    return dt.timestamp()


class SystemClock:
    def now(self) -> float:
        return time.time()


class LogicalClock:
    """Deterministic clock: fixed start, fixed increment per call."""

    def __init__(self, start: float = 1767225600.0, step: float = 0.001):
        # default start is 2026-01-01T00:00:00Z
        self._next = start
        self._step = step

    def now(self) -> float:
        value = self._next
        self._next += self._step
        return value

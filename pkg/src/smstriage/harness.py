"""Replay harness: corpus generation, pusher simulation, auto-labeling.

This is the desk-scale stand-in for a production SMS feed: ``synth``
writes a seeded JSON-lines corpus with ground-truth categories, ``replay``
pushes it at a configurable rate with at-least-once retries, and
``autolabel`` runs simulated labelers that vote the true category with a
configurable accuracy — enough to drive the whole label/train/classify
loop end to end without humans.

Both replay and autolabel speak to the service through a small client
interface with two implementations: HTTP (live deployments) and direct
in-process calls (deterministic runs and benchmarks).
"""

import json
import random
import time
from dataclasses import dataclass, field
from pathlib import Path

import httpx

from .errors import TriageError, ValidationError
from .service import TriageService

# -- clients ----------------------------------------------------------------


class HttpClient:
    """Talks to a running service over HTTP; retries transient failures."""

    def __init__(self, base_url: str, retries: int = 3, timeout: float = 10.0):
        self.base_url = base_url.rstrip("/")
        self.retries = retries
        self._http = httpx.Client(base_url=self.base_url, timeout=timeout)

    def push(self, endpoint_path: str, text: str, sender_ref: str = "",
             source_meta: dict | None = None) -> str:
        last_error: Exception | None = None
        for _ in range(self.retries):
            try:
                response = self._http.post(
                    f"/push/{endpoint_path}",
                    json={
                        "text": text,
                        "senderRef": sender_ref,
                        "sourceMeta": source_meta or {},
                    },
                )
            except httpx.TransportError as exc:
                last_error = exc
                time.sleep(0.05)
                continue
            if response.status_code >= 500:
                last_error = ReplayAborted(f"server error {response.status_code}")
                time.sleep(0.05)
                continue
            if response.status_code >= 400:
                raise ValidationError(response.json()["error"]["message"])
            return response.json()["messageId"]
        raise ReplayAborted(f"push failed after {self.retries} attempts: {last_error}")

    def next_task(self, labeler: str, schema_id: str) -> dict | None:
        response = self._http.get(
            "/tasks/next", params={"labeler": labeler, "schema": schema_id}
        )
        response.raise_for_status()
        return response.json()["task"]

    def vote(self, task_id: str, labeler: str, category: str) -> dict:
        response = self._http.post(
            f"/tasks/{task_id}/vote",
            json={"labeler": labeler, "category": category},
        )
        response.raise_for_status()
        return response.json()

    def collection_counters(self, collection_id: str) -> dict:
        response = self._http.get(f"/collections/{collection_id}")
        response.raise_for_status()
        return response.json()["counters"]

    def close(self) -> None:
        self._http.close()


class LocalClient:
    """Direct in-process calls against an embedded service."""

    def __init__(self, service: TriageService):
        self.service = service

    def push(self, endpoint_path: str, text: str, sender_ref: str = "",
             source_meta: dict | None = None) -> str:
        return self.service.ingest(endpoint_path, text, sender_ref, source_meta).id

    def next_task(self, labeler: str, schema_id: str) -> dict | None:
        return self.service.next_task(labeler, schema_id)

    def vote(self, task_id: str, labeler: str, category: str) -> dict:
        return self.service.submit_vote(task_id, labeler, category)

    def collection_counters(self, collection_id: str) -> dict:
        return self.service.get_collection(collection_id).to_dict()["counters"]

    def close(self) -> None:
        pass


class ReplayAborted(TriageError):
    """Target unreachable after retries; the report so far is attached."""

    http_status = 502

    def __init__(self, message: str, report: "ReplayReport | None" = None):
        super().__init__(message)
        self.report = report


# -- synthetic corpus ---------------------------------------------------------


@dataclass
class SyntheticCategory:
    name: str
    keywords: list[str]
    weight: float


@dataclass
class SyntheticSpec:
    categories: list[SyntheticCategory]
    noise_tokens: list[str]
    messages: int
    seed: int
    char_limit: int = 140
    keyword_span: tuple[int, int] = (1, 3)
    noise_span: tuple[int, int] = (3, 7)
    # keyword j of a pool is drawn with weight (j+1)**-skew: early pool
    # entries are everyday phrasing, the tail is rare vocabulary the
    # classifier only learns once a labeler has seen it
    keyword_skew: float = 1.3

    def validate(self) -> None:
        if len(self.categories) < 2:
            raise ValidationError("synthetic spec needs at least 2 categories")
        total = sum(c.weight for c in self.categories)
        if abs(total - 1.0) > 1e-9:
            raise ValidationError(
                "category weights must sum to 1, got %.12f" % total
            )

    @classmethod
    def from_dict(cls, data: dict) -> "SyntheticSpec":
        return cls(
            categories=[
                SyntheticCategory(c["name"], list(c["keywords"]), c["weight"])
                for c in data["categories"]
            ],
            noise_tokens=list(data["noiseTokens"]),
            messages=data["messages"],
            seed=data["seed"],
            char_limit=data.get("charLimit", 140),
        )


# Default 8-category health-question fixture. Pools share a few ambiguous
# terms on purpose so the classifier has something left to learn after the
# first training.
HEALTH_CATEGORIES: list[tuple[str, str]] = [
    ("Symptoms", "Describes body signs and asks what illness they point to"),
    ("Definition", "Asks what a health term or abbreviation means"),
    ("Male Circumcision", "Where to get the procedure, costs, healing time"),
    ("Testing HIV", "Where and when to get tested, how tests work"),
    ("Treatment", "Available treatment and how to take it"),
    ("Pregnancy", "Pregnancy signs, prevention and care"),
    ("Transmission", "How infection passes between people"),
    ("Prevention", "How to avoid infection, condoms and other methods"),
]

# Pools are ordered common-first; the leading entries are deliberately
# shared across categories (people say "hiv" and "clinic" about
# everything), so the early trainings cannot separate categories on a
# single frequent word and the rare tail is what labeling gradually
# uncovers.
_HEALTH_POOLS: dict[str, list[str]] = {
    "Symptoms": [
        "hiv", "sick", "rash", "fever", "sores", "swelling", "pain",
        "itching", "headache", "sweats", "weakness", "dizzy", "ulcers",
    ],
    "Definition": [
        "hiv", "meaning", "means", "stands", "define", "term", "word",
        "explain", "abbreviation", "acronym", "fullform", "definition",
    ],
    "Male Circumcision": [
        "clinic", "circumcision", "cut", "heal", "procedure", "foreskin",
        "cost", "painful", "wound", "stitches", "recovery", "circumcised",
    ],
    "Testing HIV": [
        "hiv", "clinic", "test", "blood", "tested", "result", "window",
        "kit", "status", "checkup", "negative", "confirmatory",
    ],
    "Treatment": [
        "hiv", "medicine", "arv", "drugs", "dose", "cure", "therapy",
        "pills", "arvs", "regimen", "adherence", "prescription",
    ],
    "Pregnancy": [
        "clinic", "baby", "pregnant", "pregnancy", "mother", "born",
        "breastfeed", "delivery", "womb", "trimester", "antenatal", "midwife",
    ],
    "Transmission": [
        "hiv", "blood", "baby", "spread", "catch", "transmitted", "infect",
        "contact", "kissing", "sharing", "razor", "mosquito",
    ],
    "Prevention": [
        "hiv", "condom", "protect", "prevent", "safe", "avoid", "abstain",
        "faithful", "risk", "prep", "barrier", "microbicide",
    ],
}

_HEALTH_NOISE = [
    "hi", "pls", "plz", "can", "u", "you", "tell", "me", "i", "my", "how",
    "do", "does", "the", "a", "to", "of", "and", "if", "when", "someone",
    "person", "friend", "want", "know", "need", "help", "info", "abt",
    "about", "frm", "in2", "4", "2", "it", "on", "am", "wat", "hw",
]


def default_health_spec(messages: int = 8000, seed: int = 0,
                        char_limit: int = 140) -> SyntheticSpec:
    n = len(_HEALTH_POOLS)
    return SyntheticSpec(
        categories=[
            SyntheticCategory(name, pool, 1.0 / n)
            for name, pool in _HEALTH_POOLS.items()
        ],
        noise_tokens=list(_HEALTH_NOISE),
        messages=messages,
        seed=seed,
        char_limit=char_limit,
    )


def generate_synthetic(spec: SyntheticSpec, out_path: str | Path) -> int:
    """Write the corpus as JSON lines with trueCategory; returns the count.

    Fully deterministic for a fixed spec (byte-identical files).
    """
    spec.validate()
    rng = random.Random(spec.seed)
    names = [c.name for c in spec.categories]
    weights = [c.weight for c in spec.categories]
    pool_weights = {
        c.name: [(j + 1) ** -spec.keyword_skew for j in range(len(c.keywords))]
        for c in spec.categories
    }
    lines = []
    for i in range(spec.messages):
        category = rng.choices(names, weights=weights)[0]
        pool = spec.categories[names.index(category)].keywords
        n_kw = rng.randint(*spec.keyword_span)
        n_noise = rng.randint(*spec.noise_span)
        words = rng.choices(pool, weights=pool_weights[category], k=n_kw)
        words += [rng.choice(spec.noise_tokens) for _ in range(n_noise)]
        rng.shuffle(words)
        text = " ".join(words)
        while len(text) > spec.char_limit:
            words.pop()
            text = " ".join(words)
        lines.append(
            json.dumps(
                {
                    "text": text,
                    "trueCategory": category,
                    "senderRef": "synth-%06d" % i,
                },
                ensure_ascii=False,
                sort_keys=True,
            )
        )
    Path(out_path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return len(lines)


def load_corpus(path: str | Path) -> list[dict]:
    rows = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                rows.append(json.loads(line))
    return rows


def truth_map(path: str | Path) -> dict[str, str]:
    """text -> trueCategory for the auto-label oracle."""
    mapping: dict[str, str] = {}
    for row in load_corpus(path):
        if "trueCategory" in row:
            mapping.setdefault(row["text"], row["trueCategory"])
    return mapping


# -- replay -------------------------------------------------------------------


@dataclass
class ReplayPlan:
    source_file: str | Path
    endpoint_path: str
    rate: float | str = "max"  # messages per second, or "max"
    shuffle_seed: int | None = None
    limit: int | None = None

    def validate(self, line_count: int) -> None:
        if self.rate != "max":
            if not isinstance(self.rate, (int, float)) or self.rate <= 0:
                raise ValidationError("rate must be a positive number or 'max'")
        if self.limit is not None:
            if self.limit < 0 or self.limit > line_count:
                raise ValidationError(
                    "limit %d outside the file's %d lines" % (self.limit, line_count)
                )


@dataclass
class ReplayReport:
    sent: int = 0
    rejected: int = 0
    skipped_by_limit: int = 0
    elapsed: float = 0.0
    achieved_rate: float = 0.0
    message_ids: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "sent": self.sent,
            "rejected": self.rejected,
            "skippedByLimit": self.skipped_by_limit,
            "elapsed": self.elapsed,
            "achievedRate": self.achieved_rate,
        }


def replay(plan: ReplayPlan, client) -> ReplayReport:
    """Push a corpus file through a client at the planned rate."""
    with open(plan.source_file, encoding="utf-8") as handle:
        lines = [line.rstrip("\n") for line in handle if line.strip()]
    plan.validate(len(lines))

    if plan.shuffle_seed is not None:
        random.Random(plan.shuffle_seed).shuffle(lines)

    report = ReplayReport()
    if plan.limit is not None:
        report.skipped_by_limit = len(lines) - plan.limit
        lines = lines[: plan.limit]

    start = time.monotonic()
    for index, line in enumerate(lines):
        try:
            row = json.loads(line)
            text = row["text"]
        except (json.JSONDecodeError, TypeError, KeyError):
            report.rejected += 1
            continue
        if plan.rate != "max":
            target = start + index / float(plan.rate)
            delay = target - time.monotonic()
            if delay > 0:
                time.sleep(delay)
        try:
            message_id = client.push(
                plan.endpoint_path,
                text,
                row.get("senderRef", ""),
                row.get("sourceMeta"),
            )
        except ValidationError:
            report.rejected += 1
            continue
        except ReplayAborted as exc:
            report.elapsed = time.monotonic() - start
            raise ReplayAborted(str(exc), report=report) from exc
        report.sent += 1
        report.message_ids.append(message_id)
    report.elapsed = time.monotonic() - start
    if report.elapsed > 0:
        report.achieved_rate = report.sent / report.elapsed
    return report


# -- auto labeler ---------------------------------------------------------------


@dataclass
class AutoLabelReport:
    votes: int = 0
    resolved: int = 0
    discarded: int = 0
    wrong_resolutions: int = 0

    def to_dict(self) -> dict:
        return {
            "votes": self.votes,
            "resolved": self.resolved,
            "discarded": self.discarded,
            "wrongResolutions": self.wrong_resolutions,
        }


def auto_label(
    client,
    schema_id: str,
    truth: dict[str, str],
    labeler_count: int = 3,
    accuracy: float = 1.0,
    seed: int = 0,
    max_labels: int | None = None,
    on_resolve=None,
) -> AutoLabelReport:
    """Simulated expert labelers drive the 2-of-3 loop.

    Each labeler polls for a task and votes the true category with
    probability ``accuracy``, otherwise a uniformly random wrong one.
    Stops when ``max_labels`` labels resolved or no labeler can get a task.
    """
    if not 0.0 <= accuracy <= 1.0:
        raise ValidationError("accuracy must be in [0,1]")
    rng = random.Random(seed)
    labelers = ["sim-labeler-%d" % i for i in range(1, labeler_count + 1)]
    report = AutoLabelReport()
    while True:
        any_progress = False
        for labeler in labelers:
            if max_labels is not None and report.resolved >= max_labels:
                return report
            task = client.next_task(labeler, schema_id)
            if task is None:
                continue
            any_progress = True
            true_category = truth.get(task["text"])
            names = [c["name"] for c in task["categories"]]
            if true_category is None:
                true_category = rng.choice(names)
            if accuracy >= 1.0 or rng.random() < accuracy:
                choice = true_category
            else:
                wrong = [n for n in names if n != true_category]
                choice = rng.choice(wrong) if wrong else true_category
            outcome = client.vote(task["taskId"], labeler, choice)
            report.votes += 1
            if outcome["status"] == "resolved":
                report.resolved += 1
                if outcome.get("resolvedCategory") != truth.get(task["text"]):
                    report.wrong_resolutions += 1
                if on_resolve is not None:
                    on_resolve(report.resolved)
            elif outcome["status"] == "discarded":
                report.discarded += 1
        if not any_progress:
            return report

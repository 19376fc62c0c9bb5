import random

import pytest

from smstriage.config import ServiceConfig
from smstriage.service import TriageService

CATEGORY_POOLS = {
    "Symptoms": ["rash", "fever", "pain", "swelling", "cough", "sores"],
    "Testing": ["test", "tested", "clinic", "window", "result", "kit"],
    "Treatment": ["arv", "medicine", "dose", "therapy", "cure", "drugs"],
    "Prevention": ["condom", "protect", "abstain", "faithful", "safe", "prep"],
    "Pregnancy": ["pregnant", "baby", "mother", "delivery", "breastfeed", "born"],
    "Transmission": ["spread", "blood", "contact", "infect", "carrier", "share"],
    "Definition": ["meaning", "define", "stands", "term", "word", "explain"],
    "Circumcision": ["circumcision", "procedure", "heal", "foreskin", "cut", "wound"],
}
FILLERS = [
    "hi", "pls", "can", "you", "tell", "me", "about", "how", "what", "when",
    "does", "the", "my", "friend", "someone", "need", "info", "help", "know",
]


def make_labeled_corpus(n: int, categories: list[str], seed: int = 0):
    """Separable synthetic (text, category) pairs for training tests."""
    rng = random.Random(seed)
    corpus = []
    for i in range(n):
        cat = categories[i % len(categories)]
        words = rng.sample(CATEGORY_POOLS[cat], 3) + rng.sample(FILLERS, 4)
        rng.shuffle(words)
        words.append("nr%d" % i)  # keep texts distinct for dedup
        corpus.append((" ".join(words), cat))
    return corpus


def drive_labels(service, schema_id, truth_by_text, labelers=("lab1", "lab2"), limit=None):
    """Resolve open tasks by voting the true category with perfect accuracy.

    Returns the number of labels resolved. Stops when the queue is
    exhausted for every labeler or when ``limit`` resolutions happened.
    """
    resolved = 0
    while True:
        progress = False
        for labeler in labelers:
            view = service.next_task(labeler, schema_id)
            if view is None:
                continue
            progress = True
            result = service.submit_vote(
                view["taskId"], labeler, truth_by_text[view["text"]]
            )
            if result["status"] == "resolved":
                resolved += 1
                if limit is not None and resolved >= limit:
                    return resolved
        if not progress:
            return resolved


@pytest.fixture
def sync_service(tmp_path):
    services = []

    def factory(**overrides) -> TriageService:
        defaults = dict(
            data_dir=str(tmp_path / ("svc%d" % len(services))),
            mode="sync",
            seed=1234,
        )
        defaults.update(overrides)
        service = TriageService(ServiceConfig(**defaults))
        services.append(service)
        return service

    yield factory
    for service in services:
        service.close()


@pytest.fixture
def live_service(tmp_path):
    services = []

    def factory(**overrides) -> TriageService:
        defaults = dict(
            data_dir=str(tmp_path / ("live%d" % len(services))),
            mode="live",
            seed=1234,
        )
        defaults.update(overrides)
        service = TriageService(ServiceConfig(**defaults))
        services.append(service)
        return service

    yield factory
    for service in services:
        service.close()

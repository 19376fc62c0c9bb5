"""Model lifecycle: stratified splits, training, prediction, snapshots.

A training pass is a pure function of (resolved labels, schema, version):
vocabulary selection, an 80/20 stratified hold-out split, forest growth
and hold-out evaluation all derive their randomness from the schema seed
and the model version, so retraining the same labels reproduces the same
model bit for bit.
"""

import json
import math
import random
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .clock import from_rfc3339, to_rfc3339
from .errors import CannotTrainError, StaleVectorError, ValidationError
from .features import FeatureVector, Vocabulary, build_vocabulary, dense_matrix, vectorize
from .forest import Forest, Tree, train_forest
from .metrics import ModelMetrics, evaluate_scores

DEFAULT_RETRAIN_EVERY = 50
DEFAULT_ACTIVE_THRESHOLD = 0.60
DEFAULT_HOLDOUT_FRACTION = 0.20
DEFAULT_NUM_TREES = 100
MIN_LABELS_FOR_SPLIT = 5


@dataclass(frozen=True)
class ClassifierSchema:
    """A named category set plus the knobs of its training loop."""

    id: str
    collection_id: str
    categories: tuple[tuple[str, str], ...]  # (name, description)
    k: int = 800
    retrain_every: int = DEFAULT_RETRAIN_EVERY
    active_threshold: float = DEFAULT_ACTIVE_THRESHOLD
    holdout_fraction: float = DEFAULT_HOLDOUT_FRACTION
    num_trees: int = DEFAULT_NUM_TREES
    seed: int = 0
    created_at: float = 0.0

    def __post_init__(self):
        names = [name for name, _ in self.categories]
        if len(names) < 2:
            raise ValidationError("a classifier needs at least 2 categories")
        if len(set(names)) != len(names):
            raise ValidationError("category names must be unique")
        if not 0 < self.active_threshold < 1:
            raise ValidationError("activeThreshold must be in (0,1)")
        if not 0 < self.holdout_fraction < 1:
            raise ValidationError("holdoutFraction must be in (0,1)")
        if self.retrain_every < 1 or self.k < 1 or self.num_trees < 1:
            raise ValidationError("retrainEvery, k and numTrees must be >= 1")

    @property
    def category_names(self) -> list[str]:
        return [name for name, _ in self.categories]

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "collectionId": self.collection_id,
            "categories": [
                {"name": n, "description": d} for n, d in self.categories
            ],
            "k": self.k,
            "retrainEvery": self.retrain_every,
            "activeThreshold": self.active_threshold,
            "holdoutFraction": self.holdout_fraction,
            "numTrees": self.num_trees,
            "seed": self.seed,
            "createdAt": to_rfc3339(self.created_at),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ClassifierSchema":
        return cls(
            id=data["id"],
            collection_id=data["collectionId"],
            categories=tuple(
                (c["name"], c["description"]) for c in data["categories"]
            ),
            k=data["k"],
            retrain_every=data["retrainEvery"],
            active_threshold=data["activeThreshold"],
            holdout_fraction=data["holdoutFraction"],
            num_trees=data["numTrees"],
            seed=data["seed"],
            created_at=from_rfc3339(data["createdAt"]),
        )


@dataclass(frozen=True)
class TrainedModel:
    """Immutable snapshot published by one training pass."""

    version: int
    schema_id: str
    categories: tuple[str, ...]
    vocabulary: Vocabulary
    forest: Forest
    train_size: int
    holdout_size: int
    metrics: ModelMetrics
    seed: int
    trained_at: float


@dataclass(frozen=True)
class Classification:
    message_id: str
    model_version: int
    category: str
    confidence: float
    per_category_scores: dict[str, float]
    classified_at: float


def split_holdout(
    labels: list[tuple[str, str]], fraction: float, seed: int
) -> tuple[list[tuple[str, str]], list[tuple[str, str]]]:
    """Stratified train/holdout split of (message_id, category) pairs.

    The holdout target is round(fraction * total); largest-remainder
    allocation keeps each category's holdout share as close to the
    fraction as rounding allows while leaving every category at least one
    training example. Deterministic for a fixed seed.
    """
    if len(labels) < MIN_LABELS_FOR_SPLIT:
        raise CannotTrainError(
            "need at least %d labels to split, got %d"
            % (MIN_LABELS_FOR_SPLIT, len(labels))
        )
    if not 0 < fraction < 1:
        raise ValidationError("holdout fraction must be in (0,1)")

    by_category: dict[str, list[tuple[str, str]]] = {}
    for pair in labels:
        by_category.setdefault(pair[1], []).append(pair)
    categories = sorted(by_category)

    target = math.floor(fraction * len(labels) + 0.5)
    quota = {c: math.floor(fraction * len(by_category[c])) for c in categories}
    remainders = sorted(
        categories,
        key=lambda c: (-(fraction * len(by_category[c]) - quota[c]), c),
    )
    leftover = target - sum(quota.values())
    for c in remainders:
        if leftover <= 0:
            break
        if quota[c] + 1 <= len(by_category[c]) - 1:
            quota[c] += 1
            leftover -= 1

    rng = random.Random(seed)
    train: list[tuple[str, str]] = []
    holdout: list[tuple[str, str]] = []
    for c in categories:
        members = list(by_category[c])
        rng.shuffle(members)
        holdout.extend(members[: quota[c]])
        train.extend(members[quota[c] :])
    return train, holdout


def _derived_seeds(schema_seed: int, version: int) -> tuple[int, int]:
    state = np.random.SeedSequence([schema_seed % (2**64), version]).generate_state(2)
    return int(state[0]), int(state[1])


def train_model(
    schema: ClassifierSchema,
    labeled: list[tuple[str, str, str]],
    version: int,
    trained_at: float,
) -> TrainedModel:
    """One full training pass over (message_id, text, category) labels."""
    categories = {cat for _, _, cat in labeled}
    if len(categories) < 2:
        raise CannotTrainError("labels cover a single category; cannot train")
    unknown = categories - set(schema.category_names)
    if unknown:
        raise ValidationError("labels reference unknown categories: %s" % unknown)

    vocab = build_vocabulary(
        [(text, cat) for _, text, cat in labeled], k=schema.k, version=version
    )
    if not len(vocab):
        raise CannotTrainError("labeled messages produced no features")

    split_seed, forest_seed = _derived_seeds(schema.seed, version)
    by_id = {mid: (text, cat) for mid, text, cat in labeled}
    train_ids, holdout_ids = split_holdout(
        [(mid, cat) for mid, _, cat in labeled], schema.holdout_fraction, split_seed
    )
    train_cats = {cat for _, cat in train_ids}
    if len(train_cats) < 2:
        raise CannotTrainError("train part of the split covers a single category")

    names = schema.category_names
    cat_idx = {c: i for i, c in enumerate(names)}
    x_train = dense_matrix(
        [vectorize(by_id[mid][0], vocab) for mid, _ in train_ids], len(vocab)
    )
    y_train = np.array([cat_idx[cat] for _, cat in train_ids], dtype=np.int64)
    forest = train_forest(
        x_train, y_train, n_classes=len(names),
        n_trees=schema.num_trees, seed=forest_seed,
    )

    x_hold = dense_matrix(
        [vectorize(by_id[mid][0], vocab) for mid, _ in holdout_ids], len(vocab)
    )
    scores = forest.predict_batch(x_hold)
    metrics = evaluate_scores(scores, [cat for _, cat in holdout_ids], names)

    return TrainedModel(
        version=version,
        schema_id=schema.id,
        categories=tuple(names),
        vocabulary=vocab,
        forest=forest,
        train_size=len(train_ids),
        holdout_size=len(holdout_ids),
        metrics=metrics,
        seed=schema.seed,
        trained_at=trained_at,
    )


def classify_scores(
    scores: np.ndarray, categories: tuple[str, ...]
) -> tuple[str, float, dict[str, float]]:
    """Argmax with ties broken by category order; returns the full map."""
    best = int(np.argmax(scores))
    per = {cat: float(scores[i]) for i, cat in enumerate(categories)}
    return categories[best], float(scores[best]), per


def predict(
    vector: FeatureVector, model: TrainedModel, message_id: str, now: float
) -> Classification:
    """Classify one already-vectorized message with a published model."""
    if vector.vocabulary_version != model.vocabulary.version:
        raise StaleVectorError(
            "vector built for vocabulary v%d, model expects v%d"
            % (vector.vocabulary_version, model.vocabulary.version)
        )
    x = dense_matrix([vector], len(model.vocabulary))
    scores = model.forest.predict_batch(x)[0]
    category, confidence, per = classify_scores(scores, model.categories)
    return Classification(
        message_id=message_id,
        model_version=model.version,
        category=category,
        confidence=confidence,
        per_category_scores=per,
        classified_at=now,
    )


def save_model(model: TrainedModel, directory: Path) -> Path:
    """Write the versioned snapshot: vocabulary file + self-describing
    model JSON that references it by name and content hash."""
    directory.mkdir(parents=True, exist_ok=True)
    vocab_name = "vocab-v%d.json" % model.version
    vocab_path = directory / vocab_name
    vocab_path.write_text(
        json.dumps(model.vocabulary.to_dict(), ensure_ascii=False), encoding="utf-8"
    )
    payload = {
        "version": model.version,
        "schemaId": model.schema_id,
        "categories": list(model.categories),
        "seed": model.seed,
        "trainedAt": to_rfc3339(model.trained_at),
        "trainSize": model.train_size,
        "holdoutSize": model.holdout_size,
        "metrics": model.metrics.to_dict(),
        "vocabulary": {
            "file": vocab_name,
            "version": model.vocabulary.version,
            "contentHash": model.vocabulary.content_hash(),
        },
        "trees": [tree.to_nested() for tree in model.forest.trees],
    }
    path = directory / ("model-v%d.json" % model.version)
    path.write_text(json.dumps(payload, ensure_ascii=False), encoding="utf-8")
    return path


def load_model(path: Path) -> TrainedModel:
    """Reload a snapshot, verifying the vocabulary content hash."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    vocab_path = Path(path).parent / data["vocabulary"]["file"]
    vocab = Vocabulary.from_dict(json.loads(vocab_path.read_text(encoding="utf-8")))
    if vocab.content_hash() != data["vocabulary"]["contentHash"]:
        raise ValidationError("vocabulary content hash mismatch for %s" % path)
    n_classes = len(data["categories"])
    forest = Forest(
        trees=[Tree.from_nested(t, n_classes) for t in data["trees"]],
        n_classes=n_classes,
        n_features=len(vocab),
        seed=data["seed"],
    )
    return TrainedModel(
        version=data["version"],
        schema_id=data["schemaId"],
        categories=tuple(data["categories"]),
        vocabulary=vocab,
        forest=forest,
        train_size=data["trainSize"],
        holdout_size=data["holdoutSize"],
        metrics=ModelMetrics.from_dict(data["metrics"]),
        seed=data["seed"],
        trained_at=from_rfc3339(data["trainedAt"]),
    )

"""Information-gain feature selection and message vectorization.

A vocabulary is built from the labeled messages only: every distinct
n-gram is scored by the entropy reduction its presence gives over the
category distribution, and the top-k survive. Vectors are binary presence
indicators over that vocabulary; SMS are short enough that counts are
almost always 0/1 anyway, and presence keeps the two-way contingency
table behind the information-gain score exact.
"""

import hashlib
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CannotTrainError, ValidationError
from .textproc import Ngram, extract_ngrams, ngram_text, normalize

DEFAULT_FEATURE_CAP = 800


def _entropy_bits(counts: list[int]) -> float:
    total = sum(counts)
    if total == 0:
        return 0.0
    h = 0.0
    for c in counts:
        if c > 0:
            p = c / total
            h -= p * math.log2(p)
    return h


def information_gain(labeled_set: list[tuple[bool, str]]) -> float:
    """IG in bits of a feature's presence over the category distribution.

    ``labeled_set`` holds one (feature_present, category) pair per labeled
    message. Entropies use empirical frequencies; an empty partition
    contributes zero to the conditional term.
    """
    if not labeled_set:
        raise ValidationError("information gain needs a non-empty labeled set")
    categories = sorted({cat for _, cat in labeled_set})
    totals = {cat: 0 for cat in categories}
    present = {cat: 0 for cat in categories}
    for is_present, cat in labeled_set:
        totals[cat] += 1
        if is_present:
            present[cat] += 1
    n = len(labeled_set)
    n_present = sum(present.values())
    n_absent = n - n_present
    h_class = _entropy_bits(list(totals.values()))
    h_cond = 0.0
    if n_present:
        h_cond += (n_present / n) * _entropy_bits(list(present.values()))
    if n_absent:
        absent = [totals[c] - present[c] for c in categories]
        h_cond += (n_absent / n) * _entropy_bits(absent)
    return max(0.0, h_class - h_cond)


@dataclass(frozen=True)
class Vocabulary:
    """Ordered, immutable selection of scored n-gram features."""

    features: tuple[tuple[Ngram, float], ...]
    k: int
    source_label_count: int
    version: int
    index: dict[Ngram, int] = field(compare=False, repr=False, default_factory=dict)

    def __post_init__(self):
        object.__setattr__(
            self, "index", {gram: i for i, (gram, _) in enumerate(self.features)}
        )

    def __len__(self) -> int:
        return len(self.features)

    def to_csv(self) -> str:
        """Debug export: feature,arity,ig_bits in vocabulary order."""
        buf = io.StringIO()
        buf.write("feature,arity,ig_bits\n")
        for gram, score in self.features:
            buf.write(f"{ngram_text(gram)},{len(gram)},{score!r}\n")
        return buf.getvalue()

    def content_hash(self) -> str:
        return hashlib.sha256(self.to_csv().encode("utf-8")).hexdigest()

    def to_dict(self) -> dict:
        return {
            "features": [[list(g), s] for g, s in self.features],
            "k": self.k,
            "sourceLabelCount": self.source_label_count,
            "version": self.version,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Vocabulary":
        return cls(
            features=tuple((tuple(g), s) for g, s in data["features"]),
            k=data["k"],
            source_label_count=data["sourceLabelCount"],
            version=data["version"],
        )


@dataclass(frozen=True)
class FeatureVector:
    vocabulary_version: int
    present_indices: tuple[int, ...]


def build_vocabulary(
    labeled_messages: list[tuple[str, str]],
    k: int = DEFAULT_FEATURE_CAP,
    version: int = 1,
) -> Vocabulary:
    """Score every distinct n-gram of the labeled set and keep the top k.

    Presence means the n-gram occurs at least once in a message. Sort
    order is IG descending with lexicographic feature-text ascending as
    the tie break, which makes the result independent of input order.
    """
    if k < 1:
        raise ValidationError("feature cap k must be >= 1")
    categories = sorted({cat for _, cat in labeled_messages})
    if len(categories) < 2:
        raise CannotTrainError(
            "vocabulary needs labels from at least 2 categories, got %d"
            % len(categories)
        )
    cat_idx = {c: i for i, c in enumerate(categories)}
    n_classes = len(categories)

    class_totals = np.zeros(n_classes, dtype=np.int64)
    present_counts: dict[Ngram, np.ndarray] = {}
    for text, cat in labeled_messages:
        ci = cat_idx[cat]
        class_totals[ci] += 1
        for gram in set(extract_ngrams(normalize(text))):
            row = present_counts.get(gram)
            if row is None:
                row = np.zeros(n_classes, dtype=np.int64)
                present_counts[gram] = row
            row[ci] += 1

    n = int(class_totals.sum())
    grams = list(present_counts.keys())
    if not grams:
        return Vocabulary(features=(), k=k, source_label_count=n, version=version)
    present = np.stack([present_counts[g] for g in grams])  # (F, C)
    absent = class_totals[None, :] - present
    scores = _ig_from_counts(present, absent, class_totals)

    ranked = sorted(
        zip(grams, scores.tolist()),
        key=lambda pair: (-pair[1], ngram_text(pair[0])),
    )
    return Vocabulary(
        features=tuple(ranked[:k]), k=k, source_label_count=n, version=version
    )


def _ig_from_counts(
    present: np.ndarray, absent: np.ndarray, class_totals: np.ndarray
) -> np.ndarray:
    """Vectorized IG for many features from per-class presence counts."""
    n = class_totals.sum()
    h_class = _entropy_bits(class_totals.tolist())
    cond = _row_entropy(present) * (present.sum(axis=1) / n)
    cond += _row_entropy(absent) * (absent.sum(axis=1) / n)
    return np.maximum(0.0, h_class - cond)


def _row_entropy(counts: np.ndarray) -> np.ndarray:
    totals = counts.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(totals > 0, counts / np.where(totals > 0, totals, 1), 0.0)
        logp = np.where(p > 0, np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return -(p * logp).sum(axis=1)


def vectorize(text: str, vocab: Vocabulary) -> FeatureVector:
    """Binary presence vector of the message over the vocabulary."""
    if not len(vocab):
        raise ValidationError("cannot vectorize against an empty vocabulary")
    grams = set(extract_ngrams(normalize(text)))
    indices = sorted(vocab.index[g] for g in grams if g in vocab.index)
    return FeatureVector(
        vocabulary_version=vocab.version, present_indices=tuple(indices)
    )


def dense_matrix(vectors: list[FeatureVector], width: int) -> np.ndarray:
    """Stack presence vectors into a dense boolean (n, width) matrix."""
    x = np.zeros((len(vectors), width), dtype=bool)
    for i, vec in enumerate(vectors):
        if vec.present_indices:
            x[i, list(vec.present_indices)] = True
    return x

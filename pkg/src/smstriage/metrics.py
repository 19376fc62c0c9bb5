"""Ranking metrics: one-vs-rest AUC and hold-out evaluation.

AUC is the probability that a uniformly random positive outranks a
uniformly random negative, with ties counted one half — computed via the
Mann-Whitney midrank identity rather than pairwise enumeration.
"""

from dataclasses import dataclass

import numpy as np

from .errors import UndefinedAucError


def auc_one_vs_rest(pairs: list[tuple[float, bool]]) -> float:
    """AUC of (score, is_positive) pairs; ties contribute 1/2."""
    if not pairs:
        raise UndefinedAucError("empty score set")
    scores = np.asarray([s for s, _ in pairs], dtype=float)
    positive = np.asarray([bool(p) for _, p in pairs], dtype=bool)
    n = len(pairs)
    n_pos = int(positive.sum())
    n_neg = n - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedAucError("AUC needs at least one positive and one negative")

    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(n, dtype=float)
    sorted_scores = scores[order]
    i = 0
    while i < n:
        j = i
        while j < n and sorted_scores[j] == sorted_scores[i]:
            j += 1
        ranks[order[i:j]] = (i + j + 1) / 2.0  # midrank of ranks i+1..j
        i = j
    rank_sum = ranks[positive].sum()
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


@dataclass(frozen=True)
class ModelMetrics:
    """Per-category one-vs-rest AUC plus the macro average.

    Categories with no holdout positives (or no negatives) have an
    undefined AUC, carry None, and are excluded from the macro mean.
    """

    per_category: dict[str, float | None]
    macro: float | None

    def to_dict(self) -> dict:
        return {"perCategoryAuc": dict(self.per_category), "macroAuc": self.macro}

    @classmethod
    def from_dict(cls, data: dict) -> "ModelMetrics":
        return cls(per_category=dict(data["perCategoryAuc"]), macro=data["macroAuc"])


def evaluate_scores(
    score_matrix: np.ndarray, true_labels: list[str], categories: list[str]
) -> ModelMetrics:
    """Hold-out metrics from an (n, C) score matrix and true labels."""
    if len(true_labels) == 0:
        raise UndefinedAucError("empty holdout")
    per: dict[str, float | None] = {}
    for ci, cat in enumerate(categories):
        flags = [label == cat for label in true_labels]
        if not any(flags) or all(flags):
            per[cat] = None
            continue
        per[cat] = auc_one_vs_rest(
            list(zip(score_matrix[:, ci].tolist(), flags))
        )
    defined = [v for v in per.values() if v is not None]
    macro = sum(defined) / len(defined) if defined else None
    return ModelMetrics(per_category=per, macro=macro)

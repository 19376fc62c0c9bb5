"""Random forest over binary presence features, built from scratch.

Each tree is grown on a bootstrap sample (same size as the training set,
drawn with replacement). At every node a random subset of
ceil(sqrt(n_features)) candidate features is tried and the split with the
largest Gini impurity decrease wins; splitting stops on pure nodes, nodes
smaller than two samples, or when no candidate improves. Leaves keep the
class-frequency distribution of their samples, and the forest score of a
message is the mean of the leaf distributions it reaches — which is what
the service reports as machine confidence for the argmax category.

Trees are stored as parallel arrays (feature, left, right, leaf
distribution) so prediction over a batch of messages is a handful of
vectorized index hops per tree level instead of per-message recursion.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import CannotTrainError

_MIN_GINI_DECREASE = 1e-12


@dataclass
class Tree:
    feature: np.ndarray  # int32 feature index per node, -1 at leaves
    left: np.ndarray  # child when the feature is absent
    right: np.ndarray  # child when the feature is present
    dist: np.ndarray  # (n_nodes, n_classes); zero rows at internal nodes

    def node_count(self) -> int:
        return len(self.feature)

    def to_nested(self) -> dict:
        """Nested split/leaf dict form for the model snapshot file."""
        built: list[dict | None] = [None] * self.node_count()
        for i in reversed(range(self.node_count())):
            if self.feature[i] < 0:
                built[i] = {"leaf": {"dist": self.dist[i].tolist()}}
            else:
                built[i] = {
                    "split": {
                        "feature": int(self.feature[i]),
                        "absent": built[self.left[i]],
                        "present": built[self.right[i]],
                    }
                }
        return built[0]

    @classmethod
    def from_nested(cls, node: dict, n_classes: int) -> "Tree":
        feature: list[int] = []
        left: list[int] = []
        right: list[int] = []
        dists: list[list[float]] = []

        def alloc() -> int:
            feature.append(-1)
            left.append(-1)
            right.append(-1)
            dists.append([0.0] * n_classes)
            return len(feature) - 1

        stack = [(node, alloc())]
        while stack:
            spec, idx = stack.pop()
            if "leaf" in spec:
                dists[idx] = list(spec["leaf"]["dist"])
                continue
            split = spec["split"]
            feature[idx] = split["feature"]
            left[idx] = alloc()
            right[idx] = alloc()
            stack.append((split["absent"], left[idx]))
            stack.append((split["present"], right[idx]))
        return cls(
            feature=np.asarray(feature, dtype=np.int32),
            left=np.asarray(left, dtype=np.int32),
            right=np.asarray(right, dtype=np.int32),
            dist=np.asarray(dists, dtype=np.float64),
        )


@dataclass
class Forest:
    trees: list[Tree]
    n_classes: int
    n_features: int
    seed: int
    _flat: "_FlatForest | None" = None

    def predict_batch(self, x: np.ndarray) -> np.ndarray:
        """Mean leaf distribution per row of a dense (n, n_features) bool
        matrix; returns (n, n_classes) scores that sum to one per row.

        All (row, tree) pairs are traversed jointly as one flat slot
        vector; slots drop out of the active set as they reach leaves, so
        total work is the sum of actual path lengths.
        """
        if self._flat is None:
            self._flat = _FlatForest.build(self.trees)
        flat = self._flat
        n = x.shape[0]
        n_trees = len(self.trees)
        idx = np.tile(flat.roots, n)  # slot s = (row s // T, tree s % T)
        rows = np.repeat(np.arange(n), n_trees)
        active = np.flatnonzero(flat.feature[idx] >= 0)
        while active.size:
            cur = idx[active]
            present = x[rows[active], flat.feature[cur]]
            hopped = np.where(present, flat.right[cur], flat.left[cur])
            idx[active] = hopped
            active = active[flat.feature[hopped] >= 0]
        total = flat.dist[idx].reshape(n, n_trees, -1).sum(axis=1)
        return total / n_trees


@dataclass
class _FlatForest:
    """All trees of a forest concatenated into flat arrays; node ids are
    offset per tree so one gather serves the whole ensemble."""

    feature: np.ndarray  # -1 still marks leaves
    left: np.ndarray
    right: np.ndarray
    dist: np.ndarray
    roots: np.ndarray

    @classmethod
    def build(cls, trees: list[Tree]) -> "_FlatForest":
        sizes = [t.node_count() for t in trees]
        offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(np.int64)
        return cls(
            feature=np.concatenate([t.feature for t in trees]).astype(np.int64),
            left=np.concatenate(
                [t.left + off for t, off in zip(trees, offsets)]
            ).astype(np.int64),
            right=np.concatenate(
                [t.right + off for t, off in zip(trees, offsets)]
            ).astype(np.int64),
            dist=np.concatenate([t.dist for t in trees]),
            roots=offsets,
        )


def train_forest(
    x: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    n_trees: int = 100,
    seed: int = 0,
) -> Forest:
    """Grow ``n_trees`` bootstrap trees over a dense bool feature matrix.

    Deterministic for fixed inputs and seed: every bootstrap draw and
    candidate-feature sample comes from a per-tree child of one seed
    sequence.
    """
    n, n_features = x.shape
    if len(np.unique(y)) < 2:
        raise CannotTrainError("training set holds a single category")
    m_try = min(n_features, math.ceil(math.sqrt(n_features)))
    root_ss = np.random.SeedSequence(seed % (2**64))
    trees = [
        _grow_tree(x, y, n_classes, m_try, np.random.default_rng(child))
        for child in root_ss.spawn(n_trees)
    ]
    return Forest(trees=trees, n_classes=n_classes, n_features=n_features, seed=seed)


def bootstrap_indices(rng: np.random.Generator, n: int) -> np.ndarray:
    """One bootstrap draw: n indices sampled with replacement from [0, n)."""
    return rng.integers(0, n, size=n)


def _grow_tree(
    x: np.ndarray, y: np.ndarray, n_classes: int, m_try: int, rng: np.random.Generator
) -> Tree:
    n, n_features = x.shape
    boot = bootstrap_indices(rng, n)
    xb = x[boot]
    yb = y[boot].astype(np.int64)
    # float32 copies let split counting run as one small matmul per node;
    # counts stay exact (integers far below 2**24)
    xb_f = xb.astype(np.float32)
    onehot = np.zeros((n_classes, n), dtype=np.float32)
    onehot[yb, np.arange(n)] = 1.0

    feature: list[int] = []
    left: list[int] = []
    right: list[int] = []
    dists: list[np.ndarray] = []

    def alloc() -> int:
        feature.append(-1)
        left.append(-1)
        right.append(-1)
        dists.append(np.zeros(n_classes))
        return len(feature) - 1

    stack: list[tuple[np.ndarray, int]] = [(np.arange(n), alloc())]
    while stack:
        samples, node = stack.pop()
        counts = np.bincount(yb[samples], minlength=n_classes)
        n_node = samples.size
        split = None
        if n_node >= 2 and counts.max() < n_node:
            split = _best_split(xb, xb_f, onehot, samples, counts, n_node, m_try, rng)
        if split is None:
            dists[node] = counts / n_node
            continue
        feat_idx, mask = split
        feature[node] = feat_idx
        left[node] = alloc()
        right[node] = alloc()
        stack.append((samples[~mask], left[node]))
        stack.append((samples[mask], right[node]))

    return Tree(
        feature=np.asarray(feature, dtype=np.int32),
        left=np.asarray(left, dtype=np.int32),
        right=np.asarray(right, dtype=np.int32),
        dist=np.vstack(dists),
    )


def _best_split(
    xb: np.ndarray,
    xb_f: np.ndarray,
    onehot: np.ndarray,
    samples: np.ndarray,
    counts: np.ndarray,
    n_node: int,
    m_try: int,
    rng: np.random.Generator,
) -> tuple[int, np.ndarray] | None:
    candidates = rng.choice(xb.shape[1], size=m_try, replace=False)
    xc = xb_f.take(samples, axis=0).take(candidates, axis=1)  # (n_node, m_try)
    counts_right = (onehot.take(samples, axis=1) @ xc).astype(np.float64)  # (C, m_try)
    n_right = counts_right.sum(axis=0)
    n_left = n_node - n_right
    counts_left = counts[:, None] - counts_right

    gini_parent = 1.0 - ((counts / n_node) ** 2).sum()
    safe_r = np.where(n_right > 0, n_right, 1.0)
    safe_l = np.where(n_left > 0, n_left, 1.0)
    gini_r = 1.0 - (counts_right**2).sum(axis=0) / (safe_r**2)
    gini_l = 1.0 - (counts_left**2).sum(axis=0) / (safe_l**2)
    decrease = gini_parent - (n_left * gini_l + n_right * gini_r) / n_node
    decrease[(n_right == 0) | (n_left == 0)] = -np.inf

    best = int(np.argmax(decrease))
    if decrease[best] <= _MIN_GINI_DECREASE:
        return None
    feat = int(candidates[best])
    return feat, xb[samples, feat]

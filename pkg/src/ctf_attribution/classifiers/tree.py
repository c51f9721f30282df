"""Entropy-based binary decision trees."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from ._base import AttributionClassifier, collapse_rows
from ._kernels import best_split_kernel, varying_features

# below this, a gain is treated as rounding noise
MIN_GAIN = 1e-12
# cap on the (rows x features x classes) scratch tensor used by split search
_SCRATCH_ELEMENTS = 2_000_000


def entropy(counts) -> float:
    """Shannon entropy in bits of a vector of class counts."""
    c = np.asarray(counts, dtype=np.float64)
    n = c.sum()
    if n <= 0:
        return 0.0
    p = c[c > 0] / n
    return float(-(p * np.log2(p)).sum())


def _xlog2x(a: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(a > 0, a * np.log2(np.where(a > 0, a, 1.0)), 0.0)


def _child_cost(counts: np.ndarray) -> np.ndarray:
    """n*H(counts) over the last axis: n log n - sum c log c."""
    n = counts.sum(axis=-1)
    return _xlog2x(n) - _xlog2x(counts).sum(axis=-1)


def best_split(X: np.ndarray, W: np.ndarray, features: np.ndarray):
    """Highest-gain (feature, threshold) among ``features``.

    ``X`` holds the distinct rows reaching the node and ``W`` their class
    counts.  Thresholds are midpoints between consecutive distinct values.
    Ties prefer the lower feature index, then the lower threshold.  Returns
    ``(gain, feature, threshold)`` or ``None`` when nothing has positive gain.
    This vectorised version is the reference for the compiled kernel that
    ``grow_tree`` uses.
    """
    n, n_classes = W.shape
    if n < 2 or len(features) == 0:
        return None
    parent = W.sum(axis=0)
    total = parent.sum()
    h_parent = entropy(parent)
    best = None
    step = max(1, _SCRATCH_ELEMENTS // (n * n_classes))
    for start in range(0, len(features), step):
        feats = features[start:start + step]
        xs = X[:, feats]
        order = np.argsort(xs, axis=0, kind="stable")
        xs_sorted = np.take_along_axis(xs, order, axis=0)
        left = np.cumsum(W[order], axis=0)[:-1]          # (n-1, m, C)
        right = parent - left
        cost = _child_cost(left) + _child_cost(right)
        gain = h_parent - cost / total
        valid = xs_sorted[1:] > xs_sorted[:-1]
        gain = np.where(valid, gain, -np.inf)
        flat = gain.T.reshape(-1)                        # feature-major
        k = int(np.argmax(flat))
        g = flat[k]
        if g <= MIN_GAIN or (best is not None and g <= best[0]):
            continue
        j, pos = divmod(k, n - 1)
        lo = xs_sorted[pos, j]
        hi = xs_sorted[pos + 1, j]
        thr = (lo + hi) / 2.0
        if not lo <= thr < hi:
            thr = lo
        best = (float(g), int(feats[j]), float(thr))
    return best


@dataclass
class Tree:
    """Flat array representation; ``feature == -1`` marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray       # (n_nodes, n_classes) training counts per node
    gain: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def n_node_samples(self) -> np.ndarray:
        return self.value.sum(axis=1)

    def is_leaf(self, node: int) -> bool:
        return self.feature[node] < 0

    def iter_splits(self) -> Iterator[int]:
        return iter(np.flatnonzero(self.feature >= 0).tolist())

    def apply(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(len(X), dtype=np.intp)
        while True:
            f = self.feature[node]
            active = np.flatnonzero(f >= 0)
            if len(active) == 0:
                return node
            cur = node[active]
            go_left = X[active, f[active]] <= self.threshold[cur]
            node[active] = np.where(go_left, self.left[cur], self.right[cur])

    def leaf_distribution(self, X: np.ndarray) -> np.ndarray:
        v = self.value[self.apply(X)]
        return v / v.sum(axis=1, keepdims=True)

    def to_dict(self) -> dict:
        return {k: getattr(self, k).tolist() for k in
                ("feature", "threshold", "left", "right", "value", "gain")}

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        return cls(
            feature=np.asarray(d["feature"], dtype=np.intp),
            threshold=np.asarray(d["threshold"], dtype=np.float64),
            left=np.asarray(d["left"], dtype=np.intp),
            right=np.asarray(d["right"], dtype=np.intp),
            value=np.asarray(d["value"], dtype=np.float64).reshape(len(d["feature"]), -1),
            gain=np.asarray(d["gain"], dtype=np.float64),
        )


FeatureChooser = Callable[[np.ndarray], np.ndarray]


def grow_tree(X: np.ndarray, W: np.ndarray, min_node_size: float,
              choose_features: FeatureChooser | None = None) -> Tree:
    """Greedy information-gain tree over distinct rows ``X`` with class counts ``W``.

    A node becomes a leaf when it is pure, holds fewer than
    ``min_node_size`` samples, or admits no positive-gain split.
    ``choose_features`` receives the indices of features that vary within
    the node and returns the subset to search (all of them by default).
    """
    feature, threshold, left, right, value, gains = [], [], [], [], [], []

    def new_node(counts):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(counts)
        gains.append(0.0)
        return len(feature) - 1

    X = np.ascontiguousarray(X, dtype=np.float64)
    W = np.ascontiguousarray(W, dtype=np.float64)
    root = new_node(W.sum(axis=0))
    stack = [(root, np.arange(len(X), dtype=np.int64))]
    while stack:
        node, rows = stack.pop()
        counts = value[node]
        if np.count_nonzero(counts) <= 1 or counts.sum() < min_node_size:
            continue
        varying = varying_features(X, rows)
        if choose_features is not None:
            varying = np.asarray(choose_features(varying), dtype=np.int64)
        if len(varying) == 0:
            continue
        g, f, thr = best_split_kernel(X, W, rows, varying, MIN_GAIN)
        if f < 0:
            continue
        go_left = X[rows, f] <= thr
        lrows, rrows = rows[go_left], rows[~go_left]
        feature[node], threshold[node], gains[node] = f, thr, g
        left[node] = new_node(W[lrows].sum(axis=0))
        right[node] = new_node(W[rrows].sum(axis=0))
        # right first so the left subtree gets the lower node ids
        stack.append((right[node], rrows))
        stack.append((left[node], lrows))

    return Tree(
        feature=np.asarray(feature, dtype=np.intp),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.intp),
        right=np.asarray(right, dtype=np.intp),
        value=np.asarray(value, dtype=np.float64).reshape(len(feature), W.shape[1]),
        gain=np.asarray(gains, dtype=np.float64),
    )


def min_samples_for_split(n_train: float, min_node_fraction: float) -> int:
    return max(1, math.ceil(min_node_fraction * n_train - 1e-9))


class DecisionTreeClassifier(AttributionClassifier):
    """Binary tree grown by maximum information gain.

    Parameters
    ----------
    min_node_fraction : float
        Nodes holding fewer than this fraction of the training samples are
        not split further.
    random_state : int or None
        Unused by the deterministic builder; recorded with the model.
    """

    kind = "DT"

    def __init__(self, min_node_fraction=0.001, random_state=None):
        self.min_node_fraction = min_node_fraction
        self.random_state = random_state

    def fit(self, X, y, sample_weight=None):
        X, y_idx = self._validate_training(X, y)
        U, W = collapse_rows(X, y_idx, len(self.classes_), sample_weight)
        self.n_train_ = float(W.sum())
        self.tree_ = grow_tree(U, W, self.min_node_fraction * self.n_train_)
        return self

    def predict_scores(self, X):
        X = self._validate_input(X)
        return self.tree_.leaf_distribution(X)

    def _export_parameters(self):
        return {"n_train": self.n_train_, "tree": self.tree_.to_dict()}

    def _import_parameters(self, params):
        self.n_train_ = params["n_train"]
        self.tree_ = Tree.from_dict(params["tree"])

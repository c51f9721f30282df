"""Bagged ensemble of entropy trees with per-node feature subsampling."""

from __future__ import annotations

import math

import numpy as np
from joblib import Parallel, delayed

from ._base import AttributionClassifier
from .tree import Tree, grow_tree


def _grow_member(U, inverse, y_idx, n_classes, seed_seq, bootstrap, mtry, min_node_fraction):
    rng = np.random.default_rng(seed_seq)
    n = len(y_idx)
    if bootstrap:
        weights = np.bincount(rng.integers(0, n, size=n), minlength=n).astype(np.float64)
    else:
        weights = np.ones(n)
    W = np.zeros((len(U), n_classes))
    np.add.at(W, (inverse, y_idx), weights)
    keep = W.sum(axis=1) > 0
    Uk, Wk = U[keep], W[keep]

    def choose(varying):
        if len(varying) <= mtry:
            return varying
        return np.sort(rng.choice(varying, size=mtry, replace=False))

    return grow_tree(Uk, Wk, min_node_fraction * weights.sum(), choose)


class RandomForestClassifier(AttributionClassifier):
    """Majority vote over bootstrapped entropy trees.

    At every node a fresh random subset of ``mtry`` features is searched,
    drawn from the features that still vary within the node.  Tree ``i``
    draws from the ``i``-th child of ``SeedSequence(random_state)``, so the
    fitted model does not depend on ``n_jobs``.
    """

    kind = "RF"

    def __init__(self, n_trees=100, mtry=None, bootstrap=True, min_node_fraction=0.001,
                 random_state=0, n_jobs=None):
        self.n_trees = n_trees
        self.mtry = mtry
        self.bootstrap = bootstrap
        self.min_node_fraction = min_node_fraction
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, X, y):
        X, y_idx = self._validate_training(X, y)
        if self.n_trees < 1:
            raise ValueError("n_trees must be at least 1")
        d = X.shape[1]
        self.mtry_ = int(self.mtry) if self.mtry is not None else max(1, math.isqrt(d))
        U, inverse = np.unique(X, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        seeds = np.random.SeedSequence(self.random_state).spawn(self.n_trees)
        jobs = (delayed(_grow_member)(U, inverse, y_idx, len(self.classes_), s,
                                      self.bootstrap, self.mtry_, self.min_node_fraction)
                for s in seeds)
        self.trees_ = list(Parallel(n_jobs=self.n_jobs)(jobs))
        return self

    def predict_scores(self, X):
        """Vote counts per class."""
        X = self._validate_input(X)
        votes = np.zeros((len(X), len(self.classes_)))
        rows = np.arange(len(X))
        for tree in self.trees_:
            # a tree votes for the top class of its leaf, ties to the lowest index
            choice = np.argmax(tree.value[tree.apply(X)], axis=1)
            np.add.at(votes, (rows, choice), 1.0)
        return votes

    def _export_parameters(self):
        return {"mtry": self.mtry_, "trees": [t.to_dict() for t in self.trees_]}

    def _import_parameters(self, params):
        self.mtry_ = params["mtry"]
        self.trees_ = [Tree.from_dict(t) for t in params["trees"]]

"""One-vs-rest linear max-margin classifier trained with Pegasos."""

from __future__ import annotations

import numpy as np

from ._base import AttributionClassifier
from ._kernels import pegasos_epoch


def svm_objective(W: np.ndarray, Xa: np.ndarray, Ypm: np.ndarray, lam: float) -> float:
    """Sum over the one-vs-rest problems of lam/2 |w|^2 + mean hinge loss."""
    margins = (Xa @ W.T) * Ypm
    hinge = np.maximum(0.0, 1.0 - margins).mean(axis=0)
    return float((0.5 * lam * (W * W).sum(axis=1) + hinge).sum())


class LinearSVMClassifier(AttributionClassifier):
    """Linear one-vs-rest SVM.

    Each binary problem minimises ``lam/2 |w|^2 + mean(hinge)`` with
    ``lam = 1 / (c * n_samples)``, the primal form equivalent to penalty
    ``c`` on the summed slack.  Stochastic subgradient steps of size
    ``1 / (lam t)`` are taken over a seeded permutation per epoch, with the
    norm projection of Pegasos.  After every epoch the running average of
    all iterates is scored on the training objective, and the model is the
    best such average seen (subgradient steps are not descent steps, so the
    last average is not always the best one).  ``raw_objective_history_``
    holds the per-epoch scores and ``objective_history_`` the best-so-far
    values.  A constant feature supplies the (regularised) bias.

    Convergence depends on the number of steps, not passes, so small
    training sets get extra epochs until at least ``min_steps`` steps are
    taken (``n_epochs_`` records the count used).
    """

    kind = "SVM"

    def __init__(self, c=1.0, epochs=10, min_steps=1000, random_state=0):
        self.c = c
        self.epochs = epochs
        self.min_steps = min_steps
        self.random_state = random_state

    def fit(self, X, y):
        X, y_idx = self._validate_training(X, y)
        n, d = X.shape
        n_classes = len(self.classes_)
        if self.c <= 0:
            raise ValueError("c must be positive")
        lam = 1.0 / (self.c * n)
        Xa = np.hstack([X, np.ones((n, 1))])
        Ypm = -np.ones((n, n_classes))
        Ypm[np.arange(n), y_idx] = 1.0
        radius = 1.0 / np.sqrt(lam)
        rng = np.random.default_rng(self.random_state)

        W = np.zeros((n_classes, d + 1))
        total = np.zeros_like(W)
        t = 0
        best, best_obj = W.copy(), svm_objective(W, Xa, Ypm, lam)
        self.raw_objective_history_ = []
        self.objective_history_ = []
        self.n_epochs_ = max(self.epochs, -(-self.min_steps // n))
        for _ in range(self.n_epochs_):
            t = pegasos_epoch(W, total, Xa, Ypm, rng.permutation(n), lam, t, radius)
            avg = total / t
            obj = svm_objective(avg, Xa, Ypm, lam)
            self.raw_objective_history_.append(obj)
            if obj < best_obj:
                best, best_obj = avg, obj
            self.objective_history_.append(best_obj)
        avg = best
        self.lam_ = lam
        self.coef_ = avg[:, :-1].copy()
        self.intercept_ = avg[:, -1].copy()
        return self

    def decision_function(self, X):
        X = self._validate_input(X)
        return X @ self.coef_.T + self.intercept_

    def predict_scores(self, X):
        """Raw one-vs-rest margins."""
        return self.decision_function(X)

    def _export_parameters(self):
        return {"coef": self.coef_.tolist(), "intercept": self.intercept_.tolist(), "lam": self.lam_}

    def _import_parameters(self, params):
        self.coef_ = np.asarray(params["coef"], dtype=np.float64).reshape(len(self.classes_), -1)
        self.intercept_ = np.asarray(params["intercept"], dtype=np.float64)
        self.lam_ = params["lam"]

"""Multinomial logistic regression fitted by full-batch gradient descent."""

from __future__ import annotations

import numpy as np
from scipy.special import softmax

from ..exceptions import NonFiniteLossError
from ._base import AttributionClassifier, collapse_rows


def multinomial_loss_grad(coef, intercept, X, Y, sample_weight, l2):
    """L2-regularised mean cross-entropy and its gradient.

    ``coef`` is (n_features, n_classes - 1) and ``intercept`` (n_classes - 1,);
    the last class has its parameters fixed at zero.  ``Y`` is a one-hot (or
    count) matrix over all classes.  The intercept is not penalised.
    """
    n_free = coef.shape[1]
    logits = np.zeros((X.shape[0], n_free + 1))
    logits[:, :n_free] = X @ coef + intercept
    shifted = logits - logits.max(axis=1, keepdims=True)
    E = np.exp(shifted)
    norm = E.sum(axis=1)
    lse = logits.max(axis=1) + np.log(norm)
    total = sample_weight.sum()
    loss = (sample_weight * (lse - (Y * logits).sum(axis=1))).sum() / total
    loss += 0.5 * l2 * float((coef * coef).sum())
    P = E / norm[:, None]
    R = (P - Y)[:, :n_free] * (sample_weight / total)[:, None]
    return loss, X.T @ R + l2 * coef, R.sum(axis=0)


class LogisticRegressionClassifier(AttributionClassifier):
    """Softmax classifier.

    Minimises the L2-regularised multinomial cross-entropy by gradient
    descent with a backtracking (Armijo) step.  Stops when the gradient
    norm falls below ``tol`` or after ``max_epochs`` full passes.
    """

    kind = "LOGREG"

    def __init__(self, l2=1e-4, max_epochs=1000, tol=1e-6, random_state=None):
        self.l2 = l2
        self.max_epochs = max_epochs
        self.tol = tol
        self.random_state = random_state

    def fit(self, X, y):
        X, y_idx = self._validate_training(X, y)
        n_classes = len(self.classes_)
        # identical rows share one weighted term in the objective
        U, counts = collapse_rows(X, y_idx, n_classes)
        weight = counts.sum(axis=1)
        Y = counts / weight[:, None]
        d = X.shape[1]
        coef = np.zeros((d, n_classes - 1))
        intercept = np.zeros(n_classes - 1)
        step = 1.0
        loss, g_coef, g_int = multinomial_loss_grad(coef, intercept, U, Y, weight, self.l2)
        self.loss_history_ = [loss]
        self.n_iter_ = 0
        for epoch in range(self.max_epochs):
            if not np.isfinite(loss):
                raise NonFiniteLossError(f"loss became {loss} at epoch {epoch}")
            gnorm2 = float((g_coef ** 2).sum() + (g_int ** 2).sum())
            if np.sqrt(gnorm2) < self.tol:
                break
            step *= 2.0
            while True:
                c_new = coef - step * g_coef
                i_new = intercept - step * g_int
                new = multinomial_loss_grad(c_new, i_new, U, Y, weight, self.l2)
                if new[0] <= loss - 0.5 * step * gnorm2 or step < 1e-12:
                    break
                step *= 0.5
            coef, intercept = c_new, i_new
            loss, g_coef, g_int = new
            self.loss_history_.append(loss)
            self.n_iter_ = epoch + 1
        if not np.isfinite(loss):
            raise NonFiniteLossError(f"loss became {loss}")
        self.coef_ = np.hstack([coef, np.zeros((d, 1))])
        self.intercept_ = np.append(intercept, 0.0)
        return self

    def decision_function(self, X):
        X = self._validate_input(X)
        return X @ self.coef_ + self.intercept_

    def predict_scores(self, X):
        """Class probabilities."""
        return softmax(self.decision_function(X), axis=1)

    def _export_parameters(self):
        return {"coef": self.coef_.tolist(), "intercept": self.intercept_.tolist(),
                "n_iter": self.n_iter_}

    def _import_parameters(self, params):
        self.coef_ = np.asarray(params["coef"], dtype=np.float64).reshape(self.n_features_in_, -1)
        self.intercept_ = np.asarray(params["intercept"], dtype=np.float64)
        self.n_iter_ = params.get("n_iter", 0)

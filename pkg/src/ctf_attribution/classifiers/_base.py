from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ..exceptions import DimensionMismatchError, EmptyTrainingSetError


def lexicographic_argmax(scores: np.ndarray) -> np.ndarray:
    """Row-wise argmax; ties go to the lowest column.

    Columns follow ``classes_``, which is sorted, so the lowest column is the
    lexicographically smallest team.
    """
    return np.argmax(scores, axis=1)


def collapse_rows(X: np.ndarray, y: np.ndarray, n_classes: int,
                  sample_weight: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Merge identical feature rows.

    Returns the distinct rows and, per row, the (weighted) count of each
    class.  Attack corpora repeat payloads heavily, so this shrinks the
    working set without changing any count-based statistic.
    """
    uniq, inverse = np.unique(X, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    counts = np.zeros((len(uniq), n_classes))
    w = np.ones(len(y)) if sample_weight is None else sample_weight
    np.add.at(counts, (inverse, y), w)
    keep = counts.sum(axis=1) > 0
    return uniq[keep], counts[keep]


class AttributionClassifier(ClassifierMixin, BaseEstimator):
    """Common fit/predict plumbing for the team classifiers."""

    kind: str = ""

    def _validate_training(self, X, y):
        if X is None or len(X) == 0:
            raise EmptyTrainingSetError("no training samples")
        X, y = check_X_y(X, y, dtype=np.float64)
        self.classes_, y_idx = np.unique(y, return_inverse=True)
        self.n_features_in_ = X.shape[1]
        return X, y_idx.reshape(-1)

    def _validate_input(self, X):
        check_is_fitted(self, "classes_")
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.ndim != 2 or X.shape[1] != self.n_features_in_:
            raise DimensionMismatchError(
                f"expected {self.n_features_in_} features, got shape {X.shape}")
        return check_array(X, dtype=np.float64)

    def predict_scores(self, X) -> np.ndarray:
        raise NotImplementedError

    def predict(self, X):
        scores = self.predict_scores(X)
        return self.classes_[lexicographic_argmax(scores)]

    def predict_one(self, x) -> tuple[str, dict[str, float]]:
        """Label for a single vector together with its per-class scores."""
        scores = self.predict_scores(np.asarray(x, dtype=np.float64).reshape(1, -1))[0]
        label = self.classes_[int(np.argmax(scores))]
        return label, {str(c): float(s) for c, s in zip(self.classes_, scores)}

    # serialization hooks, see persistence.py
    def _export_parameters(self) -> dict:
        raise NotImplementedError

    def _import_parameters(self, params: dict) -> None:
        raise NotImplementedError

"""Attacker classifiers with a scikit-learn compatible interface."""

from .forest import RandomForestClassifier
from .logistic import LogisticRegressionClassifier, multinomial_loss_grad
from .persistence import KINDS, load_model, model_from_dict, model_to_dict, save_model
from .svm import LinearSVMClassifier
from .tree import DecisionTreeClassifier, Tree, entropy

METHODS = {
    "dt": DecisionTreeClassifier,
    "rf": RandomForestClassifier,
    "logreg": LogisticRegressionClassifier,
    "svm": LinearSVMClassifier,
}


def make_classifier(method: str, seed: int = 0, **overrides):
    """Classifier for a short method name with its default hyperparameters."""
    try:
        cls = METHODS[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}; choose from {sorted(METHODS)}") from None
    params = {"random_state": seed}
    params.update({k: v for k, v in overrides.items() if k in cls().get_params()})
    return cls(**params)


__all__ = [
    "DecisionTreeClassifier", "KINDS", "LinearSVMClassifier", "LogisticRegressionClassifier",
    "METHODS", "RandomForestClassifier", "Tree", "entropy", "load_model", "make_classifier",
    "model_from_dict", "model_to_dict", "multinomial_loss_grad", "save_model",
]

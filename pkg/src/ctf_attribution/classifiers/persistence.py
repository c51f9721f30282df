"""JSON container for trained classifiers.

Floats are written with ``repr`` precision, so a save/load round trip
reproduces every parameter bit for bit.
"""

from __future__ import annotations

import json

import numpy as np

from .forest import RandomForestClassifier
from .logistic import LogisticRegressionClassifier
from .svm import LinearSVMClassifier
from .tree import DecisionTreeClassifier

FORMAT = "ctf-attribution-model"
VERSION = 1

KINDS = {cls.kind: cls for cls in (DecisionTreeClassifier, RandomForestClassifier,
                                  LogisticRegressionClassifier, LinearSVMClassifier)}


def model_to_dict(model) -> dict:
    params = model.get_params()
    return {
        "format": FORMAT,
        "version": VERSION,
        "kind": model.kind,
        "classes": [str(c) for c in model.classes_],
        "n_features": int(model.n_features_in_),
        "hyperparameters": params,
        "seed": params.get("random_state"),
        "parameters": model._export_parameters(),
    }


def model_from_dict(d: dict):
    if d.get("format") != FORMAT:
        raise ValueError("not a serialized attribution model")
    if d.get("version") != VERSION:
        raise ValueError(f"unsupported model version {d.get('version')}")
    cls = KINDS[d["kind"]]
    model = cls(**d["hyperparameters"])
    model.classes_ = np.array(d["classes"], dtype=object)
    model.n_features_in_ = d["n_features"]
    model._import_parameters(d["parameters"])
    return model


def save_model(model, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(model_to_dict(model), f)


def load_model(path):
    with open(path, encoding="utf-8") as f:
        return model_from_dict(json.load(f))

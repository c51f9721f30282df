"""Per-target temporal evaluation of attacker classifiers.

For every target team the attacks are ordered by time and split into a
leading training slice and a trailing test slice.  Pruning touches the
training slice only; every pruning strategy sees the same test slice.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import IO, Iterable, NamedTuple, Sequence

import numpy as np
from joblib import Parallel, delayed

from .classifiers import make_classifier
from .deception import AnnotatedEvent, annotate
from .events import AttackEvent
from .exceptions import AttributionError, DimensionMismatchError, TooFewEventsError
from .features import build_feature_space, vectorize_many
from .pruning import PruningStrategy, prune

log = logging.getLogger(__name__)

UNSEEN_PAYLOAD = "unseen_payload"
NONDECEPTIVE_MISATTRIBUTED = "nondeceptive_misattributed"
DECEPTIVE_MISATTRIBUTED = "deceptive_misattributed"
SOURCES = (UNSEEN_PAYLOAD, NONDECEPTIVE_MISATTRIBUTED, DECEPTIVE_MISATTRIBUTED)


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.9

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie strictly between 0 and 1")

    def n_train(self, n: int) -> int:
        frac = Fraction(self.train_fraction).limit_denominator(10**9)
        return math.floor(frac * n)


def time_order_key(ev: AttackEvent):
    return (ev.time, ev.from_team, ev.payload_hash)


def temporal_split(events: Sequence[AttackEvent], spec: SplitSpec = SplitSpec()):
    """(train, test) with the first ``floor(f * N)`` events in time order as train."""
    if len(events) < 2:
        raise TooFewEventsError(f"need at least 2 events to split, got {len(events)}")
    ordered = sorted(events, key=time_order_key)
    n_train = spec.n_train(len(ordered))
    if n_train == 0 or n_train == len(ordered):
        raise TooFewEventsError(f"{len(ordered)} events leave an empty train or test slice")
    return ordered[:n_train], ordered[n_train:]


class EvalResult(NamedTuple):
    accuracy: float
    labels: list[str]
    confusion: np.ndarray  # rows: true label, columns: predicted label

    @property
    def n_correct(self) -> int:
        return int(np.trace(self.confusion))

    @property
    def n_test(self) -> int:
        return int(self.confusion.sum())


def confusion_from_predictions(y_true, y_pred, classes=()) -> EvalResult:
    labels = sorted(set(map(str, y_true)) | set(map(str, y_pred)) | set(map(str, classes)))
    index = {c: i for i, c in enumerate(labels)}
    conf = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for t, p in zip(y_true, y_pred):
        conf[index[str(t)], index[str(p)]] += 1
    n = conf.sum()
    acc = float(np.trace(conf) / n) if n else float("nan")
    return EvalResult(acc, labels, conf)


def evaluate(model, X, y) -> EvalResult:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features_in_:
        raise DimensionMismatchError(f"model expects {model.n_features_in_} features, got {X.shape}")
    return confusion_from_predictions(y, model.predict(X), model.classes_)


def misclassification_breakdown(predictions, test_annotated: Sequence[AnnotatedEvent],
                                train_hashes) -> dict[str, int]:
    """Attribute each wrong prediction to exactly one source.

    Unseen payloads take precedence; otherwise the event's deception role
    decides.  Roles must come from annotating the full timeline.
    """
    out = dict.fromkeys(SOURCES, 0)
    for pred, (ev, ann) in zip(predictions, test_annotated):
        if pred == ev.from_team:
            continue
        if ev.payload_hash not in train_hashes:
            out[UNSEEN_PAYLOAD] += 1
        elif ann.role.deceptive:
            out[DECEPTIVE_MISATTRIBUTED] += 1
        else:
            out[NONDECEPTIVE_MISATTRIBUTED] += 1
    return out


def random_guess_accuracy(n_classes: int, n_draws: int, seed: int = 0) -> float:
    """Accuracy of uniform guessing against uniformly drawn true labels."""
    rng = np.random.default_rng(seed)
    truth = rng.integers(0, n_classes, size=n_draws)
    guess = rng.integers(0, n_classes, size=n_draws)
    return float((truth == guess).mean())


@dataclass
class CellResult:
    target: str
    method: str
    strategy: str
    n_train: int = 0
    n_test: int = 0
    accuracy: float | None = None
    labels: list[str] = field(default_factory=list)
    confusion: list[list[int]] = field(default_factory=list)
    breakdown: dict[str, int] = field(default_factory=dict)
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    @property
    def n_misclassified(self) -> int:
        return self.n_test - int(np.trace(np.asarray(self.confusion))) if self.confusion else 0


@dataclass
class TargetRun:
    target: str
    n_events: int
    train_times: tuple
    test_times: tuple
    test_fingerprint: dict[str, tuple]
    prune_counts: dict[str, tuple[int, int]]
    cells: list[CellResult]


@dataclass
class ExperimentReport:
    methods: list[str]
    strategies: list[str]
    train_fraction: float
    seed: int
    targets: list[TargetRun]

    @property
    def cells(self) -> list[CellResult]:
        return [c for t in self.targets for c in t.cells]

    def averages(self) -> dict[str, dict[str, float | None]]:
        out: dict[str, dict[str, float | None]] = {}
        for m in self.methods:
            out[m] = {}
            for s in self.strategies:
                accs = [c.accuracy for c in self.cells if c.method == m and c.strategy == s and c.ok]
                out[m][s] = float(np.mean(accs)) if accs else None
        return out

    def breakdown_totals(self, method: str, strategy: str) -> dict[str, int]:
        tot = Counter()
        for c in self.cells:
            if c.method == method and c.strategy == strategy and c.ok:
                tot.update(c.breakdown)
        return {s: tot[s] for s in SOURCES}

    def failed(self) -> list[CellResult]:
        return [c for c in self.cells if not c.ok]


def _fingerprint(events: Sequence[AttackEvent]) -> tuple:
    return tuple((ev.time.isoformat(), ev.from_team, ev.payload_hash) for ev in events)


def _run_target(target, events, methods, strategies, spec, seed, params) -> TargetRun:
    train, test = temporal_split(events, spec)
    full = annotate(train + test)
    test_annotated = full[len(train):]
    train_annotated = annotate(train)
    cells: list[CellResult] = []
    prune_counts: dict[str, tuple[int, int]] = {}
    fingerprints: dict[str, tuple] = {}
    for strategy in strategies:
        pruned = prune(train_annotated, strategy)
        prune_counts[strategy.label] = (len(train), len(pruned))
        fingerprints[strategy.label] = _fingerprint(test)
        try:
            space = build_feature_space(pruned, normalize=params.get("normalize", True))
            X_train, y_train = vectorize_many(pruned, space)
            X_test, y_test = vectorize_many(test, space)
        except AttributionError as exc:
            for m in methods:
                cells.append(CellResult(target, m, strategy.label, len(pruned), len(test),
                                        error=f"{type(exc).__name__}: {exc}"))
            continue
        train_hashes = {ev.payload_hash for ev in pruned}
        for m in methods:
            cell = CellResult(target, m, strategy.label, len(pruned), len(test))
            try:
                model = make_classifier(m, seed=seed, **params).fit(X_train, y_train)
                pred = model.predict(X_test)
                res = confusion_from_predictions(y_test, pred, model.classes_)
                cell.accuracy = res.accuracy
                cell.labels = res.labels
                cell.confusion = res.confusion.tolist()
                cell.breakdown = misclassification_breakdown(pred, test_annotated, train_hashes)
            except (AttributionError, ValueError, ArithmeticError) as exc:
                log.warning("cell %s/%s/%s failed: %s", target, m, strategy.label, exc)
                cell.error = f"{type(exc).__name__}: {exc}"
            cells.append(cell)
    return TargetRun(
        target=target,
        n_events=len(events),
        train_times=(train[0].time, train[-1].time),
        test_times=(test[0].time, test[-1].time),
        test_fingerprint=fingerprints,
        prune_counts=prune_counts,
        cells=cells,
    )


def run_experiment_matrix(events: Iterable[AttackEvent], methods: Sequence[str],
                          strategies: Sequence[PruningStrategy], spec: SplitSpec = SplitSpec(),
                          seed: int = 0, classifier_params: dict | None = None,
                          n_jobs: int | None = None) -> ExperimentReport:
    """Split, prune, train and score every (target, method, strategy) cell.

    Targets are independent and may run in parallel; the report does not
    depend on ``n_jobs``.
    """
    by_target: dict[str, list[AttackEvent]] = {}
    for ev in events:
        by_target.setdefault(ev.to_team, []).append(ev)
    if len(by_target) < 2:
        raise TooFewEventsError(f"need at least 2 target teams, got {len(by_target)}")
    params = dict(classifier_params or {})
    targets = sorted(by_target)

    def job(t):
        try:
            return _run_target(t, by_target[t], methods, strategies, spec, seed, params)
        except TooFewEventsError as exc:
            cells = [CellResult(t, m, s.label, error=f"{type(exc).__name__}: {exc}")
                     for s in strategies for m in methods]
            return TargetRun(t, len(by_target[t]), (), (), {}, {}, cells)

    runs = list(Parallel(n_jobs=n_jobs)(delayed(job)(t) for t in targets))
    return ExperimentReport(list(methods), [s.label for s in strategies],
                            spec.train_fraction, seed, runs)


# -- report files -----------------------------------------------------------

def _fmt(x: float | None) -> str:
    return "" if x is None else f"{x:.6f}"


def write_report_csv(report: ExperimentReport, out: IO[str]) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["to_team", "method", "strategy", "n_train", "n_test", "n_correct", "accuracy",
                *SOURCES, "error"])
    for c in report.cells:
        n_correct = int(np.trace(np.asarray(c.confusion))) if c.confusion else ""
        w.writerow([c.target, c.method, c.strategy, c.n_train, c.n_test, n_correct,
                    _fmt(c.accuracy), *(c.breakdown.get(s, "") for s in SOURCES), c.error or ""])


def write_team_table_csv(report: ExperimentReport, out: IO[str]) -> None:
    """Accuracy per target team, one column per (method, strategy)."""
    cols = [(m, s) for m in report.methods for s in report.strategies]
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["to_team"] + [f"{m}:{s}" for m, s in cols])
    for run in report.targets:
        acc = {(c.method, c.strategy): c.accuracy for c in run.cells}
        w.writerow([run.target] + [_fmt(acc.get(col)) for col in cols])
    avg = report.averages()
    w.writerow(["average"] + [_fmt(avg[m][s]) for m, s in cols])


def write_fig3_csv(report: ExperimentReport, out: IO[str], strategy: str | None = None) -> None:
    """Per-team accuracy of each method without pruning (or the first strategy run)."""
    strategy = strategy or ("none" if "none" in report.strategies else report.strategies[0])
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["to_team"] + list(report.methods))
    for run in report.targets:
        acc = {c.method: c.accuracy for c in run.cells if c.strategy == strategy}
        w.writerow([run.target] + [_fmt(acc.get(m)) for m in report.methods])


def write_fig4_csv(report: ExperimentReport, out: IO[str], strategy: str | None = None) -> None:
    """Per-team misclassification sources for each method."""
    strategy = strategy or ("none" if "none" in report.strategies else report.strategies[0])
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["to_team", "method", *SOURCES])
    for run in report.targets:
        for c in run.cells:
            if c.strategy == strategy and c.ok:
                w.writerow([c.target, c.method, *(c.breakdown[s] for s in SOURCES)])


def write_prune_report_csv(report: ExperimentReport, out: IO[str]) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["to_team", "strategy", "train_before", "train_after"])
    for run in report.targets:
        for s, (before, after) in run.prune_counts.items():
            w.writerow([run.target, s, before, after])


def summary_dict(report: ExperimentReport) -> dict:
    avgs = report.averages()
    return {
        "methods": report.methods,
        "strategies": report.strategies,
        "train_fraction": report.train_fraction,
        "seed": report.seed,
        "n_targets": len(report.targets),
        "averages": avgs,
        "misclassification_sources": {
            m: {s: report.breakdown_totals(m, s) for s in report.strategies} for m in report.methods},
        "failed_cells": [{"to_team": c.target, "method": c.method, "strategy": c.strategy,
                          "error": c.error} for c in report.failed()],
    }


def write_summary_json(report: ExperimentReport, out: IO[str]) -> None:
    json.dump(summary_dict(report), out, indent=2, sort_keys=True)
    out.write("\n")


def write_confusion_json(report: ExperimentReport, out: IO[str]) -> None:
    cells = [{"to_team": c.target, "method": c.method, "strategy": c.strategy,
              "labels": c.labels, "confusion": c.confusion} for c in report.cells if c.ok]
    json.dump(cells, out, separators=(",", ":"))
    out.write("\n")

"""Training-set pruning heuristics against deceptive duplicates.

Within each (target, payload) group only the events of selected attacker
teams are kept:

``p1``   all-but-majority: the single most frequent team
``p2:k`` all-but-K-majority: the ``k`` most frequent teams
``p3``   all-but-earliest: the group initiator
``p4``   all-but-most-recent: the team behind the latest event

Frequency ties rank the team whose first attack came earlier, then by name.
"""

from __future__ import annotations

import logging
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Sequence

from .deception import AnnotatedEvent, DeceptionAnnotation
from .events import AttackEvent
from .exceptions import UnannotatedEventsError

log = logging.getLogger(__name__)

NONE = "none"
ALL_BUT_MAJORITY = "p1"
ALL_BUT_K_MAJORITY = "p2"
ALL_BUT_EARLIEST = "p3"
ALL_BUT_MOST_RECENT = "p4"
DEFAULT_K = 3

_KINDS = (NONE, ALL_BUT_MAJORITY, ALL_BUT_K_MAJORITY, ALL_BUT_EARLIEST, ALL_BUT_MOST_RECENT)


@dataclass(frozen=True)
class PruningStrategy:
    kind: str = NONE
    k: int | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown pruning strategy {self.kind!r}")
        if self.kind == ALL_BUT_K_MAJORITY:
            if self.k is None or int(self.k) != self.k or self.k < 1:
                raise ValueError(f"all-but-K-majority needs an integer k >= 1, got {self.k!r}")
        elif self.k is not None:
            raise ValueError(f"strategy {self.kind} takes no k")

    @property
    def label(self) -> str:
        return f"{self.kind}:{self.k}" if self.kind == ALL_BUT_K_MAJORITY else self.kind

    def __str__(self):
        return self.label

    @classmethod
    def parse(cls, text: str) -> "PruningStrategy":
        """Parse ``none``, ``p1``, ``p2``, ``p2:<k>``, ``p3`` or ``p4``."""
        text = text.strip().lower()
        if text.startswith(ALL_BUT_K_MAJORITY):
            _, _, k = text.partition(":")
            if not k:
                return cls(ALL_BUT_K_MAJORITY, DEFAULT_K)
            try:
                return cls(ALL_BUT_K_MAJORITY, int(k))
            except ValueError:
                raise ValueError(f"bad k in {text!r}") from None
        return cls(text)


def parse_strategies(text: str) -> list[PruningStrategy]:
    return [PruningStrategy.parse(part) for part in text.split(",") if part.strip()]


def _ranked_teams(members: list[tuple[int, AttackEvent]]) -> list[str]:
    counts = Counter(ev.from_team for _, ev in members)
    first: dict[str, object] = {}
    for _, ev in members:
        if ev.from_team not in first or ev.time < first[ev.from_team]:
            first[ev.from_team] = ev.time
    return sorted(counts, key=lambda team: (-counts[team], first[team], team))


def _latest_team(members: list[tuple[int, AttackEvent]]) -> str:
    _, ev = max(members, key=lambda m: (m[1].time, m[1].from_team, m[0]))
    return ev.from_team


def prune(annotated: Sequence[AnnotatedEvent], strategy: PruningStrategy) -> list[AttackEvent]:
    """Events that survive ``strategy``, in their original relative order."""
    if not annotated:
        log.warning("pruning an empty training set")
        return []
    for item in annotated:
        if not (isinstance(item, tuple) and len(item) == 2 and isinstance(item[1], DeceptionAnnotation)):
            raise UnannotatedEventsError("prune expects (event, DeceptionAnnotation) pairs")
    if strategy.kind == NONE:
        return [ev for ev, _ in annotated]
    if strategy.kind == ALL_BUT_EARLIEST:
        return [ev for ev, ann in annotated if ev.from_team == ann.initiator]

    groups: dict[tuple[str, str], list[tuple[int, AttackEvent]]] = defaultdict(list)
    for i, (ev, ann) in enumerate(annotated):
        groups[ann.group_key].append((i, ev))
    keep: dict[tuple[str, str], set[str]] = {}
    for key, members in groups.items():
        if strategy.kind == ALL_BUT_MOST_RECENT:
            keep[key] = {_latest_team(members)}
        else:
            k = 1 if strategy.kind == ALL_BUT_MAJORITY else strategy.k
            keep[key] = set(_ranked_teams(members)[:k])
    return [ev for ev, ann in annotated if ev.from_team in keep[ann.group_key]]


def pruning_counts(before: Sequence[AttackEvent], after: Sequence[AttackEvent]) -> dict[str, tuple[int, int]]:
    """Per target team: (events before pruning, events after)."""
    b = Counter(ev.to_team for ev in before)
    a = Counter(ev.to_team for ev in after)
    return {t: (b[t], a[t]) for t in sorted(b)}

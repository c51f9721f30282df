"""Deception and duplicate labelling.

Attacks are grouped by (target team, payload hash).  The team behind the
earliest attack in a group is its initiator.  The initiator's first attack is
the ``Original`` and its repeats are non-deceptive duplicates.  Every other
team using the same payload on the same target is deceptive: its first use
is ``DeceptiveFirst`` and its repeats are deceptive duplicates.

Timestamp ties are broken by team name, then by input position.
"""

from __future__ import annotations

import csv
from collections import defaultdict
from dataclasses import asdict, dataclass, fields
from enum import Enum
from typing import IO, Iterable, NamedTuple, Sequence

from .events import AttackEvent


class Role(str, Enum):
    ORIGINAL = "Original"
    NON_DECEPTIVE_DUPLICATE = "NonDeceptiveDuplicate"
    DECEPTIVE_FIRST = "DeceptiveFirst"
    DECEPTIVE_DUPLICATE = "DeceptiveDuplicate"

    @property
    def deceptive(self) -> bool:
        return self in (Role.DECEPTIVE_FIRST, Role.DECEPTIVE_DUPLICATE)

    def __str__(self):
        return self.value


GroupKey = tuple[str, str]  # (to_team, payload_hash)


class DeceptionAnnotation(NamedTuple):
    role: Role
    initiator: str
    group_key: GroupKey


AnnotatedEvent = tuple[AttackEvent, DeceptionAnnotation]


def group_indices(events: Sequence[AttackEvent]) -> dict[GroupKey, list[int]]:
    """Event indices per group, each list in attack order."""
    groups: dict[GroupKey, list[int]] = defaultdict(list)
    for i, ev in enumerate(events):
        groups[(ev.to_team, ev.payload_hash)].append(i)
    for idx in groups.values():
        idx.sort(key=lambda i: (events[i].time, events[i].from_team, i))
    return groups


def annotate(events: Sequence[AttackEvent]) -> list[AnnotatedEvent]:
    """Pair every event with its deception role, preserving input order."""
    events = list(events)
    roles: list[DeceptionAnnotation | None] = [None] * len(events)
    for key, idx in group_indices(events).items():
        initiator = events[idx[0]].from_team
        seen: set[str] = set()
        for i in idx:
            team = events[i].from_team
            if team == initiator:
                role = Role.NON_DECEPTIVE_DUPLICATE if team in seen else Role.ORIGINAL
            else:
                role = Role.DECEPTIVE_DUPLICATE if team in seen else Role.DECEPTIVE_FIRST
            seen.add(team)
            roles[i] = DeceptionAnnotation(role, initiator, key)
    return list(zip(events, roles))


@dataclass
class TargetDeception:
    unique_payloads: int = 0
    unique_deceptive_payloads: int = 0
    total_attacks: int = 0
    nondeceptive_duplicates: int = 0
    deceptive_duplicates: int = 0
    # alternative notion of a "unique attack": distinct (attacker, payload) pairs
    unique_attacker_payloads: int = 0

    @property
    def deceptive_unique_share(self) -> float:
        return self.unique_deceptive_payloads / self.unique_payloads if self.unique_payloads else 0.0

    @property
    def deceptive_duplicate_share(self) -> float:
        return self.deceptive_duplicates / self.total_attacks if self.total_attacks else 0.0


@dataclass
class DeceptionSummary:
    targets: dict[str, TargetDeception]

    def totals(self) -> TargetDeception:
        out = TargetDeception()
        for row in self.targets.values():
            for f in fields(TargetDeception):
                setattr(out, f.name, getattr(out, f.name) + getattr(row, f.name))
        return out


def summarize(annotated: Iterable[AnnotatedEvent]) -> DeceptionSummary:
    rows: dict[str, TargetDeception] = defaultdict(TargetDeception)
    attackers: dict[GroupKey, set[str]] = defaultdict(set)
    for ev, ann in annotated:
        row = rows[ev.to_team]
        row.total_attacks += 1
        if ann.role is Role.NON_DECEPTIVE_DUPLICATE:
            row.nondeceptive_duplicates += 1
        elif ann.role is Role.DECEPTIVE_DUPLICATE:
            row.deceptive_duplicates += 1
        attackers[ann.group_key].add(ev.from_team)
    for (target, _), teams in attackers.items():
        row = rows[target]
        row.unique_payloads += 1
        row.unique_attacker_payloads += len(teams)
        if len(teams) >= 2:
            row.unique_deceptive_payloads += 1
    return DeceptionSummary({t: rows[t] for t in sorted(rows)})


def write_summary_csv(summary: DeceptionSummary, out: IO[str]) -> None:
    cols = [f.name for f in fields(TargetDeception)]
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["to_team"] + cols)
    for team, row in summary.targets.items():
        d = asdict(row)
        w.writerow([team] + [d[c] for c in cols])


def write_fig1_csv(summary: DeceptionSummary, out: IO[str]) -> None:
    """Unique deceptive payloads against each target."""
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["to_team", "unique_payloads", "unique_deceptive_payloads",
                "deceptive_unique_share", "unique_attacker_payloads"])
    for team, row in summary.targets.items():
        w.writerow([team, row.unique_payloads, row.unique_deceptive_payloads,
                    f"{row.deceptive_unique_share:.6f}", row.unique_attacker_payloads])


def write_fig2_csv(summary: DeceptionSummary, out: IO[str]) -> None:
    """Total attacks and duplicate attacks against each target."""
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["to_team", "total_attacks", "nondeceptive_duplicates", "deceptive_duplicates",
                "deceptive_duplicate_share"])
    for team, row in summary.targets.items():
        w.writerow([team, row.total_attacks, row.nondeceptive_duplicates,
                    row.deceptive_duplicates, f"{row.deceptive_duplicate_share:.6f}"])

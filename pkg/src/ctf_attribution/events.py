"""Attack-event records and their JSON-lines interchange format.

Each line of an events file is one JSON object with the seven fields
``byte_hist``, ``inst_hist``, ``from_team``, ``to_team``, ``svc``,
``payload_hash`` and ``time``.  Byte-histogram keys are written as ``"0x"``
plus two lowercase hex digits; instruction-histogram keys are mnemonics.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import IO, Iterable, Iterator, NamedTuple

from .exceptions import (
    BadHashError,
    BadTimestampError,
    EventFormatError,
    InvalidEventError,
    MissingFieldError,
)

FIELDS = ("byte_hist", "inst_hist", "from_team", "to_team", "svc", "payload_hash", "time")

_HASH_RE = re.compile(r"[0-9a-f]{32}\Z")


@dataclass(frozen=True)
class AttackEvent:
    """One observed attack against a target team.

    ``time`` is a naive datetime in UTC.  Histograms are sparse: only
    entries with a positive count are stored.
    """

    time: datetime
    from_team: str
    to_team: str
    svc: str
    payload_hash: str
    byte_hist: dict[int, int] = field(default_factory=dict)
    inst_hist: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.from_team == self.to_team:
            raise InvalidEventError(f"attacker and target are both {self.from_team!r}")
        if not isinstance(self.payload_hash, str) or not _HASH_RE.match(self.payload_hash):
            raise BadHashError(f"payload_hash {self.payload_hash!r} is not 32 lowercase hex digits")
        for b, n in self.byte_hist.items():
            if not 0 <= b <= 255:
                raise InvalidEventError(f"byte value {b} out of range")
            if n < 1:
                raise InvalidEventError(f"byte_hist count for {b:#04x} must be positive")
        for m, n in self.inst_hist.items():
            if n < 1:
                raise InvalidEventError(f"inst_hist count for {m!r} must be positive")

    @property
    def payload_length(self) -> int:
        return sum(self.byte_hist.values())

    def to_dict(self) -> dict:
        return {
            "byte_hist": {f"0x{b:02x}": self.byte_hist[b] for b in sorted(self.byte_hist)},
            "inst_hist": {m: self.inst_hist[m] for m in sorted(self.inst_hist)},
            "from_team": self.from_team,
            "to_team": self.to_team,
            "svc": self.svc,
            "payload_hash": self.payload_hash,
            "time": format_time(self.time),
        }

    @classmethod
    def from_dict(cls, record: dict) -> "AttackEvent":
        if not isinstance(record, dict):
            raise EventFormatError("record is not a JSON object")
        missing = [f for f in FIELDS if f not in record]
        if missing:
            raise MissingFieldError(f"missing field(s): {', '.join(missing)}")
        for name in ("from_team", "to_team", "svc", "payload_hash"):
            if not isinstance(record[name], str):
                raise InvalidEventError(f"{name} must be a string")
        return cls(
            time=parse_time(record["time"]),
            from_team=record["from_team"],
            to_team=record["to_team"],
            svc=record["svc"],
            payload_hash=record["payload_hash"],
            byte_hist=_parse_byte_hist(record["byte_hist"]),
            inst_hist=_parse_inst_hist(record["inst_hist"]),
        )


def format_time(t: datetime) -> str:
    # whole seconds print as in the original dataset; sub-second detail is kept when present
    spec = "seconds" if t.microsecond == 0 else "microseconds"
    return t.isoformat(timespec=spec)


def parse_time(value) -> datetime:
    if not isinstance(value, str):
        raise BadTimestampError(f"time {value!r} is not a string")
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    try:
        t = datetime.fromisoformat(text)
    except ValueError as exc:
        raise BadTimestampError(f"time {value!r} is not ISO-8601") from exc
    if t.tzinfo is not None:
        t = t.astimezone(timezone.utc).replace(tzinfo=None)
    return t


def _parse_byte_key(key: str) -> int:
    k = key.strip().lower().replace("×", "x")
    try:
        b = int(k, 16) if k.startswith("0x") else int(k)
    except ValueError as exc:
        raise InvalidEventError(f"bad byte_hist key {key!r}") from exc
    if not 0 <= b <= 255:
        raise InvalidEventError(f"byte_hist key {key!r} out of range")
    return b


def _check_count(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InvalidEventError(f"{where} count {value!r} is not an integer")
    return value


def _parse_byte_hist(raw) -> dict[int, int]:
    if not isinstance(raw, dict):
        raise InvalidEventError("byte_hist must be an object")
    out: dict[int, int] = {}
    for k, v in raw.items():
        b = _parse_byte_key(k)
        if b in out:
            raise InvalidEventError(f"byte_hist key {k!r} repeated")
        out[b] = _check_count(v, "byte_hist")
    return out


def _parse_inst_hist(raw) -> dict[str, int]:
    if not isinstance(raw, dict):
        raise InvalidEventError("inst_hist must be an object")
    return {str(k): _check_count(v, "inst_hist") for k, v in raw.items()}


class RecordError(NamedTuple):
    lineno: int
    error: EventFormatError

    def __str__(self):
        return f"line {self.lineno}: {type(self.error).__name__}: {self.error}"


class ReadResult(NamedTuple):
    events: list[AttackEvent]
    errors: list[RecordError]


def read_events(lines: Iterable[str]) -> ReadResult:
    """Parse JSON-lines records; a bad record is reported and skipped."""
    events: list[AttackEvent] = []
    errors: list[RecordError] = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise EventFormatError(f"invalid JSON: {exc.msg}") from exc
            events.append(AttackEvent.from_dict(record))
        except EventFormatError as exc:
            errors.append(RecordError(lineno, exc))
    return ReadResult(events, errors)


def iter_event_lines(events: Iterable[AttackEvent]) -> Iterator[str]:
    for ev in events:
        yield json.dumps(ev.to_dict(), separators=(", ", ": ")) + "\n"


def write_events(events: Iterable[AttackEvent], out: IO[str]) -> int:
    n = 0
    for line in iter_event_lines(events):
        out.write(line)
        n += 1
    return n


def load_events(path) -> ReadResult:
    with open(path, encoding="utf-8") as f:
        return read_events(f)


def save_events(events: Iterable[AttackEvent], path) -> int:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        return write_events(events, f)

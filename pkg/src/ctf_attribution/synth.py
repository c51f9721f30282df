"""Seeded synthetic capture-the-flag attack corpora with known deception.

Each *group* is one payload aimed at one target.  Its originator launches
waves of repeated attacks; with probability ``p_deceive`` some foreign teams
copy the payload byte for byte after a strictly positive delay and launch
waves of their own.  Payload bytes follow the originator's style (a biased
byte distribution plus a preferred mix of ARM instructions), which gives
classifiers a learnable team fingerprint.  Timestamps are whole seconds and
strictly increasing over the whole corpus, so initiators are unambiguous.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from datetime import datetime, timedelta
from typing import IO, NamedTuple

import numpy as np

from .deception import Role
from .events import AttackEvent
from .exceptions import InvalidConfigError
from .features.arm import encode_instruction
from .features.payload import payload_features

EPOCH = datetime(2013, 8, 2, 0, 0, 0)

# mnemonics teams draw their code from
STYLE_MNEMONICS = (
    "add", "adds", "addne", "and", "ands", "b", "beq", "bgt", "bl", "blne", "bx", "bxeq",
    "bic", "cmn", "cmp", "cmpne", "eor", "eors", "ldm", "ldmeq", "ldr", "ldrb", "ldrne",
    "mla", "mov", "moveq", "movne", "movs", "movt", "movtmi", "movw", "mul", "muls", "mvn",
    "orr", "orrs", "rsb", "sbc", "smull", "stm", "str", "strb", "streq", "sub", "subs",
    "submi", "svc", "svcmi", "teq", "tst", "umull",
)


@dataclass
class SynthConfig:
    n_teams: int = 20
    events_target: int = 50_000
    payload_len_range: tuple[int, int] = (96, 384)
    n_services: int = 6
    # 0: every team draws from one shared distribution; 1: fully team specific
    style_strength: float = 0.85
    code_fraction: float = 0.5
    mnemonics_per_team: int = 8
    # wave sizes: geometric with success probability wave_p, capped at wave_max
    wave_p: float = 0.3
    wave_max: int = 25
    origin_waves_mean: float = 1.0
    p_deceive: float = 0.35
    deceiver_count_mean: float = 8.0
    deceiver_count_max: int = 15
    deceiver_waves_mean: float = 8.0
    # hours
    copy_delay_mean: float = 2.0
    copy_delay_min: float = 0.01
    wave_gap_mean: float = 3.0
    horizon_hours: float = 120.0
    intra_wave_gap_seconds: float = 20.0
    seed: int = 0

    def validate(self) -> None:
        if self.n_teams < 3:
            raise InvalidConfigError("n_teams must be at least 3")
        if self.events_target < 1:
            raise InvalidConfigError("events_target must be positive")
        lo, hi = self.payload_len_range
        if not 1 <= lo <= hi:
            raise InvalidConfigError("payload_len_range must satisfy 1 <= min <= max")
        for name in ("style_strength", "code_fraction", "p_deceive"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise InvalidConfigError(f"{name} must lie in [0, 1]")
        if not 0.0 < self.wave_p <= 1.0:
            raise InvalidConfigError("wave_p must lie in (0, 1]")
        if self.wave_max < 1 or self.n_services < 1 or self.mnemonics_per_team < 1:
            raise InvalidConfigError("wave_max, n_services and mnemonics_per_team must be positive")
        if self.deceiver_count_mean < 1 or self.deceiver_count_max < 1:
            raise InvalidConfigError("deceiver counts must be at least 1")
        if self.deceiver_count_max >= self.wave_max:
            raise InvalidConfigError("deceiver_count_max must be below wave_max")
        if self.origin_waves_mean < 1 or self.deceiver_waves_mean < 1:
            raise InvalidConfigError("mean wave counts must be at least 1")
        if self.copy_delay_min <= 0 or self.copy_delay_mean < 0:
            raise InvalidConfigError("copy delays must be positive")
        if self.horizon_hours <= 0 or self.wave_gap_mean < 0 or self.intra_wave_gap_seconds < 0:
            raise InvalidConfigError("time scales must be non-negative and the horizon positive")

    @classmethod
    def from_dict(cls, d: dict) -> "SynthConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise InvalidConfigError(f"unknown config keys: {sorted(unknown)}")
        d = dict(d)
        if "payload_len_range" in d:
            d["payload_len_range"] = tuple(d["payload_len_range"])
        return cls(**d)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["payload_len_range"] = list(self.payload_len_range)
        return d


@dataclass
class TeamStyle:
    byte_probs: np.ndarray
    mnemonics: list[str]
    mnemonic_probs: np.ndarray
    service_probs: np.ndarray


class SynthCorpus(NamedTuple):
    events: list[AttackEvent]
    truth: list[Role]
    teams: list[str]
    services: list[str]


def team_names(n: int) -> list[str]:
    return [f"team-{i:02d}" for i in range(1, n + 1)]


def _make_styles(cfg: SynthConfig, rng: np.random.Generator) -> list[TeamStyle]:
    s = cfg.style_strength
    common_bytes = rng.dirichlet(np.full(256, 2.0))
    pool = list(STYLE_MNEMONICS)
    common_mnem = rng.dirichlet(np.full(len(pool), 2.0))
    common_svc = np.full(cfg.n_services, 1.0 / cfg.n_services)
    k = min(cfg.mnemonics_per_team, len(pool))
    styles = []
    for _ in range(cfg.n_teams):
        own_bytes = rng.dirichlet(np.full(256, 0.2))
        chosen = rng.choice(len(pool), size=k, replace=False)
        own_mnem = np.zeros(len(pool))
        own_mnem[chosen] = rng.dirichlet(np.ones(k))
        own_svc = rng.dirichlet(np.full(cfg.n_services, 0.5))
        styles.append(TeamStyle(
            byte_probs=s * own_bytes + (1 - s) * common_bytes,
            mnemonics=pool,
            mnemonic_probs=s * own_mnem + (1 - s) * common_mnem,
            service_probs=s * own_svc + (1 - s) * common_svc,
        ))
    return styles


def _make_payload(style: TeamStyle, cfg: SynthConfig, rng: np.random.Generator) -> bytes:
    lo, hi = cfg.payload_len_range
    length = int(rng.integers(lo, hi + 1))
    n_words = int(length * cfg.code_fraction) // 4
    picks = rng.choice(len(style.mnemonics), size=n_words, p=style.mnemonic_probs)
    code = b"".join(encode_instruction(style.mnemonics[i], rng).to_bytes(4, "little") for i in picks)
    data = rng.choice(256, size=length - len(code), p=style.byte_probs).astype(np.uint8).tobytes()
    return code + data


def _geometric(rng, mean: float) -> int:
    """At least 1, with the given mean."""
    return int(rng.geometric(1.0 / mean)) if mean > 1 else 1


@dataclass
class _Actor:
    team: int
    wave_starts: list[float]            # hours
    events: list[float] = field(default_factory=list)


def generate(cfg: SynthConfig) -> SynthCorpus:
    """Build a corpus whose size is ``events_target`` plus at most ``deceiver_count_max``."""
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    teams = team_names(cfg.n_teams)
    ports = rng.choice(np.arange(1024, 65536), size=cfg.n_services, replace=False)
    services = sorted(f"{int(p):05d}" for p in ports)
    styles = _make_styles(cfg, rng)

    # (continuous time, sequence, group, team, role)
    raw: list[tuple[float, int, int, int, Role]] = []
    group_info: list[tuple[int, str, object]] = []   # (target, svc, features)
    seen_hashes: set[str] = set()
    total = 0
    gap_h = cfg.intra_wave_gap_seconds / 3600.0

    while total < cfg.events_target:
        origin = int(rng.integers(cfg.n_teams))
        target = int(rng.choice([t for t in range(cfg.n_teams) if t != origin]))
        style = styles[origin]
        svc = services[int(rng.choice(cfg.n_services, p=style.service_probs))]
        while True:
            feats = payload_features(_make_payload(style, cfg, rng))
            if feats.payload_hash not in seen_hashes:
                seen_hashes.add(feats.payload_hash)
                break
        g = len(group_info)
        group_info.append((target, svc, feats))

        start = float(rng.uniform(0.0, cfg.horizon_hours))
        actors = [_Actor(origin, _wave_starts(rng, start, _geometric(rng, cfg.origin_waves_mean), cfg))]
        if rng.random() < cfg.p_deceive:
            others = [t for t in range(cfg.n_teams) if t not in (origin, target)]
            n_dec = min(len(others), cfg.deceiver_count_max,
                        1 + int(rng.poisson(cfg.deceiver_count_mean - 1.0)))
            for team in rng.choice(others, size=n_dec, replace=False):
                first = start + cfg.copy_delay_min + float(rng.exponential(cfg.copy_delay_mean))
                n_waves = _geometric(rng, cfg.deceiver_waves_mean)
                actors.append(_Actor(int(team), _wave_starts(rng, first, n_waves, cfg)))

        # waves are emitted round by round so every actor's first wave exists
        # even when the size budget runs out inside this group
        max_rounds = max(len(a.wave_starts) for a in actors)
        stop = False
        for rnd in range(max_rounds):
            for actor in actors:
                if rnd >= len(actor.wave_starts):
                    continue
                t = actor.wave_starts[rnd]
                if t >= cfg.horizon_hours:
                    continue
                if stop:
                    if rnd == 0:
                        actor.events.append(t)
                        total += 1
                    continue
                size = min(int(rng.geometric(cfg.wave_p)), cfg.wave_max, cfg.events_target - total)
                for _ in range(size):
                    if t >= cfg.horizon_hours:
                        break
                    actor.events.append(t)
                    total += 1
                    t += gap_h * (0.5 + float(rng.exponential(1.0)))
                stop = total >= cfg.events_target
            if stop:
                break
        for actor in actors:
            times = sorted(actor.events)
            is_origin = actor is actors[0]
            for j, t in enumerate(times):
                if is_origin:
                    role = Role.ORIGINAL if j == 0 else Role.NON_DECEPTIVE_DUPLICATE
                else:
                    role = Role.DECEPTIVE_FIRST if j == 0 else Role.DECEPTIVE_DUPLICATE
                raw.append((t, len(raw), g, actor.team, role))

    raw.sort(key=lambda r: (r[0], r[1]))
    events: list[AttackEvent] = []
    truth: list[Role] = []
    last_sec = -1
    for t, _, g, team, role in raw:
        sec = max(int(round(t * 3600.0)), last_sec + 1)
        last_sec = sec
        target, svc, feats = group_info[g]
        events.append(AttackEvent(
            time=EPOCH + timedelta(seconds=sec),
            from_team=teams[team],
            to_team=teams[target],
            svc=svc,
            payload_hash=feats.payload_hash,
            byte_hist=feats.byte_hist,
            inst_hist=feats.inst_hist,
        ))
        truth.append(role)
    return SynthCorpus(events, truth, teams, services)


def _wave_starts(rng, first: float, n_waves: int, cfg: SynthConfig) -> list[float]:
    starts = [first]
    for _ in range(n_waves - 1):
        starts.append(starts[-1] + float(rng.exponential(cfg.wave_gap_mean)) + 1e-3)
    return starts


def write_truth(truth: list[Role], out: IO[str]) -> None:
    """JSON lines ``{"index": i, "role": ...}`` aligned with the events file."""
    for i, role in enumerate(truth):
        out.write(json.dumps({"index": i, "role": role.value}) + "\n")


def read_truth(lines) -> list[Role]:
    out = []
    for line in lines:
        if line.strip():
            rec = json.loads(line)
            if rec["index"] != len(out):
                raise ValueError(f"truth index {rec['index']} out of sequence")
            out.append(Role(rec["role"]))
    return out

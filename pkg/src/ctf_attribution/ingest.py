"""From captures to attack events: parse, reassemble, attribute, featurize."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from datetime import datetime, timedelta
from typing import Callable, Iterable

from .events import AttackEvent
from .exceptions import UnmappedAddressError
from .features.payload import PayloadFeatures, payload_features
from .pcap import read_pcap
from .reassembly import Flow, StreamReassembler
from .teammap import TeamMap

_EPOCH = datetime(1970, 1, 1)


@dataclass
class IngestStats:
    packets: int = 0
    skipped_records: int = 0
    flows: int = 0
    server_side_flows: int = 0
    unmapped_address: int = 0
    unmapped_port: int = 0
    intra_team_dropped: int = 0
    events: int = 0
    reassembly_anomalies: int = 0

    def as_dict(self) -> dict:
        return asdict(self)


def us_to_datetime(us: int) -> datetime:
    return _EPOCH + timedelta(microseconds=us)


def flows_to_events(flows: Iterable[Flow], teammap: TeamMap,
                    feature_fn: Callable[[bytes], PayloadFeatures] = payload_features,
                    stats: IngestStats | None = None) -> list[AttackEvent]:
    """One event per client-side flow between two distinct teams.

    Responder-side streams, unmapped endpoints and intra-team traffic are
    dropped and counted in ``stats``.  A destination port without a service
    id is recorded under its decimal string.  Event times keep whole
    seconds, the precision of the reference event format.
    """
    stats = stats if stats is not None else IngestStats()
    events = []
    for flow in flows:
        stats.flows += 1
        if not flow.client_side:
            stats.server_side_flows += 1
            continue
        try:
            src_team = teammap.team_of(flow.src_addr)
            dst_team = teammap.team_of(flow.dst_addr)
        except UnmappedAddressError:
            stats.unmapped_address += 1
            continue
        if src_team == dst_team:
            stats.intra_team_dropped += 1
            continue
        if flow.dst_port not in teammap.services:
            stats.unmapped_port += 1
        feats = feature_fn(flow.payload)
        events.append(AttackEvent(
            time=us_to_datetime(flow.first_time - flow.first_time % 1_000_000),
            from_team=src_team,
            to_team=dst_team,
            svc=teammap.service_of(flow.dst_port),
            payload_hash=feats.payload_hash,
            byte_hist=feats.byte_hist,
            inst_hist=feats.inst_hist,
        ))
    stats.events += len(events)
    return events


def ingest_pcaps(paths: Iterable, teammap: TeamMap) -> tuple[list[AttackEvent], IngestStats]:
    """Events from several capture files, ordered by time.

    Files are reassembled independently (one file per target team in the
    original captures), then merged.
    """
    stats = IngestStats()
    events: list[AttackEvent] = []
    for path in paths:
        parsed = read_pcap(path)
        stats.packets += parsed.stats.tcp_packets
        stats.skipped_records += parsed.stats.skipped
        r = StreamReassembler()
        for pkt in parsed.packets:
            r.feed(pkt)
        flows = r.close()
        stats.reassembly_anomalies += r.stats.anomalies
        events.extend(flows_to_events(flows, teammap, stats=stats))
    events.sort(key=lambda e: e.time)
    return events, stats

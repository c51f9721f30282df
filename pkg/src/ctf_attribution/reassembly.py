"""Reassembly of unidirectional TCP payload streams, in the manner of tcpflow.

Every directed 4-tuple is its own stream.  Segment data is placed at its
offset from the initial sequence number; bytes that are already placed are
never rewritten, so the first copy of retransmitted data wins.  A SYN on a
live key, or more than ``idle_timeout`` of silence, ends the current flow.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .pcap import Packet

IDLE_TIMEOUT_US = 60 * 1_000_000
# segments placed further than this from the stream start are treated as garbage
MAX_STREAM_SPAN = 1 << 26

FlowKey = tuple[str, int, str, int]


@dataclass(frozen=True)
class Flow:
    key: FlowKey
    first_time: int
    last_time: int
    payload: bytes
    client_side: bool = True

    @property
    def src_addr(self) -> str:
        return self.key[0]

    @property
    def src_port(self) -> int:
        return self.key[1]

    @property
    def dst_addr(self) -> str:
        return self.key[2]

    @property
    def dst_port(self) -> int:
        return self.key[3]


@dataclass
class ReassemblyStats:
    packets: int = 0
    flows: int = 0
    retransmissions: int = 0   # segments overlapping bytes already placed
    holes: int = 0             # flows finalized with missing byte ranges
    out_of_window: int = 0     # segments dropped for an absurd offset
    syn_restarts: int = 0
    idle_restarts: int = 0
    syn_retransmissions: int = 0

    @property
    def anomalies(self) -> int:
        return self.retransmissions + self.holes + self.out_of_window + self.syn_retransmissions


def _signed32(x: int) -> int:
    x &= 0xFFFFFFFF
    return x - (1 << 32) if x & 0x80000000 else x


@dataclass
class _Stream:
    order: int
    key: FlowKey
    base_seq: int
    syn_seen: bool
    client_side: bool
    first_time: int
    last_time: int
    segments: list = field(default_factory=list)


class StreamReassembler:
    """Stateful reassembler; feed packets in capture order, then call ``close``."""

    def __init__(self, idle_timeout: int = IDLE_TIMEOUT_US):
        self.idle_timeout = idle_timeout
        self.stats = ReassemblyStats()
        self._open: dict[FlowKey, _Stream] = {}
        self._done: list[tuple[int, Flow]] = []
        self._counter = 0

    def _start(self, pkt: Packet, key: FlowKey) -> _Stream:
        reverse = (key[2], key[3], key[0], key[1])
        if pkt.syn:
            client = not pkt.ack
        else:
            client = reverse not in self._open
        st = _Stream(
            order=self._counter,
            key=key,
            base_seq=(pkt.seq + 1) & 0xFFFFFFFF if pkt.syn else pkt.seq,
            syn_seen=pkt.syn,
            client_side=client,
            first_time=pkt.capture_time,
            last_time=pkt.capture_time,
        )
        self._counter += 1
        self._open[key] = st
        return st

    def _finish(self, st: _Stream) -> None:
        del self._open[st.key]
        payload = self._assemble(st)
        self._done.append((st.order, Flow(st.key, st.first_time, st.last_time, payload, st.client_side)))
        self.stats.flows += 1

    def _assemble(self, st: _Stream) -> bytes:
        if not st.segments:
            return b""
        lo = min(off for off, _ in st.segments)
        hi = max(off + len(d) for off, d in st.segments)
        buf = bytearray(hi - lo)
        mask = bytearray(hi - lo)
        for off, data in st.segments:
            a = off - lo
            b = a + len(data)
            if mask.find(1, a, b) == -1:
                buf[a:b] = data
                mask[a:b] = b"\x01" * len(data)
                continue
            self.stats.retransmissions += 1
            for i in range(a, b):
                if not mask[i]:
                    buf[i] = data[i - a]
                    mask[i] = 1
        if mask.find(0) == -1:
            return bytes(buf)
        self.stats.holes += 1
        return bytes(x for x, m in zip(buf, mask) if m)

    def feed(self, pkt: Packet) -> None:
        self.stats.packets += 1
        key = (pkt.src_addr, pkt.src_port, pkt.dst_addr, pkt.dst_port)
        st = self._open.get(key)
        if st is not None and pkt.capture_time - st.last_time > self.idle_timeout:
            self.stats.idle_restarts += 1
            self._finish(st)
            st = None
        if st is not None and pkt.syn:
            if st.syn_seen and not st.segments and (pkt.seq + 1) & 0xFFFFFFFF == st.base_seq:
                self.stats.syn_retransmissions += 1
            else:
                self.stats.syn_restarts += 1
                self._finish(st)
                st = None
        if st is None:
            st = self._start(pkt, key)
        st.last_time = max(st.last_time, pkt.capture_time)
        if not pkt.payload:
            return
        data_seq = pkt.seq + 1 if pkt.syn else pkt.seq
        off = _signed32(data_seq - st.base_seq)
        if abs(off) > MAX_STREAM_SPAN:
            self.stats.out_of_window += 1
            return
        st.segments.append((off, pkt.payload))

    def close(self) -> list[Flow]:
        for st in sorted(self._open.values(), key=lambda s: s.order):
            self._finish(st)
        self._done.sort(key=lambda item: item[0])
        flows = [f for _, f in self._done]
        self._done = []
        return flows


def reassemble_streams(packets: Iterable[Packet], idle_timeout: int = IDLE_TIMEOUT_US,
                       stats: ReassemblyStats | None = None) -> list[Flow]:
    """Flows in order of their first packet."""
    r = StreamReassembler(idle_timeout)
    if stats is not None:
        r.stats = stats
    for pkt in packets:
        r.feed(pkt)
    return r.close()

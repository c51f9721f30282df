"""Minimal libpcap reader yielding TCP-over-IPv4 segments.

Only classic pcap with Ethernet link type is accepted.  IPv6, fragments,
non-TCP protocols and truncated records are skipped and counted.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import NamedTuple

from .exceptions import BadMagicError, TruncatedHeaderError, UnsupportedLinkTypeError

GLOBAL_HEADER_LEN = 24
RECORD_HEADER_LEN = 16
LINKTYPE_ETHERNET = 1

ETHERTYPE_IPV4 = 0x0800
ETHERTYPE_VLAN = 0x8100
IPPROTO_TCP = 6

# TCP flag bits
FIN = 0x01
SYN = 0x02
RST = 0x04
PSH = 0x08
ACK = 0x10

_MAGICS = {
    b"\xd4\xc3\xb2\xa1": ("<", 1),     # little-endian, microseconds
    b"\xa1\xb2\xc3\xd4": (">", 1),
    b"\x4d\x3c\xb2\xa1": ("<", 1000),  # little-endian, nanoseconds
    b"\xa1\xb2\x3c\x4d": (">", 1000),
}


@dataclass(frozen=True)
class Packet:
    capture_time: int  # microseconds since the epoch
    src_addr: str
    dst_addr: str
    src_port: int
    dst_port: int
    seq: int
    flags: int
    payload: bytes = b""

    @property
    def syn(self) -> bool:
        return bool(self.flags & SYN)

    @property
    def ack(self) -> bool:
        return bool(self.flags & ACK)


@dataclass
class ParseStats:
    records: int = 0
    tcp_packets: int = 0
    non_ipv4: int = 0
    non_tcp: int = 0
    fragments: int = 0
    truncated: int = 0

    @property
    def skipped(self) -> int:
        return self.non_ipv4 + self.non_tcp + self.fragments + self.truncated


class ParsedCapture(NamedTuple):
    packets: list[Packet]
    stats: ParseStats


def _ipv4(raw: bytes) -> str:
    return "%d.%d.%d.%d" % tuple(raw)


def parse_pcap(data: bytes) -> ParsedCapture:
    """Decode a whole pcap file held in memory."""
    if len(data) < GLOBAL_HEADER_LEN:
        raise TruncatedHeaderError(f"capture is {len(data)} bytes, shorter than the pcap global header")
    try:
        endian, ts_div = _MAGICS[bytes(data[:4])]
    except KeyError:
        raise BadMagicError(f"unrecognised pcap magic {bytes(data[:4]).hex()}") from None
    _, _, _, _, _, linktype = struct.unpack(endian + "HHiIII", data[4:24])
    if linktype != LINKTYPE_ETHERNET:
        raise UnsupportedLinkTypeError(f"link type {linktype} is not Ethernet")

    rec_hdr = struct.Struct(endian + "IIII")
    stats = ParseStats()
    packets: list[Packet] = []
    pos = GLOBAL_HEADER_LEN
    end = len(data)
    while pos < end:
        if pos + RECORD_HEADER_LEN > end:
            stats.records += 1
            stats.truncated += 1
            break
        ts_sec, ts_sub, incl_len, _orig_len = rec_hdr.unpack_from(data, pos)
        pos += RECORD_HEADER_LEN
        stats.records += 1
        if pos + incl_len > end:
            stats.truncated += 1
            break
        frame = data[pos:pos + incl_len]
        pos += incl_len
        pkt = _decode_frame(frame, ts_sec * 1_000_000 + ts_sub // ts_div, stats)
        if pkt is not None:
            packets.append(pkt)
            stats.tcp_packets += 1
    return ParsedCapture(packets, stats)


def _decode_frame(frame: bytes, ts_us: int, stats: ParseStats) -> Packet | None:
    if len(frame) < 14:
        stats.truncated += 1
        return None
    off = 12
    ethertype = int.from_bytes(frame[off:off + 2], "big")
    off += 2
    if ethertype == ETHERTYPE_VLAN:
        if len(frame) < 18:
            stats.truncated += 1
            return None
        ethertype = int.from_bytes(frame[16:18], "big")
        off = 18
    if ethertype != ETHERTYPE_IPV4:
        stats.non_ipv4 += 1
        return None

    ip = frame[off:]
    if len(ip) < 20:
        stats.truncated += 1
        return None
    if ip[0] >> 4 != 4:
        stats.non_ipv4 += 1
        return None
    ihl = (ip[0] & 0x0F) * 4
    total_len = int.from_bytes(ip[2:4], "big")
    frag = int.from_bytes(ip[6:8], "big")
    if ihl < 20 or total_len < ihl:
        stats.truncated += 1
        return None
    if frag & 0x2000 or frag & 0x1FFF:
        stats.fragments += 1
        return None
    if ip[9] != IPPROTO_TCP:
        stats.non_tcp += 1
        return None
    if len(ip) < total_len:
        stats.truncated += 1
        return None
    # total_len bounds the datagram; anything past it is link padding
    tcp = ip[ihl:total_len]
    if len(tcp) < 20:
        stats.truncated += 1
        return None
    data_off = (tcp[12] >> 4) * 4
    if data_off < 20 or data_off > len(tcp):
        stats.truncated += 1
        return None
    sport, dport, seq = struct.unpack_from(">HHI", tcp, 0)
    return Packet(
        capture_time=ts_us,
        src_addr=_ipv4(ip[12:16]),
        dst_addr=_ipv4(ip[16:20]),
        src_port=sport,
        dst_port=dport,
        seq=seq,
        flags=tcp[13],
        payload=bytes(tcp[data_off:]),
    )


def read_pcap(path) -> ParsedCapture:
    with open(path, "rb") as f:
        return parse_pcap(f.read())


# -- writer -----------------------------------------------------------------
# Used to build fixtures and to export synthetic captures.

def pcap_global_header(snaplen: int = 65535, nanosecond: bool = False) -> bytes:
    magic = 0xA1B23C4D if nanosecond else 0xA1B2C3D4
    return struct.pack("<IHHiIII", magic, 2, 4, 0, 0, snaplen, LINKTYPE_ETHERNET)


def _checksum(data: bytes) -> int:
    if len(data) % 2:
        data += b"\x00"
    s = sum(struct.unpack(f">{len(data) // 2}H", data))
    while s >> 16:
        s = (s & 0xFFFF) + (s >> 16)
    return ~s & 0xFFFF


def build_frame(src: str, dst: str, sport: int, dport: int, seq: int,
                flags: int = ACK | PSH, payload: bytes = b"", ack: int = 0) -> bytes:
    """Ethernet/IPv4/TCP frame with a 20-byte TCP header."""
    src_b = bytes(int(x) for x in src.split("."))
    dst_b = bytes(int(x) for x in dst.split("."))
    tcp = struct.pack(">HHIIBBHHH", sport, dport, seq, ack, 5 << 4, flags, 65535, 0, 0) + payload
    total = 20 + len(tcp)
    ip = struct.pack(">BBHHHBBH4s4s", 0x45, 0, total, 0, 0x4000, 64, IPPROTO_TCP, 0, src_b, dst_b)
    ip = ip[:10] + struct.pack(">H", _checksum(ip)) + ip[12:]
    eth = b"\x02\x00\x00\x00\x00\x02" + b"\x02\x00\x00\x00\x00\x01" + struct.pack(">H", ETHERTYPE_IPV4)
    return eth + ip + tcp


def pcap_record(ts_us: int, frame: bytes, nanosecond: bool = False) -> bytes:
    sub = (ts_us % 1_000_000) * (1000 if nanosecond else 1)
    return struct.pack("<IIII", ts_us // 1_000_000, sub, len(frame), len(frame)) + frame

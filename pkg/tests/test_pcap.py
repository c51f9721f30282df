import struct

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ctf_attribution.exceptions import BadMagicError, TruncatedHeaderError, UnsupportedLinkTypeError
from ctf_attribution.pcap import (
    ACK, PSH, SYN, build_frame, parse_pcap, pcap_global_header, pcap_record,
)


def hand_built(payload=b"AB", magic=0xA1B2C3D4, endian="<", ts=(1375444800, 123456)):
    """One Ethernet/IPv4/TCP record laid out field by field."""
    glob = struct.pack(endian + "IHHiIII", magic, 2, 4, 0, 0, 65535, 1)
    eth = bytes(6) + bytes(6) + b"\x08\x00"
    tcp = struct.pack("!HHIIBBHHH", 1234, 80, 42, 0, 0x50, 0x18, 512, 0, 0)
    ip = struct.pack("!BBHHHBBH4s4s", 0x45, 0, 20 + 20 + len(payload), 7, 0, 64, 6, 0,
                     bytes([10, 0, 0, 1]), bytes([10, 0, 0, 2]))
    frame = eth + ip + tcp + payload
    rec = struct.pack(endian + "IIII", ts[0], ts[1], len(frame), len(frame))
    return glob + rec + frame


def test_header_only():
    parsed = parse_pcap(pcap_global_header())
    assert parsed.packets == []
    assert parsed.stats.skipped == 0


def test_one_record_by_hand():
    parsed = parse_pcap(hand_built())
    (pkt,) = parsed.packets
    assert pkt.payload == b"AB"
    assert pkt.capture_time == 1375444800 * 1_000_000 + 123456
    assert (pkt.src_addr, pkt.src_port, pkt.dst_addr, pkt.dst_port) == ("10.0.0.1", 1234, "10.0.0.2", 80)
    assert pkt.seq == 42
    assert pkt.ack and not pkt.syn


def test_big_endian_and_nanosecond_magics():
    be = parse_pcap(hand_built(endian=">"))
    assert be.packets[0].capture_time == 1375444800 * 1_000_000 + 123456
    ns = parse_pcap(hand_built(magic=0xA1B23C4D, ts=(1375444800, 123456789)))
    assert ns.packets[0].capture_time == 1375444800 * 1_000_000 + 123456


def test_bad_magic_and_short_header():
    data = bytearray(hand_built())
    data[:4] = bytes(4)
    with pytest.raises(BadMagicError):
        parse_pcap(bytes(data))
    with pytest.raises(TruncatedHeaderError):
        parse_pcap(b"\xd4\xc3\xb2\xa1" + bytes(10))


def test_non_ethernet_link_type():
    data = bytearray(hand_built())
    data[20:24] = struct.pack("<I", 101)
    with pytest.raises(UnsupportedLinkTypeError):
        parse_pcap(bytes(data))


def test_skips_are_counted():
    frames = [
        build_frame("10.0.0.1", "10.0.0.2", 1, 2, 0, payload=b"ok"),
        bytes(12) + b"\x86\xdd" + bytes(40),                            # IPv6
        build_frame("10.0.0.1", "10.0.0.2", 1, 2, 0)[:14 + 9] + b"\x11" + bytes(30),  # UDP
    ]
    udp = bytearray(build_frame("10.0.0.1", "10.0.0.2", 1, 2, 0, payload=b"xx"))
    udp[14 + 9] = 17
    frag = bytearray(build_frame("10.0.0.1", "10.0.0.2", 1, 2, 0, payload=b"xx"))
    frag[14 + 6:14 + 8] = b"\x20\x00"
    data = pcap_global_header()
    for f in [frames[0], frames[1], bytes(udp), bytes(frag)]:
        data += pcap_record(0, f)
    data += pcap_record(0, frames[0])[:-3]          # truncated final record
    parsed = parse_pcap(data)
    assert len(parsed.packets) == 1
    s = parsed.stats
    assert (s.non_ipv4, s.non_tcp, s.fragments, s.truncated) == (1, 1, 1, 1)
    assert s.records == 5
    assert s.skipped == 4


def test_vlan_tagged_frame():
    f = build_frame("10.0.0.1", "10.0.0.2", 1, 2, 0, payload=b"vlan")
    tagged = f[:12] + b"\x81\x00\x00\x05" + f[12:]
    parsed = parse_pcap(pcap_global_header() + pcap_record(5, tagged))
    assert parsed.packets[0].payload == b"vlan"


def test_ethernet_padding_is_ignored():
    f = build_frame("10.0.0.1", "10.0.0.2", 1, 2, 0, flags=SYN) + bytes(6)
    parsed = parse_pcap(pcap_global_header() + pcap_record(0, f))
    assert parsed.packets[0].payload == b""
    assert parsed.packets[0].syn


@given(st.lists(st.tuples(st.integers(0, 2**40), st.integers(0, 2**32 - 1), st.binary(max_size=64)),
                max_size=10), st.booleans())
def test_writer_parser_round_trip(records, nano):
    data = pcap_global_header(nanosecond=nano)
    for ts, seq, payload in records:
        data += pcap_record(ts, build_frame("1.2.3.4", "5.6.7.8", 10, 20, seq, ACK | PSH, payload), nano)
    parsed = parse_pcap(data)
    assert [(p.capture_time, p.seq, p.payload) for p in parsed.packets] == records

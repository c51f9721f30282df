import random

from hypothesis import given
from hypothesis import strategies as st

from ctf_attribution.pcap import ACK, PSH, SYN, Packet
from ctf_attribution.reassembly import ReassemblyStats, StreamReassembler, reassemble_streams

KEY = ("10.0.1.1", 5555, "10.0.2.2", 80)


def pkt(t, seq, payload=b"", flags=ACK | PSH, key=KEY):
    return Packet(capture_time=t, src_addr=key[0], src_port=key[1], dst_addr=key[2],
                  dst_port=key[3], seq=seq & 0xFFFFFFFF, flags=flags, payload=payload)


def test_two_segments_make_attack():
    (flow,) = reassemble_streams([pkt(0, 1000, b"AT"), pkt(1, 1002, b"TACK")])
    assert flow.payload == b"ATTACK"
    assert (flow.first_time, flow.last_time) == (0, 1)


def test_retransmission_counted_and_ignored():
    stats = ReassemblyStats()
    (flow,) = reassemble_streams([pkt(0, 1000, b"AT"), pkt(1, 1000, b"AT"), pkt(2, 1002, b"TACK")],
                                 stats=stats)
    assert flow.payload == b"ATTACK"
    assert stats.retransmissions == 1


def test_first_copy_wins_on_overlap():
    stats = ReassemblyStats()
    (flow,) = reassemble_streams([pkt(0, 0, b"abcd"), pkt(1, 2, b"XXef")], stats=stats)
    assert flow.payload == b"abcdef"
    assert stats.retransmissions == 1


def test_out_of_order_with_syn():
    packets = [pkt(0, 99, flags=SYN), pkt(1, 106, b"world"), pkt(2, 100, b"hell"), pkt(3, 104, b"o ")]
    (flow,) = reassemble_streams(packets)
    assert flow.payload == b"hello world"


def test_distinct_keys_give_distinct_flows():
    other = ("10.0.3.3", 6666, "10.0.2.2", 80)
    flows = reassemble_streams([pkt(0, 0, b"a"), pkt(1, 0, b"b", key=other), pkt(2, 1, b"c")])
    assert [f.payload for f in flows] == [b"ac", b"b"]
    assert flows[1].key == other


def test_idle_gap_and_syn_restart_split_flows():
    stats = ReassemblyStats()
    packets = [pkt(0, 0, b"one"), pkt(61_000_001, 3, b"two"),
               pkt(61_000_002, 500, flags=SYN), pkt(61_000_003, 501, b"three")]
    flows = reassemble_streams(packets, stats=stats)
    assert [f.payload for f in flows] == [b"one", b"two", b"three"]
    assert (stats.idle_restarts, stats.syn_restarts) == (1, 1)


def test_retransmitted_syn_keeps_flow():
    stats = ReassemblyStats()
    flows = reassemble_streams([pkt(0, 7, flags=SYN), pkt(1, 7, flags=SYN), pkt(2, 8, b"x")], stats=stats)
    assert [f.payload for f in flows] == [b"x"]
    assert stats.syn_retransmissions == 1


def test_sequence_wraparound():
    (flow,) = reassemble_streams([pkt(0, 2**32 - 2, b"ab"), pkt(1, 0, b"cd")])
    assert flow.payload == b"abcd"


def test_hole_is_skipped_and_counted():
    stats = ReassemblyStats()
    (flow,) = reassemble_streams([pkt(0, 0, b"ab"), pkt(1, 10, b"cd")], stats=stats)
    assert flow.payload == b"abcd"
    assert stats.holes == 1


def test_client_side_detection():
    rev = (KEY[2], KEY[3], KEY[0], KEY[1])
    flows = reassemble_streams([pkt(0, 0, flags=SYN), pkt(1, 0, flags=SYN | ACK, key=rev),
                                pkt(2, 1, b"req"), pkt(3, 1, b"resp", key=rev)])
    assert [(f.payload, f.client_side) for f in flows] == [(b"req", True), (b"resp", False)]
    # without a handshake the first direction seen is the client
    flows = reassemble_streams([pkt(0, 0, b"req"), pkt(1, 0, b"resp", key=rev)])
    assert [f.client_side for f in flows] == [True, False]


def test_incremental_feed_equals_batch():
    packets = [pkt(i, 10 * i, bytes([65 + i]) * 10) for i in range(5)]
    r = StreamReassembler()
    for p in packets:
        r.feed(p)
    assert r.close() == reassemble_streams(packets)


@given(st.binary(min_size=1, max_size=300), st.integers(0, 2**32 - 1), st.randoms(use_true_random=False),
       st.integers(1, 40))
def test_any_segmentation_and_order_reassembles(data, isn, rnd, max_seg):
    cuts, pos = [], 0
    while pos < len(data):
        size = rnd.randint(1, max_seg)
        cuts.append((pos, data[pos:pos + size]))
        pos += size
    # duplicate a few segments, then shuffle everything after the SYN
    segs = cuts + [rnd.choice(cuts) for _ in range(rnd.randint(0, 3))]
    rnd.shuffle(segs)
    packets = [pkt(0, isn, flags=SYN)] + [pkt(i + 1, isn + 1 + off, d) for i, (off, d) in enumerate(segs)]
    flows = reassemble_streams(packets)
    assert len(flows) == 1
    assert flows[0].payload == data


@given(st.lists(st.binary(min_size=1, max_size=20), min_size=1, max_size=10))
def test_payload_conservation_in_order(chunks):
    seq, packets = 1, []
    for i, c in enumerate(chunks):
        packets.append(pkt(i, seq, c))
        seq += len(c)
    (flow,) = reassemble_streams(packets)
    assert len(flow.payload) == sum(map(len, chunks))
    assert reassemble_streams(packets) == reassemble_streams(list(packets))


def test_deterministic():
    rnd = random.Random(0)
    packets = [pkt(i, rnd.randint(0, 50), bytes([rnd.randint(0, 255)]) * rnd.randint(1, 5)) for i in range(50)]
    assert reassemble_streams(packets) == reassemble_streams(packets)

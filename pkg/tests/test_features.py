import hashlib
import zlib

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ctf_attribution.exceptions import EmptyTrainingSetError
from ctf_attribution.features.arm import (
    UNKNOWN, all_mnemonics, arm_instruction_histogram, decode_word, encode_instruction, split_mnemonic,
)
from ctf_attribution.features.payload import byte_histogram, md5_digest, payload_features, sparse_byte_histogram
from ctf_attribution.features.vectorize import (
    OOV, EventVectorizer, FeatureSpace, build_feature_space, event_labels, vectorize, vectorize_many,
)

from oracles import capstone_mnemonic, md5_hex

# -- payload ----------------------------------------------------------------


@given(st.binary(max_size=300))
def test_md5_matches_reference(payload):
    assert md5_digest(payload) == md5_hex(payload)


@given(st.binary(max_size=300))
def test_byte_histograms(payload):
    dense = byte_histogram(payload)
    assert dense.shape == (256,)
    assert dense.sum() == len(payload)
    sparse = sparse_byte_histogram(payload)
    assert all(v > 0 for v in sparse.values())
    assert sparse == {b: payload.count(bytes([b])) for b in set(payload)}


def test_payload_features_bundle():
    feats = payload_features(b"\x00\x00\xa0\xe3\xff")
    assert feats.payload_hash == hashlib.md5(b"\x00\x00\xa0\xe3\xff").hexdigest()
    assert feats.inst_hist == {"mov": 1}       # the trailing byte is not a word
    assert sum(feats.byte_hist.values()) == 5


# -- ARM --------------------------------------------------------------------

@pytest.mark.parametrize("word, name", [
    (0xE3A00000, "mov"),        # mov r0, #0
    (0xE2900001, "adds"),       # adds r0, r0, #1
    (0x03500000, "cmpeq"),      # cmpeq r0, #0
    (0x2A000000, "bhs"),
    (0x3A000000, "blo"),
    (0xEB000000, "bl"),
    (0xE12FFF1E, "bx"),
    (0xEF000000, "svc"),
    (0xE5901000, "ldr"),
    (0xE8BD8000, "ldm"),        # pop {pc}
    (0xE0000091, "mul"),
    (0xE0900291, "umulls"),
    (0xE3001000, "movw"),
    (0xF57FF05F, UNKNOWN),      # unconditional space
    (0xE7F000F0, UNKNOWN),      # permanently undefined
])
def test_known_words(word, name):
    assert decode_word(word) == name


def test_histogram_words():
    assert arm_instruction_histogram(b"") == {}
    assert arm_instruction_histogram(b"\x00\x00\xa0") == {}
    payload = (0xE3A00000).to_bytes(4, "little") * 3 + (0xEB000000).to_bytes(4, "little")
    assert arm_instruction_histogram(payload) == {"mov": 3, "bl": 1}


def test_vocabulary_shape():
    names = all_mnemonics()
    assert UNKNOWN in names
    assert "cmps" not in names and "cmp" in names
    assert "movtmi" in names and "svcmi" in names and "subs" in names


@pytest.mark.parametrize("mnemonic", [m for m in all_mnemonics() if m != UNKNOWN])
def test_encode_decode_round_trip(mnemonic):
    rng = np.random.default_rng(zlib.crc32(mnemonic.encode()))
    for _ in range(5):
        word = encode_instruction(mnemonic, rng)
        assert 0 <= word < 2**32
        assert decode_word(word) == mnemonic


def test_split_mnemonic():
    assert split_mnemonic("subsmi") == ("sub", 4, True)
    assert split_mnemonic("bls") == ("b", 9, False)
    assert split_mnemonic("bl") == ("bl", 14, False)
    with pytest.raises(ValueError):
        split_mnemonic("vadd")


capstone = pytest.importorskip("capstone")
_MD = capstone.Cs(capstone.CS_ARCH_ARM, capstone.CS_MODE_ARM)


@settings(max_examples=2000)
@given(st.integers(0, 2**32 - 1))
def test_decoder_agrees_with_capstone(word):
    # capstone refuses words with non-zero should-be-zero fields; the decoder
    # classifies those by opcode, so only words capstone decodes are compared
    if list(_MD.disasm(word.to_bytes(4, "little"), 0)):
        assert decode_word(word) == capstone_mnemonic(word, _MD)


def test_decoder_agrees_with_capstone_on_encoded_words():
    rng = np.random.default_rng(1)
    for m in all_mnemonics():
        if m != UNKNOWN:
            word = encode_instruction(m, rng)
            assert capstone_mnemonic(word, _MD) == m, hex(word)


# -- vectorization ----------------------------------------------------------

def ev(make_event, team, svc="s1", bh=None, ih=None, t=0):
    return make_event(team, "target", t, f"{team}{t}", svc, bh if bh is not None else {1: 1},
                      ih if ih is not None else {})


def test_space_layout(event_factory):
    events = [ev(event_factory, "a", "web", {0: 3, 255: 1}, {"mov": 2, "bl": 2}),
              ev(event_factory, "b", "db", {}, {"cmp": 1}, t=1)]
    space = build_feature_space(events)
    assert space.mnemonic_vocab == ("bl", "cmp", "mov", OOV)
    assert space.svc_vocab == ("db", "web")
    assert space.dimension == 256 + 4 + 2
    X, y = vectorize_many(events, space)
    assert list(y) == ["a", "b"]
    assert X[0, 0] == 0.75 and X[0, 255] == 0.25
    assert X[0, 256:260].tolist() == [0.5, 0.0, 0.5, 0.0]
    assert X[0, 260:].tolist() == [0.0, 1.0]
    assert X[1, :256].sum() == 0.0
    assert len(space.feature_names()) == space.dimension


def test_unseen_mnemonic_and_service(event_factory):
    space = build_feature_space([ev(event_factory, "a", "web", ih={"mov": 1})])
    v = vectorize(ev(event_factory, "b", "new", ih={"mov": 1, "svc": 3}), space)
    assert v.label == "b"
    assert v.values[space.inst_offset:space.svc_offset].tolist() == [0.25, 0.75]
    assert v.values[space.svc_offset:].sum() == 0.0


def test_raw_counts_mode(event_factory):
    space = build_feature_space([ev(event_factory, "a", bh={7: 4}, ih={"mov": 3})], normalize=False)
    x = vectorize(ev(event_factory, "a", bh={7: 4}, ih={"mov": 3}), space).values
    assert x[7] == 4 and x[256] == 3


@given(st.lists(st.dictionaries(st.integers(0, 255), st.integers(1, 50), max_size=10), min_size=1, max_size=10))
def test_normalized_blocks_sum_to_one(hists):
    from conftest import make_event
    events = [make_event("a", "t", i, str(i), "s", h, {"mov": 1} if h else {}) for i, h in enumerate(hists)]
    X, _ = vectorize_many(events, build_feature_space(events))
    for row, h in zip(X, hists):
        assert row[:256].sum() == pytest.approx(1.0 if h else 0.0)
        assert row[256:].min() >= 0


def test_space_serialization_and_validation():
    space = FeatureSpace(("mov", OOV), ("web",))
    assert FeatureSpace.from_dict(space.to_dict()) == space
    with pytest.raises(ValueError):
        FeatureSpace(("mov",), ())
    with pytest.raises(ValueError):
        FeatureSpace(("mov", "bl", OOV), ())
    with pytest.raises(EmptyTrainingSetError):
        build_feature_space([])


def test_event_vectorizer_estimator(event_factory):
    from sklearn.base import clone
    events = [ev(event_factory, "a", "web", ih={"mov": 1}), ev(event_factory, "b", "db", t=1)]
    vec = EventVectorizer()
    X = vec.fit_transform(events)
    assert X.shape == (2, vec.n_features_out_)
    assert np.array_equal(X, vectorize_many(events, vec.space_)[0])
    assert list(event_labels(events)) == ["a", "b"]
    assert vec.get_feature_names_out()[0] == "byte_0x00"
    assert clone(vec).get_params() == {"normalize": True}


@given(st.binary(min_size=1, max_size=200), st.integers(2, 5))
def test_byte_block_is_scale_free(payload, k):
    from conftest import make_event
    from ctf_attribution.features.payload import sparse_byte_histogram as sbh
    one = make_event("a", "t", 0, "x", "s", sbh(payload), arm_instruction_histogram(payload))
    many = make_event("a", "t", 1, "y", "s", sbh(payload * k), arm_instruction_histogram(payload * k))
    space = build_feature_space([one])
    x1, xk = vectorize(one, space).values, vectorize(many, space).values
    assert np.allclose(x1[:256], xk[:256], rtol=0, atol=1e-12)

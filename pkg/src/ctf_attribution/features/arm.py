"""A32 instruction classification down to the mnemonic level.

Only the opcode family is recovered; operands are ignored.  Mnemonics follow
the unified assembler syntax printed by common disassemblers: base opcode,
then ``s`` when a data-processing or multiply form sets flags, then the
condition code (omitted for "always").  ``tst``/``teq``/``cmp``/``cmn``
always set flags and never carry the ``s``.
"""

from __future__ import annotations

from collections import Counter

import numpy as np

UNKNOWN = "unknown"

CONDITIONS = ("eq", "ne", "hs", "lo", "mi", "pl", "vs", "vc",
              "hi", "ls", "ge", "lt", "gt", "le", "")

DATA_PROCESSING = ("and", "eor", "sub", "rsb", "add", "adc", "sbc", "rsc",
                   "tst", "teq", "cmp", "cmn", "orr", "mov", "bic", "mvn")
COMPARES = frozenset(("tst", "teq", "cmp", "cmn"))
MULTIPLY = {0: "mul", 1: "mla", 4: "umull", 5: "umlal", 6: "smull", 7: "smlal"}

BASES = DATA_PROCESSING + ("movw", "movt") + tuple(MULTIPLY.values()) + (
    "ldr", "str", "ldrb", "strb", "ldm", "stm", "b", "bl", "bx", "svc")
FLAG_SETTING = frozenset(set(DATA_PROCESSING) - COMPARES) | frozenset(MULTIPLY.values())


def _name(base: str, cond: int, s: bool = False) -> str:
    return base + ("s" if s else "") + CONDITIONS[cond]


def decode_word(word: int) -> str:
    """Mnemonic for one 32-bit A32 instruction word, or ``"unknown"``."""
    cond = word >> 28
    if cond == 0xF:
        return UNKNOWN
    op1 = (word >> 25) & 0x7
    s = bool(word & (1 << 20))

    if op1 == 0:
        if word & 0x0FFFFFF0 == 0x012FFF10:
            return _name("bx", cond)
        if word & 0x0F0000F0 == 0x00000090:
            base = MULTIPLY.get((word >> 21) & 0x7)
            return _name(base, cond, s) if base else UNKNOWN
        if word & 0x90 == 0x90:
            # halfword / doubleword transfers and swaps
            return UNKNOWN
        opcode = (word >> 21) & 0xF
        if 8 <= opcode <= 11 and not s:
            # miscellaneous space: mrs, msr, clz, bkpt, ...
            return UNKNOWN
        base = DATA_PROCESSING[opcode]
        return _name(base, cond, s and base not in COMPARES)

    if op1 == 1:
        opcode = (word >> 21) & 0xF
        if 8 <= opcode <= 11 and not s:
            if opcode == 8:
                return _name("movw", cond)
            if opcode == 10:
                return _name("movt", cond)
            return UNKNOWN
        base = DATA_PROCESSING[opcode]
        return _name(base, cond, s and base not in COMPARES)

    if op1 == 2 or (op1 == 3 and not word & 0x10):
        load = bool(word & (1 << 20))
        byte = bool(word & (1 << 22))
        base = ("ldr" if load else "str") + ("b" if byte else "")
        return _name(base, cond)

    if op1 == 4:
        return _name("ldm" if s else "stm", cond)

    if op1 == 5:
        return _name("bl" if word & (1 << 24) else "b", cond)

    if op1 == 7 and word & (1 << 24):
        return _name("svc", cond)

    return UNKNOWN


def iter_words(payload: bytes):
    """Little-endian 32-bit words at offsets 0, 4, 8, ...; a short tail is ignored."""
    n = len(payload) // 4
    if n == 0:
        return np.empty(0, dtype=np.uint32)
    return np.frombuffer(payload[: n * 4], dtype="<u4")


def arm_instruction_histogram(payload: bytes) -> dict[str, int]:
    counts = Counter(decode_word(int(w)) for w in iter_words(payload))
    return dict(counts)


def all_mnemonics() -> list[str]:
    """Every mnemonic the decoder can emit, ``unknown`` included."""
    names = {UNKNOWN}
    for base in BASES:
        for cond in range(15):
            names.add(_name(base, cond))
            if base in FLAG_SETTING:
                names.add(_name(base, cond, True))
    return sorted(names)


# -- encoding ---------------------------------------------------------------

def split_mnemonic(mnemonic: str) -> tuple[str, int, bool]:
    """Inverse of the naming rule: (base, condition index, flag-setting)."""
    for cond_idx, cond in enumerate(CONDITIONS):
        if cond and not mnemonic.endswith(cond):
            continue
        stem = mnemonic[: len(mnemonic) - len(cond)] if cond else mnemonic
        if stem in BASES:
            return stem, cond_idx, False
        if stem.endswith("s") and stem[:-1] in FLAG_SETTING:
            return stem[:-1], cond_idx, True
    raise ValueError(f"not an encodable mnemonic: {mnemonic!r}")


def encode_instruction(mnemonic: str, rng: np.random.Generator | None = None) -> int:
    """A representative instruction word that decodes to ``mnemonic``.

    Register and immediate fields are drawn from ``rng`` so that repeated
    encodings of one mnemonic produce varied bytes.
    """
    base, cond, s = split_mnemonic(mnemonic)
    rng = rng if rng is not None else np.random.default_rng(0)
    r = lambda hi: int(rng.integers(0, hi))  # noqa: E731
    word = cond << 28

    if base in DATA_PROCESSING:
        opcode = DATA_PROCESSING.index(base)
        if base in COMPARES:
            s = True
        rn = 0 if base in ("mov", "mvn") else r(13)
        return word | (1 << 25) | (opcode << 21) | (int(s) << 20) | (rn << 16) | (r(13) << 12) | r(256)
    if base in ("movw", "movt"):
        opcode = 8 if base == "movw" else 10
        return word | (1 << 25) | (opcode << 21) | (r(16) << 16) | (r(13) << 12) | r(4096)
    if base in MULTIPLY.values():
        op = next(k for k, v in MULTIPLY.items() if v == base)
        # distinct registers keep the long forms well defined
        rd, rn, rs, rm = 4, 5, 6, r(4)
        return word | (op << 21) | (int(s) << 20) | (rd << 16) | (rn << 12) | (rs << 8) | 0x90 | rm
    if base in ("ldr", "str", "ldrb", "strb"):
        load = base.startswith("ldr")
        byte = base.endswith("b")
        return (word | 0x05800000 | (int(byte) << 22) | (int(load) << 20)
                | (r(13) << 16) | (r(13) << 12) | r(4096))
    if base in ("ldm", "stm"):
        rn = 13
        reglist = (r(0x1FFF) + 1) & ~(1 << rn)
        return word | 0x08800000 | (int(base == "ldm") << 20) | (rn << 16) | (reglist or 1)
    if base in ("b", "bl"):
        return word | 0x0A000000 | (int(base == "bl") << 24) | r(1 << 24)
    if base == "bx":
        return word | 0x012FFF10 | r(15)
    if base == "svc":
        return word | 0x0F000000 | r(1 << 24)
    raise ValueError(f"not an encodable mnemonic: {mnemonic!r}")

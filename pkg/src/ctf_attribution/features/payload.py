"""Per-payload features: md5 digest, byte histogram, instruction histogram."""

from __future__ import annotations

import hashlib
from typing import NamedTuple

import numpy as np

from .arm import arm_instruction_histogram


def md5_digest(payload: bytes) -> str:
    return hashlib.md5(payload).hexdigest()


def byte_histogram(payload: bytes) -> np.ndarray:
    """Length-256 integer array; entry ``b`` counts occurrences of byte ``b``."""
    return np.bincount(np.frombuffer(payload, dtype=np.uint8), minlength=256).astype(np.int64)


def sparse_byte_histogram(payload: bytes) -> dict[int, int]:
    counts = byte_histogram(payload)
    nz = np.flatnonzero(counts)
    return {int(b): int(counts[b]) for b in nz}


class PayloadFeatures(NamedTuple):
    payload_hash: str
    byte_hist: dict[int, int]
    inst_hist: dict[str, int]


def payload_features(payload: bytes) -> PayloadFeatures:
    return PayloadFeatures(
        md5_digest(payload),
        sparse_byte_histogram(payload),
        arm_instruction_histogram(payload),
    )

"""Fixed-length numeric encoding of attack events.

A vector is three blocks laid end to end: 256 byte frequencies, one slot per
training mnemonic plus a trailing out-of-vocabulary slot, and a one-hot
service indicator.  The byte and instruction blocks are L1-normalised unless
``normalize=False``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ..events import AttackEvent
from ..exceptions import EmptyTrainingSetError

OOV = "<oov>"
N_BYTES = 256


@dataclass(frozen=True)
class FeatureSpace:
    mnemonic_vocab: tuple[str, ...]  # sorted mnemonics, then OOV
    svc_vocab: tuple[str, ...]
    normalize: bool = True

    def __post_init__(self):
        words = self.mnemonic_vocab[:-1]
        if not self.mnemonic_vocab or self.mnemonic_vocab[-1] != OOV:
            raise ValueError("mnemonic vocabulary must end with the OOV slot")
        if list(words) != sorted(set(words)) or list(self.svc_vocab) != sorted(set(self.svc_vocab)):
            raise ValueError("vocabularies must be sorted and duplicate-free")
        object.__setattr__(self, "_mnem_index", {m: i for i, m in enumerate(words)})
        object.__setattr__(self, "_svc_index", {s: i for i, s in enumerate(self.svc_vocab)})

    @property
    def dimension(self) -> int:
        return N_BYTES + len(self.mnemonic_vocab) + len(self.svc_vocab)

    @property
    def inst_offset(self) -> int:
        return N_BYTES

    @property
    def svc_offset(self) -> int:
        return N_BYTES + len(self.mnemonic_vocab)

    def feature_names(self) -> list[str]:
        return ([f"byte_0x{b:02x}" for b in range(N_BYTES)]
                + [f"inst_{m}" for m in self.mnemonic_vocab]
                + [f"svc_{s}" for s in self.svc_vocab])

    def fill(self, event: AttackEvent, row: np.ndarray) -> None:
        """Write the encoding of ``event`` into the zeroed ``row``."""
        bh = event.byte_hist
        if bh:
            idx = np.fromiter(bh.keys(), dtype=np.intp, count=len(bh))
            vals = np.fromiter(bh.values(), dtype=np.float64, count=len(bh))
            row[idx] = vals / vals.sum() if self.normalize else vals
        ih = event.inst_hist
        if ih:
            oov = len(self.mnemonic_vocab) - 1
            total = 0
            for m, n in ih.items():
                row[N_BYTES + self._mnem_index.get(m, oov)] += n
                total += n
            if self.normalize:
                row[N_BYTES:self.svc_offset] /= total
        j = self._svc_index.get(event.svc)
        if j is not None:
            row[self.svc_offset + j] = 1.0

    def to_dict(self) -> dict:
        return {"mnemonic_vocab": list(self.mnemonic_vocab),
                "svc_vocab": list(self.svc_vocab),
                "normalize": self.normalize}

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureSpace":
        return cls(tuple(d["mnemonic_vocab"]), tuple(d["svc_vocab"]), bool(d.get("normalize", True)))


class FeatureVector(NamedTuple):
    values: np.ndarray
    label: str


def build_feature_space(events: Iterable[AttackEvent], normalize: bool = True) -> FeatureSpace:
    mnemonics: set[str] = set()
    services: set[str] = set()
    n = 0
    for ev in events:
        mnemonics.update(ev.inst_hist)
        services.add(ev.svc)
        n += 1
    if n == 0:
        raise EmptyTrainingSetError("cannot build a feature space from zero events")
    mnemonics.discard(OOV)
    return FeatureSpace(tuple(sorted(mnemonics)) + (OOV,), tuple(sorted(services)), normalize)


def vectorize(event: AttackEvent, space: FeatureSpace) -> FeatureVector:
    row = np.zeros(space.dimension)
    space.fill(event, row)
    return FeatureVector(row, event.from_team)


def vectorize_many(events: Sequence[AttackEvent], space: FeatureSpace) -> tuple[np.ndarray, np.ndarray]:
    X = np.zeros((len(events), space.dimension))
    for i, ev in enumerate(events):
        space.fill(ev, X[i])
    y = np.array([ev.from_team for ev in events], dtype=object)
    return X, y


class EventVectorizer(TransformerMixin, BaseEstimator):
    """Transformer from lists of :class:`AttackEvent` to a dense matrix.

    ``fit`` learns the mnemonic and service vocabularies; ``transform``
    projects events onto them.  Labels (attacking team) are available via
    :func:`event_labels`.
    """

    def __init__(self, normalize=True):
        self.normalize = normalize

    def fit(self, events, y=None):
        self.space_ = build_feature_space(events, normalize=self.normalize)
        self.n_features_out_ = self.space_.dimension
        return self

    def transform(self, events):
        check_is_fitted(self, "space_")
        return vectorize_many(list(events), self.space_)[0]

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "space_")
        return np.asarray(self.space_.feature_names(), dtype=object)


def event_labels(events: Iterable[AttackEvent]) -> np.ndarray:
    return np.array([ev.from_team for ev in events], dtype=object)

"""Token vocabulary with reserved symbols."""

from __future__ import annotations

from collections import Counter
from typing import Iterable

PAD, UNK, MASK, BOS, EOS = "<pad>", "<unk>", "<mask>", "<bos>", "<eos>"
RESERVED = (PAD, UNK, MASK, BOS, EOS)


class Vocabulary:
    """Bijective token <-> id mapping; ids 0..4 are PAD/UNK/MASK/BOS/EOS."""

    def __init__(self, tokens: Iterable[str] = ()):
        self._token_to_id: dict[str, int] = {}
        self._id_to_token: list[str] = []
        for tok in RESERVED:
            self._add(tok)
        for tok in tokens:
            self._add(tok)

    def _add(self, token: str):
        if token in self._token_to_id:
            raise ValueError(f"duplicate token {token!r}")
        self._token_to_id[token] = len(self._id_to_token)
        self._id_to_token.append(token)

    @property
    def pad_id(self) -> int:
        return 0

    @property
    def unk_id(self) -> int:
        return 1

    @property
    def mask_id(self) -> int:
        return 2

    @property
    def bos_id(self) -> int:
        return 3

    @property
    def eos_id(self) -> int:
        return 4

    def __len__(self) -> int:
        return len(self._id_to_token)

    def __contains__(self, token: str) -> bool:
        return token in self._token_to_id

    def id_of(self, token: str) -> int:
        return self._token_to_id.get(token, self.unk_id)

    def token_of(self, idx: int) -> str:
        return self._id_to_token[idx]

    def encode(self, tokens: Iterable[str]) -> list[int]:
        return [self.id_of(tok) for tok in tokens]

    def content_tokens(self) -> list[str]:
        return self._id_to_token[len(RESERVED) :]

    def to_dict(self) -> dict:
        return {"tokens": self.content_tokens()}

    @classmethod
    def from_dict(cls, data: dict) -> "Vocabulary":
        return cls(data["tokens"])

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocabulary) and self._id_to_token == other._id_to_token


def build_vocab(corpus: Iterable[Iterable[str]], min_freq: int = 1) -> Vocabulary:
    """Build a vocabulary from token sequences.

    Content ids are assigned in descending frequency order, ties broken
    lexicographically; tokens below ``min_freq`` are dropped. Reserved
    symbols always come first.
    """
    if min_freq < 1:
        raise ValueError("min_freq must be >= 1")
    counts: Counter[str] = Counter()
    empty = True
    for sequence in corpus:
        empty = False
        counts.update(sequence)
    if empty:
        raise ValueError("corpus must contain at least one sequence")
    kept = sorted(
        (tok for tok, n in counts.items() if n >= min_freq and tok not in RESERVED),
        key=lambda tok: (-counts[tok], tok),
    )
    return Vocabulary(kept)

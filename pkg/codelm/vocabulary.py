from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import VocabularyError

PAD_ID = 0
UNK_ID = 1
PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"
RESERVED = (PAD_TOKEN, UNK_TOKEN)


@dataclass(slots=True)
class Vocabulary:
    token_to_id: dict[str, int] = field(default_factory=lambda: {PAD_TOKEN: PAD_ID, UNK_TOKEN: UNK_ID})
    id_to_token: list[str] = field(default_factory=lambda: list(RESERVED))

    @property
    def size(self) -> int:
        return len(self.id_to_token)

    @property
    def is_empty(self) -> bool:
        """True when only the reserved slots exist."""

        return self.size == len(RESERVED)

    def __len__(self) -> int:
        return self.size

    def __contains__(self, token: str) -> bool:
        return token.lower() in self.token_to_id

    def lookup(self, token: str) -> int:
        return self.token_to_id.get(token.lower(), UNK_ID)

    def token(self, idx: int) -> str:
        return self.id_to_token[idx]

    def add(self, token: str) -> int:
        key = token.lower()
        if not key:
            raise VocabularyError("empty token cannot enter the vocabulary")
        existing = self.token_to_id.get(key)
        if existing is not None:
            return existing
        idx = len(self.id_to_token)
        self.token_to_id[key] = idx
        self.id_to_token.append(key)
        return idx

    @classmethod
    def from_tokens(cls, tokens: Sequence[str]) -> "Vocabulary":
        """Rebuild from an id-ordered token list whose first entries are the reserved slots."""

        if tuple(tokens[: len(RESERVED)]) != RESERVED:
            raise VocabularyError("vocabulary must start with the reserved <pad>, <unk> entries")
        vocab = cls()
        for token in tokens[len(RESERVED) :]:
            if token in vocab.token_to_id:
                raise VocabularyError(f"duplicate vocabulary entry {token!r}")
            vocab.add(token)
        return vocab


@dataclass(slots=True, frozen=True)
class VocabStats:
    v_norm: int
    v_regularized: int
    percent_decrease: float


def build_vocab(streams: Iterable[Iterable[str]]) -> Vocabulary:
    """Assign ids by first occurrence after the reserved slots."""

    vocab = Vocabulary()
    for stream in streams:
        for token in stream:
            vocab.add(token)
    return vocab


def vectorize(stream: Iterable[str], vocab: Vocabulary) -> list[int]:
    return [vocab.lookup(token) for token in stream]


def unique_count(streams: Iterable[Iterable[str]]) -> int:
    return len({token.lower() for stream in streams for token in stream})


def vocab_stats(
    raw_streams: Iterable[Iterable[str]], regularized_streams: Iterable[Iterable[str]]
) -> VocabStats:
    v_norm = unique_count(raw_streams)
    v_reg = unique_count(regularized_streams)
    return stats_from_counts(v_norm, v_reg)


def stats_from_counts(v_norm: int, v_regularized: int) -> VocabStats:
    if v_norm == 0:
        raise VocabularyError("V_Norm is zero; nothing to compare")
    decrease = round(100.0 * (v_norm - v_regularized) / v_norm, 2)
    return VocabStats(v_norm=v_norm, v_regularized=v_regularized, percent_decrease=decrease)


def save_vocab(vocab: Vocabulary, path: str | Path) -> None:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(vocab.id_to_token) + "\n", encoding="utf-8")


def load_vocab(path: str | Path) -> Vocabulary:
    lines = Path(path).read_text(encoding="utf-8").split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return Vocabulary.from_tokens(lines)

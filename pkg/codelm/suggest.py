from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .container import ModelBundle
from .errors import InputError
from .model import forward
from .pipeline import tokenize_snippet
from .vocabulary import PAD_ID, UNK_ID, vectorize

STOP_TOKENS = frozenset({";", "{", "}"})
StopReason = Literal["terminator", "max_steps", "empty_context"]


@dataclass(slots=True, frozen=True)
class Suggestion:
    token: str
    probability: float
    rank: int


@dataclass(slots=True)
class GenerationResult:
    tokens: list[str] = field(default_factory=list)
    stop_reason: StopReason = "max_steps"

    @property
    def text(self) -> str:
        return " ".join(self.tokens)


def _context_ids(bundle: ModelBundle, tokens: Sequence[str]) -> list[int]:
    ids = vectorize(tokens, bundle.vocab)
    return ids[-bundle.config.n :]


def rank_next(bundle: ModelBundle, context_ids: Sequence[int], k: int) -> list[Suggestion]:
    """Top-k non-reserved tokens for an already vectorized context."""

    probs, _ = forward(list(context_ids), bundle.params)
    scores = probs.copy()
    scores[[PAD_ID, UNK_ID]] = -np.inf
    # stable sort on -p keeps ascending id order inside ties
    order = np.argsort(-scores, kind="stable")
    available = bundle.params.vocab_size - 2
    suggestions: list[Suggestion] = []
    for rank, idx in enumerate(order[: min(k, available)], start=1):
        suggestions.append(Suggestion(bundle.vocab.token(int(idx)), float(probs[idx]), rank))
    return suggestions


def suggest(bundle: ModelBundle, raw_code: str, k: int = 5) -> list[Suggestion]:
    if k < 1:
        raise InputError(f"k must be >= 1, got {k}")
    tokens = tokenize_snippet(raw_code, bundle.config.token_mode)
    if not tokens:
        raise InputError("input contains no code tokens")
    return rank_next(bundle, _context_ids(bundle, tokens), k)


def generate(bundle: ModelBundle, raw_code: str, max_steps: int = 20) -> GenerationResult:
    """Greedy line completion until a statement terminator or max_steps."""

    if max_steps < 1:
        raise InputError(f"max_steps must be >= 1, got {max_steps}")
    tokens = tokenize_snippet(raw_code, bundle.config.token_mode)
    return generate_from_ids(bundle, _context_ids(bundle, tokens), max_steps)


def generate_from_ids(bundle: ModelBundle, context_ids: Sequence[int], max_steps: int = 20) -> GenerationResult:
    if not context_ids or bundle.params.vocab_size <= 2:
        return GenerationResult([], "empty_context")

    context = list(context_ids)[-bundle.config.n :]
    result = GenerationResult()
    for _ in range(max_steps):
        best = rank_next(bundle, context, 1)[0]
        result.tokens.append(best.token)
        if best.token in STOP_TOKENS:
            result.stop_reason = "terminator"
            return result
        context = (context + [bundle.vocab.lookup(best.token)])[-bundle.config.n :]
    result.stop_reason = "max_steps"
    return result

from __future__ import annotations

from typing import Sequence

from .suggest import GenerationResult, Suggestion
from .vocabulary import VocabStats


def fmt_probability(value: float, precision: int = 4) -> str:
    """Probabilities as fixed-point, switching to scientific notation below 1e-4."""
    if 0 < value < 10 ** (-precision):
        return f"{value:.2e}"
    return f"{value:.{precision}f}"


def format_suggestions(suggestions: Sequence[Suggestion]) -> str:
    if not suggestions:
        return "no suggestions"
    width = max(len(item.token) for item in suggestions)
    lines = [
        f"{item.rank:>3}. {item.token:<{width}}  {fmt_probability(item.probability)}"
        for item in suggestions
    ]
    return "\n".join(lines)


def format_generation(result: GenerationResult) -> str:
    body = result.text or "(empty)"
    return f"{body}\n[stop: {result.stop_reason}, tokens: {len(result.tokens)}]"


def format_vocab_stats(stats: VocabStats) -> str:
    return (
        f"V_Norm={stats.v_norm} V_Regularized={stats.v_regularized} "
        f"decrease={stats.percent_decrease:.2f}%"
    )

from __future__ import annotations

import time
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ._loguru import logger
from .config import TrainConfig
from .errors import ConfigError, DivergenceError
from .model import AdamState, ModelParams, adam_update, backward_batch, batch_losses, forward_batch

Stream = Sequence[int] | Sequence[Sequence[int]]


@dataclass(slots=True, frozen=True)
class Origin:
    file: str
    line: int
    index: int


@dataclass(slots=True, frozen=True)
class TrainingExample:
    context: tuple[int, ...]
    target: int
    origin: Origin | None = None


@dataclass(slots=True)
class TrainResult:
    params: ModelParams
    history: list[float] = field(default_factory=list)
    adam: AdamState = field(default_factory=AdamState)


def _as_lines(stream: Stream) -> list[list[int]]:
    if not stream:
        return []
    first = stream[0]
    if isinstance(first, (int, np.integer)):
        return [[int(tok) for tok in stream]]  # type: ignore[union-attr]
    return [[int(tok) for tok in line] for line in stream]  # type: ignore[union-attr]


def _flatten(lines: list[list[int]]) -> tuple[list[int], list[tuple[int, int]]]:
    ids: list[int] = []
    where: list[tuple[int, int]] = []
    for line_no, line in enumerate(lines, start=1):
        for index, tok in enumerate(line):
            ids.append(tok)
            where.append((line_no, index))
    return ids, where


def gen_variable_context(
    stream: Stream,
    n: int = 20,
    *,
    reset_per_line: bool = False,
    file: str = "",
) -> list[TrainingExample]:
    """Growing-prefix examples, capped at n tokens of context.

    By default the context runs across line boundaries, giving T-1 examples
    for a file of T tokens. With ``reset_per_line`` each line starts afresh.
    """

    if n < 1:
        raise ConfigError(f"context bound n must be >= 1, got {n}")
    lines = _as_lines(stream)
    examples: list[TrainingExample] = []
    if reset_per_line:
        for line_no, line in enumerate(lines, start=1):
            for pos in range(1, len(line)):
                context = tuple(line[max(0, pos - n) : pos])
                examples.append(TrainingExample(context, line[pos], Origin(file, line_no, pos)))
        return examples

    ids, where = _flatten(lines)
    for pos in range(1, len(ids)):
        context = tuple(ids[max(0, pos - n) : pos])
        line_no, index = where[pos]
        examples.append(TrainingExample(context, ids[pos], Origin(file, line_no, index)))
    return examples


def gen_fixed_context(stream: Stream, n: int = 20, *, file: str = "") -> list[TrainingExample]:
    """Sliding window of exactly n tokens; T-n examples."""

    if n < 1:
        raise ConfigError(f"context bound n must be >= 1, got {n}")
    ids, where = _flatten(_as_lines(stream))
    if len(ids) <= n:
        logger.warning("Stream of {count} tokens is too short for a fixed window of {n}", count=len(ids), n=n)
        return []
    examples: list[TrainingExample] = []
    for pos in range(n, len(ids)):
        line_no, index = where[pos]
        examples.append(TrainingExample(tuple(ids[pos - n : pos]), ids[pos], Origin(file, line_no, index)))
    return examples


def gen_examples(stream: Stream, config: TrainConfig, *, file: str = "") -> list[TrainingExample]:
    if config.context_mode == "fixed":
        return gen_fixed_context(stream, config.n, file=file)
    return gen_variable_context(stream, config.n, reset_per_line=config.reset_per_line, file=file)


def make_batches(
    examples: Sequence[TrainingExample],
    batch_size: int,
    rng: np.random.Generator | None = None,
) -> list[list[TrainingExample]]:
    """Bucket by context length, chunk each bucket, then shuffle batch order."""

    order = rng.permutation(len(examples)) if rng is not None else np.arange(len(examples))
    buckets: dict[int, list[TrainingExample]] = defaultdict(list)
    for idx in order:
        example = examples[int(idx)]
        buckets[len(example.context)].append(example)

    batches: list[list[TrainingExample]] = []
    for length in sorted(buckets):
        bucket = buckets[length]
        for start in range(0, len(bucket), batch_size):
            batches.append(bucket[start : start + batch_size])
    if rng is not None:
        batch_order = rng.permutation(len(batches))
        batches = [batches[int(i)] for i in batch_order]
    return batches


def _check_compatible(model: ModelParams, config: TrainConfig) -> None:
    mismatches = []
    if model.embed_dim != config.embed_dim:
        mismatches.append(f"embed_dim {model.embed_dim} != {config.embed_dim}")
    if model.hidden_dim != config.hidden_dim:
        mismatches.append(f"hidden_dim {model.hidden_dim} != {config.hidden_dim}")
    if model.cell_kind != config.cell_kind:
        mismatches.append(f"cell_kind {model.cell_kind} != {config.cell_kind}")
    if mismatches:
        raise ConfigError("model does not match config: " + ", ".join(mismatches))


def _batch_gradients(
    params: ModelParams,
    contexts: np.ndarray,
    targets: np.ndarray,
    mask: np.ndarray | None,
) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    probs, cache = forward_batch(contexts, params, training=mask is not None, dropout_mask=mask)
    grads = backward_batch(cache, targets, params)
    return batch_losses(probs, targets), grads


def _parallel_gradients(
    pool: ThreadPoolExecutor,
    workers: int,
    params: ModelParams,
    contexts: np.ndarray,
    targets: np.ndarray,
    mask: np.ndarray | None,
) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    splits = [idx for idx in np.array_split(np.arange(len(targets)), workers) if len(idx)]
    futures = [
        pool.submit(
            _batch_gradients,
            params,
            contexts[idx],
            targets[idx],
            mask[idx] if mask is not None else None,
        )
        for idx in splits
    ]
    total = len(targets)
    losses: list[np.ndarray] = []
    grads: dict[str, np.ndarray] = {}
    for idx, future in zip(splits, futures):
        part_losses, part_grads = future.result()
        losses.append(part_losses)
        weight = len(idx) / total
        for name, grad in part_grads.items():
            if name in grads:
                grads[name] += weight * grad
            else:
                grads[name] = weight * grad
    return np.concatenate(losses), grads


def train(model: ModelParams, examples: Sequence[TrainingExample], config: TrainConfig) -> TrainResult:
    """Adam over bucketed mini-batches; loss history holds mean bits per example."""

    _check_compatible(model, config)
    params = model.copy()
    result = TrainResult(params=params)
    if config.epochs == 0:
        return result
    if not examples:
        raise ConfigError("no training examples")
    for example in examples:
        if not 0 <= example.target < params.vocab_size:
            raise ConfigError(f"target id {example.target} outside vocabulary of {params.vocab_size}")

    rng = np.random.default_rng(config.seed)
    pool = ThreadPoolExecutor(max_workers=config.workers) if config.workers > 1 else None
    try:
        for epoch in range(1, config.epochs + 1):
            started = time.perf_counter()
            total = 0.0
            for batch_no, batch in enumerate(make_batches(examples, config.batch_size, rng), start=1):
                contexts = np.array([ex.context for ex in batch], dtype=np.int64)
                targets = np.array([ex.target for ex in batch], dtype=np.int64)
                mask = None
                if config.dropout_rate > 0:
                    keep = 1.0 - config.dropout_rate
                    mask = (rng.random((len(batch), params.hidden_dim)) < keep) / keep
                if pool is not None:
                    losses, grads = _parallel_gradients(pool, config.workers, params, contexts, targets, mask)
                else:
                    losses, grads = _batch_gradients(params, contexts, targets, mask)
                if not np.all(np.isfinite(losses)):
                    logger.error("Loss diverged at epoch {epoch}, batch {batch}", epoch=epoch, batch=batch_no)
                    raise DivergenceError("non-finite loss", epoch=epoch, batch=batch_no)
                try:
                    adam_update(params, grads, result.adam, config.learning_rate)
                except DivergenceError as exc:
                    raise DivergenceError(str(exc), epoch=epoch, batch=batch_no) from exc
                total += float(losses.sum())
            mean_loss = total / len(examples)
            result.history.append(mean_loss)
            logger.info(
                "epoch {epoch}/{epochs} loss={loss:.4f} bits duration_ms={ms:.0f}",
                epoch=epoch,
                epochs=config.epochs,
                loss=mean_loss,
                ms=(time.perf_counter() - started) * 1000,
            )
    finally:
        if pool is not None:
            pool.shutdown()
    return result


def write_loss_history(history: Sequence[float], path: str | Path) -> None:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8") as fh:
        for epoch, value in enumerate(history, start=1):
            fh.write(f"{epoch} {value!r}\n")


def read_loss_history(path: str | Path) -> list[float]:
    values: list[float] = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            _, value = line.split()
            values.append(float(value))
    return values

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np
import pandas as pd
import yaml

from .errors import EvaluationError
from .model import PROB_FLOOR
from .trainer import TrainingExample
from .vocabulary import UNK_ID

DEFAULT_KS = (1, 3, 5, 10)


class ProbabilityModel(Protocol):
    def predict_proba(self, contexts: np.ndarray) -> np.ndarray:
        ...


@dataclass(slots=True)
class EvalReport:
    accuracy: dict[int, float]
    mrr: float
    cross_entropy_bits: float
    example_count: int
    model: str = ""
    context_mode: str = ""


def predict_table(model: ProbabilityModel, examples: Sequence[TrainingExample], batch_size: int = 512) -> np.ndarray:
    """Probability rows in example order, computed in same-length batches."""

    if not examples:
        raise EvaluationError("no examples to evaluate")
    by_length: dict[int, list[int]] = defaultdict(list)
    for idx, example in enumerate(examples):
        by_length[len(example.context)].append(idx)

    table: np.ndarray | None = None
    for length in sorted(by_length):
        indices = by_length[length]
        for start in range(0, len(indices), batch_size):
            chunk = indices[start : start + batch_size]
            contexts = np.array([examples[i].context for i in chunk], dtype=np.int64)
            probs = model.predict_proba(contexts)
            if table is None:
                table = np.empty((len(examples), probs.shape[1]), dtype=np.float64)
            table[chunk] = probs
    assert table is not None
    return table


def target_ranks(table: np.ndarray, targets: Sequence[int]) -> np.ndarray:
    """1-based full-vocabulary rank of each target; ties go to the smaller id.

    UNK targets get rank 0, meaning "never a hit".
    """

    targets_arr = np.asarray(targets, dtype=np.int64)
    if table.shape[0] != len(targets_arr):
        raise EvaluationError("table rows and targets differ in length")
    ids = np.arange(table.shape[1])
    target_probs = table[np.arange(len(targets_arr)), targets_arr][:, None]
    higher = table > target_probs
    tied_before = (table == target_probs) & (ids[None, :] < targets_arr[:, None])
    ranks = 1 + higher.sum(axis=1) + tied_before.sum(axis=1)
    ranks[targets_arr == UNK_ID] = 0
    return ranks


def accuracy_from_ranks(ranks: np.ndarray, k: int) -> float:
    if len(ranks) == 0:
        raise EvaluationError("no examples to evaluate")
    hits = (ranks >= 1) & (ranks <= k)
    return float(hits.sum()) / len(ranks)


def mrr_from_ranks(ranks: np.ndarray) -> float:
    if len(ranks) == 0:
        raise EvaluationError("no examples to evaluate")
    reciprocal = np.where(ranks > 0, 1.0 / np.maximum(ranks, 1), 0.0)
    return float(reciprocal.sum()) / len(ranks)


def cross_entropy_from_table(table: np.ndarray, targets: Sequence[int]) -> float:
    if len(targets) == 0:
        raise EvaluationError("no examples to evaluate")
    picked = table[np.arange(len(targets)), np.asarray(targets, dtype=np.int64)]
    return float(np.mean(-np.log2(np.maximum(picked, PROB_FLOOR))))


def top_k_accuracy(model: ProbabilityModel, examples: Sequence[TrainingExample], k: int) -> float:
    table = predict_table(model, examples)
    return accuracy_from_ranks(target_ranks(table, [ex.target for ex in examples]), k)


def mrr(model: ProbabilityModel, examples: Sequence[TrainingExample]) -> float:
    table = predict_table(model, examples)
    return mrr_from_ranks(target_ranks(table, [ex.target for ex in examples]))


def cross_entropy(model: ProbabilityModel, examples: Sequence[TrainingExample]) -> float:
    table = predict_table(model, examples)
    return cross_entropy_from_table(table, [ex.target for ex in examples])


def evaluate(
    model: ProbabilityModel,
    examples: Sequence[TrainingExample],
    ks: Sequence[int] = DEFAULT_KS,
    *,
    name: str = "",
    context_mode: str = "",
) -> EvalReport:
    table = predict_table(model, examples)
    targets = [ex.target for ex in examples]
    ranks = target_ranks(table, targets)
    return EvalReport(
        accuracy={int(k): accuracy_from_ranks(ranks, int(k)) for k in sorted(ks)},
        mrr=mrr_from_ranks(ranks),
        cross_entropy_bits=cross_entropy_from_table(table, targets),
        example_count=len(examples),
        model=name,
        context_mode=context_mode,
    )


def report_frame(reports: Sequence[EvalReport]) -> pd.DataFrame:
    rows = []
    for report in reports:
        row: dict[str, object] = {"model": report.model, "mode": report.context_mode}
        for k, value in sorted(report.accuracy.items()):
            row[f"acc@{k}"] = round(100.0 * value, 2)
        row["mrr"] = round(report.mrr, 3)
        row["bits"] = round(report.cross_entropy_bits, 3)
        row["examples"] = report.example_count
        rows.append(row)
    return pd.DataFrame(rows)


def compare_report(reports: Sequence[EvalReport]) -> str:
    """Aligned text table, one row per report in input order."""

    if not reports:
        raise EvaluationError("compare_report needs at least one report")
    return report_frame(reports).to_string(index=False)


def export_reports(reports: Sequence[EvalReport], path: str | Path) -> None:
    payload = [
        {
            "model": r.model,
            "context_mode": r.context_mode,
            "example_count": r.example_count,
            "accuracy": {int(k): float(v) for k, v in r.accuracy.items()},
            "mrr": float(r.mrr),
            "cross_entropy_bits": float(r.cross_entropy_bits),
        }
        for r in reports
    ]
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8") as fh:
        yaml.safe_dump({"reports": payload}, fh, allow_unicode=True, sort_keys=False)


def load_reports(path: str | Path) -> list[EvalReport]:
    with Path(path).open("r", encoding="utf-8") as fh:
        data = yaml.safe_load(fh) or {}
    reports = []
    for item in data.get("reports", []):
        reports.append(
            EvalReport(
                accuracy={int(k): float(v) for k, v in item["accuracy"].items()},
                mrr=float(item["mrr"]),
                cross_entropy_bits=float(item["cross_entropy_bits"]),
                example_count=int(item["example_count"]),
                model=str(item.get("model", "")),
                context_mode=str(item.get("context_mode", "")),
            )
        )
    return reports

from __future__ import annotations

import json
import random
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import pandas as pd

from ._loguru import logger
from .errors import CorpusError, SplitError


@dataclass(slots=True, frozen=True)
class SourceFile:
    path: Path
    project_id: str
    raw_text: str


@dataclass(slots=True)
class FoldSplit:
    fold_count: int
    assignment: dict[Path, int]
    test_fold: int = 0
    seed: int = 0

    def files_in(self, fold: int) -> list[Path]:
        return [path for path, idx in self.assignment.items() if idx == fold]

    def fold_sizes(self) -> list[int]:
        sizes = [0] * self.fold_count
        for idx in self.assignment.values():
            sizes[idx] += 1
        return sizes

    def is_test(self, path: Path) -> bool:
        return self.assignment.get(path) == self.test_fold

    def with_test_fold(self, fold: int) -> "FoldSplit":
        if not 0 <= fold < self.fold_count:
            raise SplitError(f"test fold {fold} outside [0, {self.fold_count})")
        return FoldSplit(self.fold_count, dict(self.assignment), fold, self.seed)


@dataclass(slots=True)
class ScanResult:
    files: list[SourceFile]
    skipped: list[Path] = field(default_factory=list)


def scan_corpus(root: str | Path, extension: str = ".java") -> list[SourceFile]:
    return scan_corpus_detailed(root, extension).files


def scan_corpus_detailed(root: str | Path, extension: str = ".java") -> ScanResult:
    """Collect every file under root ending with extension, sorted by path.

    The project id is the first directory below root; files placed directly
    in root belong to project "".
    """

    base = Path(root)
    if not base.is_dir():
        raise CorpusError(f"corpus root {base} does not exist or is not a directory")

    try:
        candidates = sorted(p for p in base.rglob(f"*{extension}") if p.is_file())
    except OSError as exc:
        raise CorpusError(f"cannot read corpus root {base}: {exc}") from exc

    result = ScanResult(files=[])
    for path in candidates:
        rel = path.relative_to(base)
        project = rel.parts[0] if len(rel.parts) > 1 else ""
        try:
            text = path.read_bytes().decode("utf-8")
        except UnicodeDecodeError:
            logger.warning("Skipping {path}: not valid UTF-8", path=path)
            result.skipped.append(path)
            continue
        except OSError as exc:
            logger.warning("Skipping {path}: {exc}", path=path, exc=exc)
            result.skipped.append(path)
            continue
        result.files.append(SourceFile(path=path, project_id=project, raw_text=text))
    return result


def split_folds(files: Sequence[SourceFile], fold_count: int = 10, seed: int = 0) -> FoldSplit:
    """Shuffle paths with a seeded generator and deal them round-robin."""

    _check_split_args(files, fold_count)
    paths = [item.path for item in files]
    random.Random(seed).shuffle(paths)
    assignment = {path: idx % fold_count for idx, path in enumerate(paths)}
    return FoldSplit(fold_count=fold_count, assignment=assignment, test_fold=0, seed=seed)


def split_folds_per_project(
    files: Sequence[SourceFile], fold_count: int = 10, seed: int = 0
) -> FoldSplit:
    """Spread every project over the folds while keeping global sizes balanced."""

    _check_split_args(files, fold_count)
    by_project: dict[str, list[Path]] = defaultdict(list)
    for item in files:
        by_project[item.project_id].append(item.path)

    rng = random.Random(seed)
    assignment: dict[Path, int] = {}
    counter = 0
    for project in sorted(by_project):
        paths = by_project[project]
        rng.shuffle(paths)
        for path in paths:
            assignment[path] = counter % fold_count
            counter += 1
    return FoldSplit(fold_count=fold_count, assignment=assignment, test_fold=0, seed=seed)


def _check_split_args(files: Sequence[SourceFile], fold_count: int) -> None:
    if fold_count < 2:
        raise SplitError(f"fold_count must be >= 2, got {fold_count}")
    if not files:
        raise SplitError("cannot split an empty file list")
    if fold_count > len(files):
        raise SplitError(f"fold_count {fold_count} exceeds file count {len(files)}")


def write_manifest(files: Iterable[SourceFile], split: FoldSplit, path: str | Path) -> None:
    """One JSON object per line: path, project_id, fold."""

    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8") as fh:
        for item in files:
            record = {
                "path": str(item.path),
                "project_id": item.project_id,
                "fold": split.assignment[item.path],
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def read_manifest(path: str | Path) -> list[dict[str, object]]:
    records: list[dict[str, object]] = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"manifest line {lineno} is not valid JSON: {exc}") from exc
            records.append(record)
    return records


def corpus_stats(files: Sequence[SourceFile], token_counts: dict[Path, int] | None = None) -> pd.DataFrame:
    """Per-project file count and min/max/mean/median of lines (and tokens) per file."""

    rows = []
    for item in files:
        row: dict[str, object] = {
            "project": item.project_id,
            "lines": sum(1 for line in item.raw_text.splitlines() if line.strip()),
        }
        if token_counts is not None:
            row["tokens"] = token_counts.get(item.path, 0)
        rows.append(row)

    columns = ["lines"] + (["tokens"] if token_counts is not None else [])
    if not rows:
        return pd.DataFrame(columns=["project", "files"])

    frame = pd.DataFrame(rows)
    grouped = frame.groupby("project", sort=True)
    stats = grouped[columns].agg(["min", "max", "mean", "median"])
    stats.columns = [f"{col}_{agg}" for col, agg in stats.columns]
    stats.insert(0, "files", grouped.size())
    return stats.reset_index()

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Sequence

from ._loguru import logger
from .config import TrainConfig
from .corpus import FoldSplit, SourceFile, scan_corpus, split_folds, split_folds_per_project
from .errors import InputError, LexError
from .lexer import Token, lex, scan
from .regularizer import TypeResolver, raw_lines, regularize_lines
from .sampler import CompilerHook, normalize_structure, sample_source, strip_comments, validate
from .trainer import TrainingExample, gen_examples
from .vocabulary import Vocabulary, vectorize

TokenMode = Literal["regularized", "raw"]


@dataclass(slots=True)
class TokenizedFile:
    path: Path
    project_id: str
    lines: list[list[str]]

    @property
    def token_count(self) -> int:
        return sum(len(line) for line in self.lines)


@dataclass(slots=True)
class PreparedCorpus:
    split: FoldSplit
    train: list[TokenizedFile]
    test: list[TokenizedFile]


def token_lines(
    tokens: Sequence[Token], token_mode: TokenMode, resolver: TypeResolver | None = None
) -> list[list[str]]:
    if token_mode == "raw":
        return raw_lines(tokens)
    return regularize_lines(tokens, resolver)


def tokenize_training_file(
    source: SourceFile, token_mode: TokenMode, compiler_hook: CompilerHook | None = None
) -> TokenizedFile | None:
    clean = sample_source(source.raw_text, source.path, compiler_hook=compiler_hook)
    if clean is None:
        return None
    return TokenizedFile(source.path, source.project_id, token_lines(lex(clean.text), token_mode))


def tokenize_test_file(source: SourceFile, token_mode: TokenMode) -> TokenizedFile | None:
    """Test files are normalized when valid, but never dropped for structure."""

    stripped = strip_comments(source.raw_text)
    if validate(stripped).ok:
        tokens = lex(normalize_structure(stripped, source.path).text)
    else:
        tokens, problems = scan(stripped)
        if problems:
            logger.warning("Skipping test file {path}: {msg}", path=source.path, msg=problems[0].message)
            return None
    return TokenizedFile(source.path, source.project_id, token_lines(tokens, token_mode))


def tokenize_snippet(
    text: str, token_mode: TokenMode = "regularized", resolver: TypeResolver | None = None
) -> list[str]:
    """Encode a user-typed fragment the way training files were encoded."""

    try:
        tokens = lex(strip_comments(text))
    except LexError as exc:
        raise InputError(str(exc)) from exc
    return [tok for line in token_lines(tokens, token_mode, resolver) for tok in line]


def prepare_corpus(
    root: str | Path,
    *,
    extension: str = ".java",
    fold_count: int = 10,
    test_fold: int = 0,
    seed: int = 0,
    per_project: bool = True,
    token_mode: TokenMode = "regularized",
    compiler_hook: CompilerHook | None = None,
) -> PreparedCorpus:
    files = scan_corpus(root, extension)
    splitter = split_folds_per_project if per_project else split_folds
    split = splitter(files, fold_count, seed).with_test_fold(test_fold)

    train: list[TokenizedFile] = []
    test: list[TokenizedFile] = []
    for source in files:
        if split.is_test(source.path):
            item = tokenize_test_file(source, token_mode)
            if item is not None:
                test.append(item)
        else:
            item = tokenize_training_file(source, token_mode, compiler_hook)
            if item is not None:
                train.append(item)
    logger.info(
        "Prepared corpus {root}: {train} training files, {test} test files ({dropped} dropped)",
        root=root,
        train=len(train),
        test=len(test),
        dropped=len(files) - len(train) - len(test),
    )
    return PreparedCorpus(split=split, train=train, test=test)


def vectorize_lines(lines: Sequence[Sequence[str]], vocab: Vocabulary) -> list[list[int]]:
    return [vectorize(line, vocab) for line in lines]


def build_examples(files: Sequence[TokenizedFile], vocab: Vocabulary, config: TrainConfig) -> list[TrainingExample]:
    examples: list[TrainingExample] = []
    for item in files:
        ids = vectorize_lines(item.lines, vocab)
        if not any(ids):
            continue
        examples.extend(gen_examples(ids, config, file=str(item.path)))
    return examples

from __future__ import annotations


class CodeLMError(RuntimeError):
    """Base class for every failure raised by the toolkit."""

    exit_code = 2


class ConfigError(CodeLMError):
    """Invalid configuration or command-line usage."""

    exit_code = 1


class CorpusError(CodeLMError):
    """Corpus root missing or unreadable."""


class SplitError(CodeLMError):
    """Fold split cannot be formed from the given files."""


class LexError(CodeLMError):
    def __init__(self, message: str, line: int, col: int) -> None:
        super().__init__(f"{message} at line {line}, col {col}")
        self.line = line
        self.col = col


class SamplerError(CodeLMError):
    """Structural normalization requested on structurally invalid text."""


class VocabularyError(CodeLMError):
    """Vocabulary statistics or lookups that cannot be computed."""


class DimensionError(CodeLMError):
    """Tensor or id shapes do not match the model."""


class StaleCacheError(CodeLMError):
    """Backward pass called with a cache produced by other parameters."""


class ModelFormatError(CodeLMError):
    def __init__(self, message: str, offset: int) -> None:
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class EvaluationError(CodeLMError):
    """Metrics requested over an empty example set."""


class InputError(CodeLMError):
    def __init__(self, message: str, line: int | None = None, col: int | None = None) -> None:
        where = f" at line {line}, col {col}" if line is not None else ""
        super().__init__(f"{message}{where}")
        self.line = line
        self.col = col


class DivergenceError(CodeLMError):
    exit_code = 3

    def __init__(self, message: str, epoch: int | None = None, batch: int | None = None) -> None:
        where = []
        if epoch is not None:
            where.append(f"epoch={epoch}")
        if batch is not None:
            where.append(f"batch={batch}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(f"{message}{suffix}")
        self.epoch = epoch
        self.batch = batch

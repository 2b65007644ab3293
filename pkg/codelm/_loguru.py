from __future__ import annotations

import sys

try:  # pragma: no cover - prefer real loguru when available
    from loguru import logger  # type: ignore
except ImportError:  # pragma: no cover - fallback to stdlib logging
    import logging
    from typing import Any

    logging.basicConfig(level=logging.INFO)

    class _Adapter:
        def __init__(self) -> None:
            self._logger = logging.getLogger("codelm")

        def _emit(self, level: int, message: str, *args: Any, **kwargs: Any) -> None:
            exc = kwargs.pop("exc", None)
            if args or kwargs:
                message = message.format(*args, **kwargs)
            self._logger.log(level, message, exc_info=exc)

        def debug(self, message: str, *args: Any, **kwargs: Any) -> None:
            self._emit(logging.DEBUG, message, *args, **kwargs)

        def info(self, message: str, *args: Any, **kwargs: Any) -> None:
            self._emit(logging.INFO, message, *args, **kwargs)

        def warning(self, message: str, *args: Any, **kwargs: Any) -> None:
            self._emit(logging.WARNING, message, *args, **kwargs)

        def error(self, message: str, *args: Any, **kwargs: Any) -> None:
            self._emit(logging.ERROR, message, *args, **kwargs)

        def remove(self, *args: Any) -> None:
            return None

        def add(self, sink: Any, level: str = "INFO", **kwargs: Any) -> int:
            self._logger.setLevel(level)
            return 0

    logger = _Adapter()


def configure_logging(level: str = "INFO") -> None:
    """Route all log records to stderr at the given level."""

    logger.remove()
    logger.add(sys.stderr, level=level.upper())


__all__ = ["configure_logging", "logger"]

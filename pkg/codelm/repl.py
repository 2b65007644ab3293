from __future__ import annotations

import sys
from dataclasses import dataclass, field
from typing import TextIO

from ._loguru import logger
from .container import ModelBundle
from .errors import InputError
from .formatting import format_generation, format_suggestions
from .pipeline import tokenize_snippet
from .regularizer import TypeResolver
from .suggest import generate_from_ids, rank_next

PROMPT = ">>> "
HELP = """Type code to see next-token suggestions. Commands:
  :gen [steps]  greedy continuation of the current context
  :k <n>        number of suggestions to show
  :reset        forget the accumulated context
  :help         this message
  :quit         leave"""


@dataclass(slots=True)
class ReplSession:
    """Encoded context of an interactive session.

    Only the last n tokens are kept. Declarations stay known through the
    resolver, so each line is lexed once.
    """

    bundle: ModelBundle
    k: int = 5
    max_steps: int = 20
    tokens: list[str] = field(default_factory=list)
    resolver: TypeResolver = field(default_factory=TypeResolver)

    @property
    def context(self) -> str:
        return " ".join(self.tokens)

    def _extend(self, tokens: list[str]) -> None:
        self.tokens = (self.tokens + tokens)[-self.bundle.config.n :]

    def _context_ids(self) -> list[int]:
        return [self.bundle.vocab.lookup(tok) for tok in self.tokens]

    def feed(self, code: str) -> str:
        self._extend(tokenize_snippet(code, self.bundle.config.token_mode, self.resolver))
        if not self.tokens:
            return "no context yet"
        return format_suggestions(rank_next(self.bundle, self._context_ids(), self.k))

    def continue_code(self, steps: int | None = None) -> str:
        result = generate_from_ids(self.bundle, self._context_ids(), steps or self.max_steps)
        self._extend(result.tokens)
        return format_generation(result)

    def reset(self) -> None:
        self.tokens = []
        self.resolver = TypeResolver()


def handle_command(session: ReplSession, line: str) -> tuple[str, bool]:
    """Returns (output, keep_running)."""

    parts = line.split()
    name = parts[0]
    if name == ":quit" and len(parts) == 1:
        return "", False
    if name == ":help" and len(parts) == 1:
        return HELP, True
    if name == ":reset" and len(parts) == 1:
        session.reset()
        return "context cleared", True
    if name == ":k" and len(parts) == 2 and parts[1].isdigit() and int(parts[1]) >= 1:
        session.k = int(parts[1])
        return f"k = {session.k}", True
    if name == ":gen" and len(parts) <= 2:
        if len(parts) == 2 and not (parts[1].isdigit() and int(parts[1]) >= 1):
            return HELP, True
        steps = int(parts[1]) if len(parts) == 2 else None
        return session.continue_code(steps), True
    return f"unknown or malformed command: {line}\n{HELP}", True


def run_repl(
    bundle: ModelBundle,
    stdin: TextIO | None = None,
    stdout: TextIO | None = None,
    *,
    k: int = 5,
    max_steps: int = 20,
) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    session = ReplSession(bundle=bundle, k=k, max_steps=max_steps)
    stdout.write(HELP + "\n")
    while True:
        stdout.write(PROMPT)
        stdout.flush()
        raw = stdin.readline()
        if not raw:
            break
        line = raw.strip()
        if not line:
            continue
        try:
            if line.startswith(":"):
                output, keep_running = handle_command(session, line)
                if not keep_running:
                    break
            else:
                output = session.feed(line)
        except InputError as exc:
            logger.debug("REPL input rejected: {exc}", exc=exc)
            output = f"error: {exc}"
        stdout.write(output + "\n")
    return 0

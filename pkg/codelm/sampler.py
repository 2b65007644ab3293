from __future__ import annotations

import shlex
import subprocess
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from ._loguru import logger
from .errors import SamplerError
from .lexer import Token, scan

INDENT = "    "
_OPENERS = {"(": ")", "[": "]", "{": "}"}
_CLOSERS = {v: k for k, v in _OPENERS.items()}


@dataclass(slots=True, frozen=True)
class Diagnostic:
    line: int
    message: str


@dataclass(slots=True)
class ValidityReport:
    ok: bool
    diagnostics: list[Diagnostic] = field(default_factory=list)


@dataclass(slots=True)
class CleanFile:
    origin_path: Path | None
    lines: list[str]
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def text(self) -> str:
        return "\n".join(self.lines) + ("\n" if self.lines else "")


CompilerHook = Callable[[str], ValidityReport]


def strip_comments(text: str, diagnostics: list[Diagnostic] | None = None) -> str:
    """Drop // and /* */ comments, leaving string and char literals untouched.

    Newlines inside removed block comments are kept so surviving code stays on
    its original line. An unterminated block comment truncates the text at the
    comment start and is reported through ``diagnostics``.
    """

    out: list[str] = []
    i = 0
    n = len(text)
    line = 1
    while i < n:
        ch = text[i]
        nxt = text[i + 1] if i + 1 < n else ""
        if ch in ('"', "'"):
            j = i + 1
            while j < n and text[j] != ch and text[j] != "\n":
                j += 2 if text[j] == "\\" else 1
            j = min(j + 1, n) if j < n and text[j] == ch else j
            out.append(text[i:j])
            i = j
        elif ch == "/" and nxt == "/":
            while i < n and text[i] != "\n":
                i += 1
        elif ch == "/" and nxt == "*":
            end = text.find("*/", i + 2)
            if end < 0:
                logger.warning("Unterminated block comment at line {line}", line=line)
                if diagnostics is not None:
                    diagnostics.append(Diagnostic(line, f"unterminated block comment at line {line}"))
                break
            newlines = text.count("\n", i, end)
            out.append("\n" * newlines)
            line += newlines
            i = end + 2
        else:
            if ch == "\n":
                line += 1
            out.append(ch)
            i += 1
    return "".join(out)


def validate(text: str) -> ValidityReport:
    """Lexical and bracket-balance check standing in for a compiler run."""

    tokens, problems = scan(text)
    diagnostics = [Diagnostic(p.line, f"{p.message} at line {p.line}") for p in problems]

    stack: list[Token] = []
    for tok in tokens:
        if tok.kind != "separator":
            continue
        if tok.text in _OPENERS:
            stack.append(tok)
        elif tok.text in _CLOSERS:
            if not stack:
                diagnostics.append(Diagnostic(tok.line, f"unbalanced {tok.text} at line {tok.line}"))
            elif stack[-1].text != _CLOSERS[tok.text]:
                opener = stack.pop()
                diagnostics.append(
                    Diagnostic(
                        tok.line,
                        f"mismatched {tok.text} at line {tok.line} (opened {opener.text} at line {opener.line})",
                    )
                )
            else:
                stack.pop()
    for opener in stack:
        diagnostics.append(Diagnostic(opener.line, f"unbalanced {opener.text} at line {opener.line}"))

    diagnostics.sort(key=lambda d: d.line)
    return ValidityReport(ok=not diagnostics, diagnostics=diagnostics)


def normalize_structure(text: str, origin_path: Path | None = None) -> CleanFile:
    """One statement per line, re-indented by brace depth.

    Breaks follow every ``;`` outside parentheses and every ``{`` / ``}``;
    a ``}`` keeps an immediately following ``;``, ``,`` or ``)`` on its line.
    """

    report = validate(text)
    if not report.ok:
        first = report.diagnostics[0]
        raise SamplerError(f"cannot normalize invalid source: {first.message}")

    tokens, _ = scan(text)
    lines: list[str] = []
    current: list[str] = []
    indent = 0
    depth = 0
    paren_depths = [0]
    prev: Token | None = None

    def flush() -> None:
        if current:
            lines.append(INDENT * indent + "".join(current).strip())
            current.clear()

    for idx, tok in enumerate(tokens):
        if not current:
            indent = depth - 1 if tok.text == "}" and tok.kind == "separator" else depth
            indent = max(indent, 0)
        elif prev is not None:
            gap = text[prev.end : tok.offset]
            current.append(" " if "\n" in gap else gap)
        current.append(tok.text)
        prev = tok

        if tok.kind != "separator":
            continue
        nxt = tokens[idx + 1] if idx + 1 < len(tokens) else None
        if tok.text == "(":
            paren_depths[-1] += 1
        elif tok.text == ")":
            paren_depths[-1] = max(paren_depths[-1] - 1, 0)
        elif tok.text == "{":
            depth += 1
            paren_depths.append(0)
            flush()
        elif tok.text == "}":
            depth = max(depth - 1, 0)
            if len(paren_depths) > 1:
                paren_depths.pop()
            if nxt is None or nxt.text not in (";", ",", ")"):
                flush()
        elif tok.text == ";" and paren_depths[-1] == 0:
            flush()
    flush()

    return CleanFile(origin_path=origin_path, lines=[line for line in lines if line.strip()])


def external_compiler_hook(command: str) -> CompilerHook:
    """Wrap an external compile command; the source text is passed on stdin."""

    argv = shlex.split(command)

    def check(text: str) -> ValidityReport:
        proc = subprocess.run(argv, input=text, capture_output=True, text=True, check=False)
        if proc.returncode == 0:
            return ValidityReport(ok=True)
        message = (proc.stderr or proc.stdout or "compiler rejected source").strip().splitlines()[0]
        return ValidityReport(ok=False, diagnostics=[Diagnostic(0, message)])

    return check


def sample_source(
    text: str,
    origin_path: Path | None = None,
    *,
    compiler_hook: CompilerHook | None = None,
) -> CleanFile | None:
    """Training-side sampler: strip, validate, normalize; None when the file is dropped."""

    diagnostics: list[Diagnostic] = []
    stripped = strip_comments(text, diagnostics)
    if diagnostics:
        logger.info("Dropping {path}: {msg}", path=origin_path, msg=diagnostics[0].message)
        return None
    report = validate(stripped)
    if report.ok and compiler_hook is not None:
        report = compiler_hook(stripped)
    if not report.ok:
        logger.info("Dropping {path}: {msg}", path=origin_path, msg=report.diagnostics[0].message)
        return None
    return normalize_structure(stripped, origin_path)

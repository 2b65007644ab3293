from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Literal

import yaml

from .errors import LexError

TokenKind = Literal[
    "keyword",
    "identifier",
    "int_lit",
    "long_lit",
    "float_lit",
    "double_lit",
    "char_lit",
    "string_lit",
    "bool_lit",
    "null_lit",
    "operator",
    "separator",
]

_KEYWORDS_PATH = Path(__file__).parent / "data" / "java_keywords.yml"

_OPERATORS = [
    ">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "++", "--", "&&", "||",
    "==", "!=", "<=", ">=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=",
    "<<", ">>", "+", "-", "*", "/", "%", "=", "<", ">", "!", "~", "?", ":",
    "&", "|", "^", "@",
]

_NUMBER = (
    r"0[xX][0-9a-fA-F_]+[lL]?"
    r"|0[bB][01_]+[lL]?"
    r"|(?:\d[\d_]*\.[\d_]*(?:[eE][+-]?\d+)?|\.\d[\d_]*(?:[eE][+-]?\d+)?|\d[\d_]*[eE][+-]?\d+)[fFdD]?"
    r"|\d[\d_]*[fFdDlL]?"
)

_TOKEN_PATTERNS: list[tuple[str, re.Pattern[str]]] = [
    ("whitespace", re.compile(r"[ \t\r\f\n]+")),
    ("string", re.compile(r'"(?:\\.|[^"\\\n])*"')),
    ("char", re.compile(r"'(?:\\.|[^'\\\n])+'")),
    ("number", re.compile(_NUMBER)),
    ("word", re.compile(r"[A-Za-z_$][A-Za-z0-9_$]*")),
    ("operator", re.compile("|".join(re.escape(op) for op in sorted(_OPERATORS, key=len, reverse=True)))),
    ("separator", re.compile(r"[(){}\[\];,.]")),
]


@dataclass(slots=True, frozen=True)
class Token:
    text: str
    kind: TokenKind
    line: int
    col: int
    offset: int = 0
    resolved_type: str | None = None

    @property
    def end(self) -> int:
        return self.offset + len(self.text)


@dataclass(slots=True, frozen=True)
class LexProblem:
    line: int
    col: int
    message: str


@lru_cache(maxsize=1)
def _word_lists() -> tuple[frozenset[str], frozenset[str]]:
    with _KEYWORDS_PATH.open("r", encoding="utf-8") as fh:
        data = yaml.safe_load(fh) or {}
    keywords = frozenset(str(item) for item in data.get("keywords", []))
    primitives = frozenset(str(item) for item in data.get("primitives", []))
    return keywords, primitives


def keywords() -> frozenset[str]:
    return _word_lists()[0]


def primitive_types() -> frozenset[str]:
    return _word_lists()[1]


def _number_kind(text: str) -> TokenKind:
    lower = text.lower()
    if lower.startswith(("0x", "0b")):
        return "long_lit" if lower.endswith("l") else "int_lit"
    if lower.endswith("l"):
        return "long_lit"
    if lower.endswith("f"):
        return "float_lit"
    if lower.endswith("d"):
        return "double_lit"
    # unsuffixed decimals encode as float
    if "." in lower or "e" in lower:
        return "float_lit"
    return "int_lit"


def _word_kind(text: str) -> TokenKind:
    if text in ("true", "false"):
        return "bool_lit"
    if text == "null":
        return "null_lit"
    if text in keywords():
        return "keyword"
    return "identifier"


def scan(text: str) -> tuple[list[Token], list[LexProblem]]:
    """Tokenize text, skipping (and reporting) characters no pattern accepts."""

    tokens: list[Token] = []
    problems: list[LexProblem] = []
    pos = 0
    line = 1
    line_start = 0
    length = len(text)
    while pos < length:
        for name, pattern in _TOKEN_PATTERNS:
            match = pattern.match(text, pos)
            if not match:
                continue
            lexeme = match.group(0)
            col = pos - line_start + 1
            if name == "whitespace":
                newlines = lexeme.count("\n")
                if newlines:
                    line += newlines
                    line_start = pos + lexeme.rfind("\n") + 1
            elif name == "string":
                tokens.append(Token(lexeme, "string_lit", line, col, pos))
            elif name == "char":
                tokens.append(Token(lexeme, "char_lit", line, col, pos))
            elif name == "number":
                tokens.append(Token(lexeme, _number_kind(lexeme), line, col, pos))
            elif name == "word":
                tokens.append(Token(lexeme, _word_kind(lexeme), line, col, pos))
            else:
                tokens.append(Token(lexeme, name, line, col, pos))  # type: ignore[arg-type]
            pos = match.end()
            break
        else:
            char = text[pos]
            if char == '"':
                message = "unterminated string literal"
            elif char == "'":
                message = "malformed char literal"
            else:
                message = f"unknown character {char!r}"
            problems.append(LexProblem(line, pos - line_start + 1, message))
            pos += 1
    return tokens, problems


def lex(text: str) -> list[Token]:
    tokens, problems = scan(text)
    if problems:
        first = problems[0]
        raise LexError(first.message, first.line, first.col)
    return tokens

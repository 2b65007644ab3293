from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import groupby
from typing import Sequence

from .lexer import Token, TokenKind, lex, primitive_types

_LITERAL_CODES: dict[str, str] = {
    "int_lit": "intval",
    "long_lit": "longval",
    "float_lit": "floatval",
    "double_lit": "doubleval",
    "char_lit": "charval",
    "string_lit": "stringval",
}

# tokens after a declared name that confirm a declaration
_DECL_FOLLOWERS = frozenset({"=", ";", ",", ")", ":", "["})

_HEADER_KEYWORDS = frozenset({"for", "catch", "try"})
_MODIFIERS = frozenset(
    {"public", "private", "protected", "static", "final", "abstract", "synchronized", "native", "strictfp", "default"}
)


@dataclass(slots=True, frozen=True)
class RegularizedToken:
    text: str
    source_kind: TokenKind
    encoded: bool = False


class ScopeTable:
    """Stack of identifier -> normalized type scopes, searched innermost first."""

    def __init__(self) -> None:
        self._scopes: list[dict[str, str]] = [{}]
        self._pending: dict[str, str] = {}

    @property
    def depth(self) -> int:
        return len(self._scopes)

    def push(self) -> None:
        self._scopes.append(dict(self._pending))
        self._pending = {}

    def pop(self) -> None:
        self._pending = {}
        if len(self._scopes) > 1:
            self._scopes.pop()

    def declare(self, name: str, type_name: str) -> None:
        self._scopes[-1][name] = type_name

    def declare_pending(self, name: str, type_name: str) -> None:
        """Parameters waiting for the block that follows their parenthesis."""

        self._pending[name] = type_name

    def drop_pending(self) -> None:
        self._pending = {}

    def lookup(self, name: str) -> str | None:
        if name in self._pending:
            return self._pending[name]
        for scope in reversed(self._scopes):
            if name in scope:
                return scope[name]
        return None


def _is_type_start(tok: Token) -> bool:
    if tok.kind == "identifier":
        return True
    return tok.kind == "keyword" and tok.text in primitive_types()


def _parse_type(tokens: Sequence[Token], i: int) -> tuple[str, int] | None:
    """Parse ``Base[.Name]*[<Args>][[]]*`` starting at i.

    Returns the normalized type name (subtypes, then base, then ``array`` per
    dimension, lowercased) and the index after the type.
    """

    if i >= len(tokens) or not _is_type_start(tokens[i]):
        return None
    base = tokens[i].text
    j = i + 1
    while (
        j + 1 < len(tokens)
        and tokens[j].text == "."
        and tokens[j + 1].kind == "identifier"
        and tokens[i].kind == "identifier"
    ):
        base = tokens[j + 1].text
        j += 2

    args = ""
    if j < len(tokens) and tokens[j].text == "<":
        parsed = _parse_type_args(tokens, j + 1)
        if parsed is None:
            return None
        args, j, leftover = parsed
        if leftover:
            # a ``>>`` that also closes an enclosing argument list
            return None

    dims = 0
    while j + 1 < len(tokens) and tokens[j].text == "[" and tokens[j + 1].text == "]":
        dims += 1
        j += 2
    if j < len(tokens) and tokens[j].text == "...":
        dims += 1
        j += 1

    name = (args + base + "array" * dims).lower()
    return name, j


def _parse_type_args(tokens: Sequence[Token], j: int) -> tuple[str, int, int] | None:
    """Parse generic arguments after ``<``; returns (names, index, extra closers)."""

    names: list[str] = []
    while j < len(tokens):
        tok = tokens[j]
        if tok.text == "?":
            j += 1
            if j < len(tokens) and tokens[j].text in ("extends", "super"):
                j += 1
            else:
                names.append("object")
                continue
        if j < len(tokens) and tokens[j].text == ">":
            return "".join(names), j + 1, 0
        inner = _parse_nested_arg(tokens, j)
        if inner is None:
            return None
        name, j, closed = inner
        names.append(name)
        if closed:
            return "".join(names), j, closed - 1
        if j < len(tokens) and tokens[j].text == ",":
            j += 1
            continue
        if j < len(tokens) and tokens[j].text in (">", ">>", ">>>"):
            closers = len(tokens[j].text)
            return "".join(names), j + 1, closers - 1
        return None
    return None


def _parse_nested_arg(tokens: Sequence[Token], j: int) -> tuple[str, int, int] | None:
    if j >= len(tokens) or not _is_type_start(tokens[j]):
        return None
    base = tokens[j].text
    k = j + 1
    while k + 1 < len(tokens) and tokens[k].text == "." and tokens[k + 1].kind == "identifier":
        base = tokens[k + 1].text
        k += 2
    sub = ""
    closed = 0
    if k < len(tokens) and tokens[k].text == "<":
        parsed = _parse_type_args(tokens, k + 1)
        if parsed is None:
            return None
        sub, k, closed = parsed
    dims = 0
    while k + 1 < len(tokens) and tokens[k].text == "[" and tokens[k + 1].text == "]":
        dims += 1
        k += 2
    return sub + base + "array" * dims, k, closed


def _skip_initializer(tokens: Sequence[Token], j: int) -> int:
    """Advance to the next ``,`` / ``;`` / ``)`` at nesting level zero."""

    depth = 0
    while j < len(tokens):
        text = tokens[j].text
        if text in ("(", "[", "{"):
            depth += 1
        elif text in (")", "]", "}"):
            if depth == 0:
                return j
            depth -= 1
        elif text in (",", ";") and depth == 0:
            return j
        j += 1
    return j


def _declared_names(tokens: Sequence[Token], i: int, in_call: bool = False) -> tuple[str, list[int], int] | None:
    """Match a declaration at i; returns (type, indices of declared names, resume index)."""

    if i > 0 and tokens[i - 1].text == ".":
        return None
    if i > 0 and tokens[i - 1].text in ("new",):
        return None
    parsed = _parse_type(tokens, i)
    if parsed is None:
        return None
    type_name, j = parsed
    # ``foo(a < b, c > d)`` compares, it does not declare ``d``
    if in_call and any(tok.text == "<" for tok in tokens[i:j]):
        return None
    if j >= len(tokens) or tokens[j].kind != "identifier":
        return None
    if j + 1 < len(tokens) and tokens[j + 1].text not in _DECL_FOLLOWERS:
        return None
    if j + 1 >= len(tokens):
        return None

    names = [j]
    k = j + 1
    while k < len(tokens):
        while k + 1 < len(tokens) and tokens[k].text == "[" and tokens[k + 1].text == "]":
            k += 2
        if k < len(tokens) and tokens[k].text == "=":
            k = _skip_initializer(tokens, k + 1)
        if (
            k + 2 < len(tokens)
            and tokens[k].text == ","
            and tokens[k + 1].kind == "identifier"
            and tokens[k + 2].text in ("=", ",", ";", "[")
        ):
            names.append(k + 1)
            k += 2
            continue
        break
    return type_name, names, j + 1


def _opens_parameter_list(tokens: Sequence[Token], i: int) -> bool:
    """True when the ``(`` at i starts parameters, a for/catch header or try resources."""

    if i == 0:
        return False
    prev = tokens[i - 1]
    if prev.text in _HEADER_KEYWORDS:
        return True
    if prev.kind != "identifier" or i < 2:
        return False
    before = tokens[i - 2]
    if before.text in _MODIFIERS or before.text in ("void", ">", "]"):
        return True
    return _is_type_start(before)


class TypeResolver:
    """Resolves identifier types across successive token chunks.

    Scopes, pending parameters and open parentheses carry over from one
    ``feed`` to the next, so a session can be encoded line by line.
    """

    def __init__(self) -> None:
        self.table = ScopeTable()
        # one flag per open parenthesis: True for parameter lists and headers
        self._parens: list[bool] = []
        self._brace_stack: list[list[bool]] = []

    def feed(self, tokens: Sequence[Token]) -> list[Token]:
        table = self.table
        resolved: dict[int, str] = {}
        i = 0
        total = len(tokens)

        while i < total:
            tok = tokens[i]
            text = tok.text
            if tok.kind == "separator":
                if text == "{":
                    self._brace_stack.append(self._parens)
                    self._parens = []
                    table.push()
                elif text == "}":
                    self._parens = self._brace_stack.pop() if self._brace_stack else []
                    table.pop()
                elif text == "(":
                    self._parens.append(_opens_parameter_list(tokens, i))
                elif text == ")":
                    if self._parens:
                        self._parens.pop()
                elif text == ";" and not self._parens:
                    table.drop_pending()
                i += 1
                continue

            if tok.kind in ("identifier", "keyword"):
                in_call = bool(self._parens) and not self._parens[-1]
                match = _declared_names(tokens, i, in_call)
                if match is not None:
                    type_name, name_idx, _ = match
                    for idx in name_idx:
                        name = tokens[idx].text
                        if self._parens:
                            table.declare_pending(name, type_name)
                        else:
                            table.declare(name, type_name)
                        resolved[idx] = type_name
                    # continue right after the type so initializers are still scanned
                    i = name_idx[0]
                    continue

            if tok.kind == "identifier" and i not in resolved:
                preceded_by_dot = i > 0 and tokens[i - 1].text == "."
                if not preceded_by_dot:
                    found = table.lookup(text)
                    if found is not None:
                        resolved[i] = found
            i += 1

        return [replace(tok, resolved_type=resolved[idx]) if idx in resolved else tok for idx, tok in enumerate(tokens)]


def resolve_types(tokens: Sequence[Token], resolver: TypeResolver | None = None) -> list[Token]:
    """Annotate identifier tokens with the type of their in-scope declaration."""

    return (resolver or TypeResolver()).feed(tokens)


def _is_method_name(tokens: Sequence[Token], idx: int) -> bool:
    return idx + 1 < len(tokens) and tokens[idx + 1].text == "("


def regularize(tokens: Sequence[Token]) -> list[RegularizedToken]:
    out: list[RegularizedToken] = []
    for idx, tok in enumerate(tokens):
        if tok.kind in _LITERAL_CODES:
            out.append(RegularizedToken(_LITERAL_CODES[tok.kind], tok.kind, encoded=True))
        elif tok.kind == "identifier" and _is_method_name(tokens, idx):
            out.append(RegularizedToken(tok.text.lower(), tok.kind))
        elif tok.kind == "identifier" and tok.resolved_type:
            out.append(RegularizedToken(f"{tok.resolved_type}var".lower(), tok.kind, encoded=True))
        else:
            out.append(RegularizedToken(tok.text.lower(), tok.kind))
    return out


def regularize_lines(tokens: Sequence[Token], resolver: TypeResolver | None = None) -> list[list[str]]:
    """Regularized texts grouped by the source line of each token."""

    resolved = resolve_types(tokens, resolver)
    reg = regularize(resolved)
    lines: list[list[str]] = []
    for _, group in groupby(zip(resolved, reg), key=lambda pair: pair[0].line):
        lines.append([item.text for _, item in group])
    return lines


def raw_lines(tokens: Sequence[Token]) -> list[list[str]]:
    """Lowercased lexemes grouped by source line (no type encoding)."""

    return [[tok.text.lower() for tok in group] for _, group in groupby(tokens, key=lambda t: t.line)]


def regularize_source(text: str) -> list[list[str]]:
    return regularize_lines(lex(text))

import pytest

from codelm.errors import LexError
from codelm.lexer import keywords, lex, primitive_types, scan


def _pairs(text):
    return [(tok.kind, tok.text) for tok in lex(text)]


def test_canonical_statement():
    assert _pairs("int i = 1;") == [
        ("keyword", "int"),
        ("identifier", "i"),
        ("operator", "="),
        ("int_lit", "1"),
        ("separator", ";"),
    ]


def test_unsuffixed_decimal_is_float():
    assert _pairs("a=1.1;") == [
        ("identifier", "a"),
        ("operator", "="),
        ("float_lit", "1.1"),
        ("separator", ";"),
    ]


def test_maximal_munch_operators():
    assert _pairs("x<=y") == [("identifier", "x"), ("operator", "<="), ("identifier", "y")]
    assert [t.text for t in lex("a>>>=b++ -> c::d")] == ["a", ">>>=", "b", "++", "->", "c", "::", "d"]


@pytest.mark.parametrize(
    ("text", "kind"),
    [
        ("42", "int_lit"),
        ("42L", "long_lit"),
        ("0x1F", "int_lit"),
        ("0xFFl", "long_lit"),
        ("3.5f", "float_lit"),
        ("3.5d", "double_lit"),
        ("2e10", "float_lit"),
        ("7D", "double_lit"),
        ("'c'", "char_lit"),
        ("'\\n'", "char_lit"),
        ('"a \\" b"', "string_lit"),
        ("true", "bool_lit"),
        ("false", "bool_lit"),
        ("null", "null_lit"),
    ],
)
def test_literal_kinds(text, kind):
    (tok,) = lex(text)
    assert tok.kind == kind
    assert tok.text == text


def test_positions_are_recorded():
    tokens = lex("int a;\n  a = 2;")
    second_a = tokens[3]
    assert (second_a.text, second_a.line, second_a.col) == ("a", 2, 3)
    assert second_a.offset == 9


def test_unknown_character_raises_with_position():
    with pytest.raises(LexError) as info:
        lex("int a;\nint #b;")
    assert (info.value.line, info.value.col) == (2, 5)


def test_scan_reports_but_continues():
    tokens, problems = scan('x = "open\ny;')
    assert [p.message for p in problems] == ["unterminated string literal"]
    assert [t.text for t in tokens][-2:] == ["y", ";"]


def test_keyword_lists_loaded_from_data():
    assert {"class", "for", "while", "return", "new"} <= keywords()
    assert "true" not in keywords()
    assert primitive_types() == {"boolean", "byte", "char", "double", "float", "int", "long", "short"}

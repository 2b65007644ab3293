import pytest

from codelm.errors import VocabularyError
from codelm.regularizer import raw_lines, regularize_source
from codelm.lexer import lex
from codelm.vocabulary import (
    PAD_ID,
    UNK_ID,
    Vocabulary,
    build_vocab,
    load_vocab,
    save_vocab,
    stats_from_counts,
    vectorize,
    vocab_stats,
)


def test_build_counts_reserved_slots():
    vocab = build_vocab([["int", "intvar", "=", "intval", ";"]])
    assert vocab.size == 7
    assert vocab.id_to_token[:2] == ["<pad>", "<unk>"]
    assert vocab.lookup("int") == 2


def test_repeated_token_single_entry():
    vocab = build_vocab([["a", "b", "a", "A"]])
    assert vocab.size == 4


def test_streams_share_ids_in_first_occurrence_order():
    vocab = build_vocab([["x", "y"], ["y", "z", "x"]])
    assert vocab.id_to_token == ["<pad>", "<unk>", "x", "y", "z"]


def test_empty_input_only_reserved():
    vocab = build_vocab([])
    assert vocab.is_empty
    assert len(vocab) == 2


def test_vectorize_round_trip_and_unknown():
    stream = ["int", "intvar", "=", "intval", ";"]
    vocab = build_vocab([stream])
    ids = vectorize(stream, vocab)
    assert [vocab.token(i) for i in ids] == stream
    assert vectorize(["foovar"], vocab) == [UNK_ID]
    assert vectorize([], vocab) == []
    assert PAD_ID not in ids


def test_lookup_is_case_insensitive():
    vocab = build_vocab([["String"]])
    assert "string" in vocab
    assert vocab.lookup("STRING") == vocab.lookup("string") == 2


def test_add_rejects_empty_token():
    with pytest.raises(VocabularyError):
        Vocabulary().add("")


def test_stats_from_counts():
    assert stats_from_counts(19678, 9055).percent_decrease == 53.98
    assert stats_from_counts(500, 500).percent_decrease == 0.0
    with pytest.raises(VocabularyError):
        stats_from_counts(0, 0)


def test_regularization_shrinks_vocabulary():
    source = "int a = 1;\nint b = 2;\nint c = 3;\na = b + c;\n"
    raw = raw_lines(lex(source))
    reg = regularize_source(source)

    stats = vocab_stats(raw, reg)

    # raw: int a = 1 ; b 2 c 3 +   regularized: int intvar = intval ; +
    assert stats.v_norm == 10
    assert stats.v_regularized == 6
    assert stats.percent_decrease == 40.0


def test_save_and_load(tmp_path):
    vocab = build_vocab([["for", "(", "int", "intvar"]])
    path = tmp_path / "nested" / "vocab.txt"

    save_vocab(vocab, path)
    loaded = load_vocab(path)

    assert loaded.id_to_token == vocab.id_to_token
    assert loaded.token_to_id == vocab.token_to_id


def test_from_tokens_requires_reserved_prefix():
    with pytest.raises(VocabularyError):
        Vocabulary.from_tokens(["a", "b"])
    with pytest.raises(VocabularyError):
        Vocabulary.from_tokens(["<pad>", "<unk>", "a", "a"])

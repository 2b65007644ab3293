import numpy as np
import pytest

from codelm.config import TrainConfig
from codelm.container import ModelBundle
from codelm.errors import InputError
from codelm.model import init_params
from codelm.suggest import generate, rank_next, suggest
from codelm.vocabulary import RESERVED, build_vocab


@pytest.fixture
def random_bundle():
    vocab = build_vocab([["for", "(", "int", "intvar", "=", "intval", ";", "<", "++", ")", "{", "}"]])
    config = TrainConfig(n=4, embed_dim=5, hidden_dim=6)
    params = init_params(vocab.size, 5, 6, "gru", seed=12)
    params.tensors["b_o"] = np.random.default_rng(3).normal(size=vocab.size)
    return ModelBundle(params=params, vocab=vocab, config=config)


def test_suggest_after_overfit_line(line_bundle):
    top = suggest(line_bundle, "int", k=3)
    assert top[0].token == "intvar"
    assert [s.rank for s in top] == [1, 2, 3]


def test_suggest_exhaustive_ranking_excludes_reserved(random_bundle):
    size = random_bundle.vocab.size
    everything = suggest(random_bundle, "for ( int i = 0 ;", k=size - 2)

    tokens = [s.token for s in everything]
    assert sorted(tokens) == sorted(random_bundle.vocab.id_to_token[2:])
    assert not set(tokens) & set(RESERVED)
    assert len(suggest(random_bundle, "for (", k=size + 10)) == size - 2


def test_suggest_probabilities_non_increasing_and_prefix_stable(random_bundle):
    for code in ["for (", "int x = 1 ;", "{ x ++ ; }", "i < n"]:
        full = suggest(random_bundle, code, k=8)
        probs = [s.probability for s in full]
        assert probs == sorted(probs, reverse=True)
        assert all(0.0 < p <= 1.0 for p in probs)
        assert suggest(random_bundle, code, k=3) == full[:3]


def test_suggest_truncates_to_context_bound(random_bundle):
    # only the last n=4 tokens reach the model
    long_code = "{ { { { { { for ( int"
    short_code = "{ for ( int"
    assert suggest(random_bundle, long_code, k=5) == suggest(random_bundle, short_code, k=5)


def test_suggest_input_errors(random_bundle):
    with pytest.raises(InputError):
        suggest(random_bundle, "int", k=0)
    with pytest.raises(InputError):
        suggest(random_bundle, "   // only a comment", k=3)
    with pytest.raises(InputError) as info:
        suggest(random_bundle, "int # x", k=3)
    assert "line 1" in str(info.value)


def test_generate_completes_memorized_line(line_bundle):
    result = generate(line_bundle, "int", max_steps=20)
    assert result.tokens == ["intvar", "=", "intval", ";"]
    assert result.stop_reason == "terminator"
    assert result.text == "intvar = intval ;"


def test_generate_step_cap(line_bundle):
    result = generate(line_bundle, "int", max_steps=1)
    assert result.tokens == ["intvar"]
    assert result.stop_reason == "max_steps"


def test_generate_extends_greedily(random_bundle):
    shorter = generate(random_bundle, "for ( int", max_steps=2)
    longer = generate(random_bundle, "for ( int", max_steps=3)
    if shorter.stop_reason == "max_steps":
        assert longer.tokens[:2] == shorter.tokens
        assert len(longer.tokens) <= 3
    else:
        assert longer.tokens == shorter.tokens


def test_generate_empty_context(random_bundle):
    result = generate(random_bundle, "/* nothing */", max_steps=5)
    assert result.tokens == []
    assert result.stop_reason == "empty_context"
    with pytest.raises(InputError):
        generate(random_bundle, "int", max_steps=0)


def test_rank_next_is_deterministic(random_bundle):
    ids = [random_bundle.vocab.lookup(t) for t in ["for", "(", "int"]]
    assert rank_next(random_bundle, ids, 4) == rank_next(random_bundle, ids, 4)

import os
import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

os.environ.setdefault("CODELM_LOG_LEVEL", "WARNING")

TOY_CORPUS = ROOT / "data" / "toy_corpus"


@pytest.fixture
def toy_corpus() -> Path:
    return TOY_CORPUS


@pytest.fixture(scope="session")
def line_bundle():
    """A GRU overfit on the single line ``int intvar = intval ;``."""

    from codelm.config import TrainConfig
    from codelm.container import ModelBundle
    from codelm.model import init_params
    from codelm.trainer import gen_variable_context, train
    from codelm.vocabulary import build_vocab, vectorize

    stream = ["int", "intvar", "=", "intval", ";"]
    vocab = build_vocab([stream])
    config = TrainConfig(
        n=20, batch_size=8, epochs=300, learning_rate=0.02, dropout_rate=0.0, embed_dim=8, hidden_dim=16, seed=1
    )
    examples = gen_variable_context(vectorize(stream, vocab), config.n)
    model = init_params(vocab.size, config.embed_dim, config.hidden_dim, "gru", seed=config.seed)
    result = train(model, examples, config)
    return ModelBundle(params=result.params, vocab=vocab, config=config)


@pytest.fixture
def write_tree(tmp_path):
    """Create files from a {relative path: text} mapping under tmp_path."""

    def _write(files: dict[str, str]) -> Path:
        for rel, text in files.items():
            path = tmp_path / rel
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text, encoding="utf-8")
        return tmp_path

    return _write

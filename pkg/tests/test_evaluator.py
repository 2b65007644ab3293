import math

import numpy as np
import pytest

from codelm.errors import EvaluationError
from codelm.evaluator import (
    EvalReport,
    accuracy_from_ranks,
    compare_report,
    cross_entropy,
    evaluate,
    export_reports,
    load_reports,
    mrr,
    mrr_from_ranks,
    target_ranks,
    top_k_accuracy,
)
from codelm.model import init_params, zero_params
from codelm.trainer import TrainingExample
from codelm.vocabulary import UNK_ID


class TableModel:
    """Returns a fixed probability row chosen by the first context id."""

    def __init__(self, rows):
        self.rows = np.asarray(rows, dtype=np.float64)

    def predict_proba(self, contexts):
        return np.array([self.rows[int(c[0])] for c in contexts])


def _examples(targets):
    return [TrainingExample((idx,), target) for idx, target in enumerate(targets)]


def _oracle_rank(row, target):
    if target == UNK_ID:
        return 0
    order = sorted(range(len(row)), key=lambda i: (-row[i], i))
    return order.index(target) + 1


def test_ranks_one_four_two():
    rows = [
        [0.05, 0.05, 0.6, 0.1, 0.1, 0.1],
        [0.05, 0.05, 0.4, 0.3, 0.1, 0.1],
        [0.05, 0.05, 0.3, 0.4, 0.1, 0.1],
    ]
    model = TableModel(rows)
    examples = _examples([2, 5, 2])

    report = evaluate(model, examples, (1, 3, 5))

    assert list(target_ranks(model.rows, [2, 5, 2])) == [1, 4, 2]
    assert report.accuracy == {1: pytest.approx(1 / 3), 3: pytest.approx(2 / 3), 5: 1.0}
    assert top_k_accuracy(model, examples, 3) == pytest.approx(2 / 3)


def test_perfect_model_scores_one_everywhere():
    rows = np.eye(5)[[3, 4, 2]]
    model = TableModel(rows)
    examples = _examples([3, 4, 2])

    report = evaluate(model, examples)

    assert all(value == 1.0 for value in report.accuracy.values())
    assert report.mrr == 1.0
    assert report.cross_entropy_bits == 0.0


def test_uniform_model_tie_break_by_id():
    model = TableModel(np.full((3, 10), 0.1))
    examples = _examples([0, 2, 3])

    assert list(target_ranks(model.rows, [0, 2, 3])) == [1, 3, 4]
    assert top_k_accuracy(model, examples, 1) == pytest.approx(1 / 3)


def test_unknown_target_always_misses():
    rows = [[0.0, 1.0, 0.0]]
    model = TableModel(rows)
    examples = _examples([UNK_ID])
    assert top_k_accuracy(model, examples, 3) == 0.0
    assert mrr(model, examples) == 0.0


def test_mrr_arithmetic():
    assert mrr_from_ranks(np.array([1, 2, 4])) == pytest.approx(0.5833333333, abs=1e-9)
    assert mrr_from_ranks(np.array([1, 1, 1])) == 1.0
    assert accuracy_from_ranks(np.array([1, 4, 2]), 1) == pytest.approx(1 / 3)


def test_metrics_match_brute_force_oracle():
    rng = np.random.default_rng(99)
    for _ in range(50):
        count = int(rng.integers(1, 12))
        vocab = int(rng.integers(3, 15))
        # small integer weights create plenty of ties
        weights = rng.integers(0, 4, size=(count, vocab)).astype(np.float64) + 1e-3
        rows = weights / weights.sum(axis=1, keepdims=True)
        targets = [int(t) for t in rng.integers(0, vocab, size=count)]
        model = TableModel(rows)
        examples = _examples(targets)

        expected = [_oracle_rank(list(row), t) for row, t in zip(rows, targets)]
        assert list(target_ranks(rows, targets)) == expected

        for k in (1, 3, 5, 10):
            hits = sum(1 for r in expected if 1 <= r <= k)
            assert top_k_accuracy(model, examples, k) == hits / count
        oracle_mrr = sum(1.0 / r for r in expected if r > 0) / count
        assert mrr(model, examples) == pytest.approx(oracle_mrr, abs=1e-12)


def test_uniform_cross_entropy_is_log_vocab():
    params = zero_params(1024, 2, 2, "gru")
    examples = [TrainingExample((5, 9), 700), TrainingExample((3,), 2)]
    assert cross_entropy(params, examples) == pytest.approx(10.0, abs=1e-9)


def test_cross_entropy_mixed_fixture():
    rows = [
        [0.5, 0.25, 0.25],
        [0.125, 0.375, 0.5],
        [0.25, 0.25, 0.5],
        [1.0, 0.0, 0.0],
        [0.5, 0.0, 0.5],
    ]
    model = TableModel(rows)
    examples = _examples([0, 0, 1, 0, 2])
    # 1 + 3 + 2 + 0 + 1 bits
    assert cross_entropy(model, examples) == pytest.approx(7 / 5, abs=1e-12)


def test_report_invariants_on_real_model():
    params = init_params(30, 6, 6, "gru", seed=4)
    rng = np.random.default_rng(2)
    examples = [
        TrainingExample(tuple(int(i) for i in rng.integers(0, 30, size=int(rng.integers(1, 6)))), int(t))
        for t in rng.integers(0, 30, size=80)
    ]

    report = evaluate(params, examples, (10, 1, 5, 3), name="gru", context_mode="variable")

    values = [report.accuracy[k] for k in (1, 3, 5, 10)]
    assert values == sorted(values)
    assert report.accuracy[1] <= report.mrr <= 1.0
    assert report.cross_entropy_bits <= math.log2(30) + 3.0
    assert report.example_count == 80
    assert evaluate(params, examples, (10, 1, 5, 3)).mrr == report.mrr


def test_empty_examples_rejected():
    model = TableModel([[1.0]])
    with pytest.raises(EvaluationError):
        evaluate(model, [])
    with pytest.raises(EvaluationError):
        compare_report([])


def _report(name, mode, acc1):
    return EvalReport(
        accuracy={1: acc1, 3: acc1 + 0.1, 5: acc1 + 0.15, 10: acc1 + 0.2},
        mrr=acc1 + 0.05,
        cross_entropy_bits=2.5,
        example_count=40,
        model=name,
        context_mode=mode,
    )


def test_compare_report_rows_in_input_order():
    reports = [
        _report("rnn", "fixed", 0.4),
        _report("rnn", "variable", 0.45),
        _report("gru", "fixed", 0.5),
        _report("gru", "variable", 0.6),
    ]

    table = compare_report(reports)
    lines = table.splitlines()

    assert len(lines) == 5
    assert "acc@1" in lines[0] and "mrr" in lines[0]
    assert lines[1].split()[:2] == ["rnn", "fixed"]
    assert lines[4].split()[:3] == ["gru", "variable", "60.0"]
    assert len(compare_report(reports[:1]).splitlines()) == 2


def test_export_round_trip(tmp_path):
    reports = [_report("gru", "variable", 0.6), _report("rnn", "fixed", 1 / 3)]
    path = tmp_path / "out" / "eval.yml"

    export_reports(reports, path)

    assert load_reports(path) == reports

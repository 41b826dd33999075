import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from urcminer.errors import UndefinedMetricError
from urcminer.metrics import auc, average_ranks, classification_report


def brute_auc(truth, scores):
    """Probability a random positive outranks a random negative, ties counted half."""
    pos = [s for t, s in zip(truth, scores) if t]
    neg = [s for t, s in zip(truth, scores) if not t]
    wins = sum(1.0 if p > n else 0.5 if p == n else 0.0 for p in pos for n in neg)
    return wins / (len(pos) * len(neg))


def random_auc_instance(rng):
    n = int(rng.integers(2, 201))
    truth = rng.random(n) < rng.uniform(0.1, 0.9)
    truth[0], truth[1] = True, False
    # few distinct values so ties are common
    scores = rng.integers(0, int(rng.integers(2, 30)), size=n) / 7.0
    return truth, scores


def test_pr_f1_example():
    r = classification_report([1, 1, 0, 0], [1, 0, 0, 0])
    s = r.per_class["1"]
    assert (s.precision, s.recall, s.support) == (1.0, 0.5, 2)
    assert s.f1 == pytest.approx(2 / 3)
    assert r.accuracy == 0.75
    assert r.confusion == [[2, 0], [1, 1]] or np.array_equal(r.confusion, [[2, 0], [1, 1]])


def test_perfect_predictions():
    truth = ["URC", "NO_URC", "URC"]
    r = classification_report(truth, truth, probabilities=[[0.1, 0.9], [0.8, 0.2], [0.3, 0.7]])
    assert r.accuracy == 1.0 and r.auc == 1.0
    assert all(s.precision == s.recall == s.f1 == 1.0 for s in r.per_class.values())


def test_length_mismatch_and_unknown():
    with pytest.raises(ValueError):
        classification_report([1, 0], [1])
    with pytest.raises(ValueError):
        classification_report(["a"], ["b"], classes=["a"])


def test_zero_denominator_flagged():
    r = classification_report(["a", "a"], ["a", "a"], classes=["a", "b"])
    assert r.per_class["b"].precision == 0.0 and r.flags
    json.loads(r.to_json())


def test_auc_examples():
    assert auc([1, 1, 0, 0], [0.9, 0.8, 0.2, 0.1]) == 1.0
    assert auc([1, 0, 1, 0], [0.5] * 4) == 0.5
    with pytest.raises(UndefinedMetricError):
        auc([1, 1], [0.1, 0.2])


def test_average_ranks():
    assert average_ranks([3.0, 1.0, 3.0, 2.0]).tolist() == [3.5, 1.0, 3.5, 2.0]


def test_auc_brute_force_random():
    rng = np.random.default_rng(0)
    for _ in range(200):
        truth, scores = random_auc_instance(rng)
        assert abs(auc(truth, scores) - brute_auc(truth, scores)) <= 1e-12


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.booleans(), st.floats(-1e6, 1e6, allow_nan=False)), min_size=2, max_size=60, unique_by=lambda t: t[1]))
def test_auc_symmetry_tie_free(pairs):
    truth = [t for t, _ in pairs]
    scores = np.array([s for _, s in pairs])
    if all(truth) or not any(truth):
        return
    assert auc(truth, scores) + auc(truth, -scores) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.booleans(), st.integers(-50, 50)), min_size=2, max_size=60))
def test_auc_monotone_invariance(pairs):
    truth = [t for t, _ in pairs]
    if all(truth) or not any(truth):
        return
    s = np.array([v for _, v in pairs], dtype=float)
    assert auc(truth, s) == auc(truth, np.exp(s / 10.0)) == auc(truth, 3 * s - 7)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.sampled_from("abc"), st.sampled_from("abc")), min_size=1, max_size=40))
def test_micro_recall_equals_accuracy(pairs):
    truth = [t for t, _ in pairs]
    pred = [p for _, p in pairs]
    r = classification_report(truth, pred, classes=list("abc"))
    micro_recall = sum(r.per_class[c].recall * r.per_class[c].support for c in "abc") / len(truth)
    assert micro_recall == pytest.approx(r.accuracy)


def test_multiclass_macro_auc_and_table():
    truth = ["NO_URC", "URC_ADDRESSED", "URC_UNADDRESSED", "NO_URC", "URC_ADDRESSED", "URC_UNADDRESSED"]
    proba = np.eye(3)[[0, 1, 2, 0, 1, 1]] * 0.7 + 0.1
    classes = ["NO_URC", "URC_ADDRESSED", "URC_UNADDRESSED"]
    pred = [classes[i] for i in proba.argmax(axis=1)]
    r = classification_report(truth, pred, classes=classes, probabilities=proba)
    expected = np.mean([brute_auc([t == c for t in truth], proba[:, k]) for k, c in enumerate(classes)])
    assert r.auc == pytest.approx(expected, abs=1e-12)
    table = r.to_table()
    assert "Category" in table and "Supp." in table and "URC_UNADDRESSED" in table
    assert r.per_class["URC_UNADDRESSED"].support == 2

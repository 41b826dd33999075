import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from urcminer.textvec import Vocabulary, fit_vocabulary, idf_value, jaccard, load_stopwords, tokenize, transform


def test_tokenize_examples():
    assert tokenize("Can I use class B?") == ["can", "use", "class"]
    assert tokenize("") == []
    assert tokenize("ArrayList::new") == ["arraylist", "new"]
    assert tokenize("snake_case x2 go") == ["snake", "case", "x2", "go"]


def test_stopwords_bundled_and_override(tmp_path, monkeypatch):
    words = load_stopwords()
    assert 100 <= len(words) <= 200 and "the" in words
    p = tmp_path / "stop.txt"
    p.write_text("foo\nBar\n")
    monkeypatch.setenv("URCMINER_STOPWORDS", str(p))
    assert load_stopwords() == {"foo", "bar"}


def test_vocabulary_frequency_boundary():
    assert "foo" not in fit_vocabulary(["foo bar", "foo"], stopword_list=[]).terms
    assert "foo" in fit_vocabulary(["foo bar", "foo foo"], stopword_list=[]).terms


def test_all_stopword_corpus():
    assert len(fit_vocabulary(["the the the and and and"] * 3)) == 0


def test_vocabulary_sorted_no_stopwords():
    v = fit_vocabulary(["zeta alpha the"] * 3 + ["alpha"])
    assert v.terms == ("alpha", "zeta")
    assert v.document_frequency == (4, 3) and v.n_documents == 4


def test_zero_row_and_single_document():
    v = fit_vocabulary(["java java java"], stopword_list=[])
    m = transform(["nothing here", "java"], v)
    assert m.values[0].tolist() == [0.0]
    assert m.values[1].tolist() == [1.0]
    assert m.feature_names == ["tfidf:java"]


def test_idf_ordering():
    v = Vocabulary(("common", "rare"), (2, 1), 2)
    idf = v.idf()
    assert idf[1] > idf[0]
    assert idf[0] == pytest.approx(1.0)
    assert idf[1] == pytest.approx(math.log(1.5) + 1.0)
    assert idf_value(2, 1) == idf[1]


def test_tfidf_values_by_hand():
    v = Vocabulary(("aa", "bb"), (2, 1), 3)
    row = transform(["aa aa bb"], v).values[0]
    raw = np.array([2 * (math.log(4 / 3) + 1), 1 * (math.log(4 / 2) + 1)])
    np.testing.assert_allclose(row, raw / np.linalg.norm(raw), rtol=0, atol=1e-15)


def test_vocabulary_json_round_trip():
    v = fit_vocabulary(["alpha beta", "alpha beta", "alpha beta gamma"], stopword_list=[])
    assert Vocabulary.from_json(v.to_json()) == v


def test_jaccard_examples():
    assert jaccard("aa bb cc", "bb cc dd") == 0.5
    assert jaccard("same text", "same text") == 1.0
    assert jaccard("one", "two") == 0.0
    assert jaccard("", "") == 1.0


texts = st.lists(st.text(alphabet="abcde fgh?!_", max_size=30), min_size=1, max_size=12)


@settings(max_examples=80, deadline=None)
@given(texts)
def test_tfidf_properties(docs):
    v = fit_vocabulary(docs, stopword_list=[])
    assert all(df <= v.n_documents for df in v.document_frequency)
    assert list(v.terms) == sorted(v.terms)
    m = transform(docs, v)
    assert np.isfinite(m.values).all() and (m.values >= 0).all()
    norms = np.linalg.norm(m.values, axis=1)
    assert np.all((np.abs(norms - 1) < 1e-12) | (norms == 0))
    again = transform(docs, v)
    assert np.array_equal(m.values, again.values)


@settings(max_examples=60, deadline=None)
@given(st.text(alphabet="abc xyz", max_size=20), st.text(alphabet="abc xyz", max_size=20))
def test_tf_linear_in_concatenation(a, b):
    v = Vocabulary(("abc", "xyz"), (1, 1), 2)
    tf = lambda t: np.array([tokenize(t).count(w) for w in v.terms])  # noqa: E731
    assert np.array_equal(tf(a + " " + b), tf(a) + tf(b))


@settings(max_examples=60, deadline=None)
@given(st.text(max_size=30), st.text(max_size=30))
def test_jaccard_symmetric(a, b):
    assert jaccard(a, b) == jaccard(b, a)
    if tokenize(a):
        assert jaccard(a, a) == 1.0

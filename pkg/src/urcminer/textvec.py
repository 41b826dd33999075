"""Tokenizer and TF-IDF vectorizer shared by the similarity features and the text models."""

from __future__ import annotations

import json
import math
import os
import re
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Sequence

import numpy as np

from urcminer.matrix import Matrix

_WORD = re.compile(r"[^\W_]+")
MIN_TERM_COUNT = 3


def tokenize(text: str) -> list[str]:
    """Lowercase alphanumeric runs of length >= 2, in order."""
    return [t for t in _WORD.findall(text.lower()) if len(t) >= 2]


def load_stopwords(path=None) -> frozenset[str]:
    """Stop-words from ``path``, ``$URCMINER_STOPWORDS`` or the bundled list."""
    path = path or os.environ.get("URCMINER_STOPWORDS")
    if path:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = resources.files("urcminer").joinpath("data/stopwords.txt").read_text(encoding="utf-8")
    return frozenset(w.strip().lower() for w in text.splitlines() if w.strip() and not w.startswith("#"))


@dataclass(frozen=True)
class Vocabulary:
    terms: tuple[str, ...]
    document_frequency: tuple[int, ...]
    n_documents: int

    def __len__(self):
        return len(self.terms)

    def idf(self) -> np.ndarray:
        df = np.asarray(self.document_frequency, dtype=np.float64)
        return np.log((1.0 + self.n_documents) / (1.0 + df)) + 1.0

    def to_json(self) -> str:
        return json.dumps({"terms": list(self.terms), "df": list(self.document_frequency), "N": self.n_documents})

    @classmethod
    def from_json(cls, text: str) -> "Vocabulary":
        d = json.loads(text)
        return cls(tuple(d["terms"]), tuple(int(x) for x in d["df"]), int(d["N"]))


def fit_vocabulary(corpus_texts: Iterable[str], stopword_list=None) -> Vocabulary:
    """Keep non-stop-word terms occurring at least three times in the corpus."""
    stop = load_stopwords() if stopword_list is None else frozenset(stopword_list)
    total, df = Counter(), Counter()
    n_docs = 0
    for text in corpus_texts:
        toks = tokenize(text)
        total.update(toks)
        df.update(set(toks))
        n_docs += 1
    terms = sorted(t for t, c in total.items() if c >= MIN_TERM_COUNT and t not in stop)
    return Vocabulary(tuple(terms), tuple(df[t] for t in terms), n_docs)


def transform(texts: Sequence[str], vocabulary: Vocabulary, row_ids=None) -> Matrix:
    """Raw-count tf times smoothed idf, L2-normalised per row."""
    col = {t: i for i, t in enumerate(vocabulary.terms)}
    tf = np.zeros((len(texts), len(vocabulary)), dtype=np.float64)
    for i, text in enumerate(texts):
        for tok in tokenize(text):
            j = col.get(tok)
            if j is not None:
                tf[i, j] += 1.0
    x = tf * vocabulary.idf()
    norms = np.sqrt((x * x).sum(axis=1, keepdims=True))
    np.divide(x, norms, out=x, where=norms > 0)
    ids = list(range(len(texts))) if row_ids is None else list(row_ids)
    return Matrix(ids, [f"tfidf:{t}" for t in vocabulary.terms], x, meta={"kind": "tfidf"})


def jaccard(text_a: str, text_b: str) -> float:
    a, b = set(tokenize(text_a)), set(tokenize(text_b))
    return jaccard_sets(a, b)


def jaccard_sets(a: set, b: set) -> float:
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


def idf_value(n_documents: int, df: int) -> float:
    return math.log((1 + n_documents) / (1 + df)) + 1.0

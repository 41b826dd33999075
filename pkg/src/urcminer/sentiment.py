"""Lexicon-based polarity and subjectivity."""

from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources

_WORD = re.compile(r"[a-z]+(?:'[a-z]+)?")
NEGATORS = frozenset({
    "not", "no", "never", "cannot", "can't", "don't", "doesn't", "didn't", "isn't",
    "wasn't", "aren't", "weren't", "won't", "wouldn't", "shouldn't", "couldn't",
})


@lru_cache(maxsize=None)
def load_lexicon() -> dict[str, tuple[float, float]]:
    text = resources.files("urcminer").joinpath("data/sentiment_lexicon.tsv").read_text(encoding="utf-8")
    lex = {}
    for line in text.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        word, pol, subj = line.split("\t")
        lex[word] = (float(pol), float(subj))
    return lex


def _clamp(x, lo, hi):
    return min(hi, max(lo, x))


def sentiment(text: str, lexicon=None) -> tuple[float, float]:
    """Mean (polarity, subjectivity) over lexicon hits; a preceding negator flips polarity."""
    lex = load_lexicon() if lexicon is None else lexicon
    tokens = _WORD.findall(text.lower().replace("’", "'"))
    pols, subjs = [], []
    for i, tok in enumerate(tokens):
        hit = lex.get(tok)
        if hit is None:
            continue
        pol, subj = hit
        if i > 0 and tokens[i - 1] in NEGATORS:
            pol = -pol
        pols.append(pol)
        subjs.append(subj)
    if not pols:
        return 0.0, 0.0
    return _clamp(sum(pols) / len(pols), -1.0, 1.0), _clamp(sum(subjs) / len(subjs), 0.0, 1.0)

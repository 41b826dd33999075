"""Per-comment feature vectors for URC detection.

Columns follow a fixed registry (``FULL_COLUMNS``). Deploy mode drops the
six columns that depend on events after the comment was posted.
Booleans are stored as 0/1; ``talks_to_role`` stays a single 0..3 column.
"""

from __future__ import annotations

import bisect
import json
import math
import re
from dataclasses import dataclass, fields
from typing import NamedTuple, Sequence

import numpy as np

from urcminer.errors import DataError
from urcminer.ingest import AnswerThread, RawComment
from urcminer.matrix import Matrix
from urcminer.sentiment import sentiment
from urcminer.textvec import jaccard, jaccard_sets, tokenize

FULL = "full"
DEPLOY = "deploy"
MODES = (FULL, DEPLOY)

TEN_YEARS_MINUTES = 5_256_000
MISSING_TIME = math.log1p(TEN_YEARS_MINUTES)
ANONYMOUS_REPUTATION = 1
EMOTICONS = frozenset({":)", ":(", ";)", ":D", ":P", ":-)", ":-(", ";-)", ":-D", ":/"})

TALKS_TO_NOBODY, TALKS_TO_ASKER, TALKS_TO_ANSWERER, TALKS_TO_COMMENTER = 0, 1, 2, 3


@dataclass(frozen=True)
class FeatureVector:
    comment_score: int
    comment_order: int
    post_score: int
    post_comment_count: int
    by_asker: bool
    by_answerer: bool
    by_not_seen_commenter: bool
    by_seen_commenter: bool
    user_reputation: int
    prev_post_edit_time: float
    next_post_edit_time: float
    prev_comment_time: float
    next_comment_time: float
    prev_comment_jaccard_sim: float
    next_comment_jaccard_sim: float
    prev_comment_embed_sim: float
    next_comment_embed_sim: float
    comment_post_change_sim: float
    polarity: float
    subjectivity: float
    text_len: int
    starts_with_at: bool
    contains_question_mark: bool
    contains_exclamation_mark: bool
    contains_but: bool
    contains_exception: bool
    contains_url: bool
    contains_emotions: bool
    talks_to_role: int

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def row(self, names: Sequence[str]) -> list[float]:
        d = self.as_dict()
        return [float(d[n]) for n in names]


FULL_COLUMNS = tuple(f.name for f in fields(FeatureVector))
DEPLOY_DROPPED = (
    "comment_score",
    "next_post_edit_time",
    "next_comment_time",
    "next_comment_jaccard_sim",
    "next_comment_embed_sim",
    "comment_post_change_sim",
)
DEPLOY_COLUMNS = tuple(c for c in FULL_COLUMNS if c not in DEPLOY_DROPPED)


def columns_for(mode: str) -> tuple[str, ...]:
    if mode == FULL:
        return FULL_COLUMNS
    if mode == DEPLOY:
        return DEPLOY_COLUMNS
    raise ValueError(f"unknown feature mode {mode!r}")


class Roles(NamedTuple):
    by_asker: bool
    by_answerer: bool
    by_not_seen_commenter: bool
    by_seen_commenter: bool


def _position(thread: AnswerThread, comment: RawComment) -> int:
    for i, c in enumerate(thread.comments):
        if c.comment_id == comment.comment_id:
            return i
    raise ValueError(f"comment {comment.comment_id} is not on answer {thread.answer_id}")


def resolve_role(thread: AnswerThread, comment: RawComment) -> tuple[Roles, int]:
    uid = comment.owner_user_id
    user = thread.user(uid)
    rep = user.reputation if user is not None else ANONYMOUS_REPUTATION
    if uid is None:
        # deleted accounts: each anonymous comment counts as a distinct unseen user
        return Roles(False, False, True, False), rep
    asker = uid == thread.question.owner_user_id
    answerer = uid == thread.answer.owner_user_id
    if asker or answerer:
        return Roles(asker, answerer, False, False), rep
    pos = _position(thread, comment)
    seen = any(c.owner_user_id == uid for c in thread.comments[:pos])
    return Roles(False, False, not seen, seen), rep


def log_minutes(delta_seconds: float | None) -> float:
    if delta_seconds is None:
        return MISSING_TIME
    return math.log1p(max(0.0, delta_seconds) / 60.0)


def time_features(thread: AnswerThread, comment: RawComment) -> tuple[float, float, float, float]:
    """(prev_post_edit, next_post_edit, prev_comment, next_comment) as ln(1 + minutes)."""
    ts = comment.creation_ts
    edit_times = [e.edit_ts for e in thread.edits]
    k = bisect.bisect_right(edit_times, ts)
    prev_edit = (ts - edit_times[k - 1]).total_seconds() if k > 0 else None
    next_edit = (edit_times[k] - ts).total_seconds() if k < len(edit_times) else None
    pos = _position(thread, comment)
    prev_c = (ts - thread.comments[pos - 1].creation_ts).total_seconds() if pos > 0 else None
    next_c = (thread.comments[pos + 1].creation_ts - ts).total_seconds() if pos + 1 < len(thread.comments) else None
    return log_minutes(prev_edit), log_minutes(next_edit), log_minutes(prev_c), log_minutes(next_c)


def cosine(vec_a, vec_b) -> float:
    a = np.asarray(vec_a, dtype=np.float64)
    b = np.asarray(vec_b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0))


_TAG = re.compile(r"<[^>]+>")


def _body_tokens(body: str) -> set[str]:
    return set(tokenize(_TAG.sub(" ", body)))


def post_change_tokens(thread: AnswerThread, comment: RawComment) -> set[str] | None:
    """Added plus removed tokens of the first body edit after ``comment``; None if there is none."""
    ts = comment.creation_ts
    for k in range(1, len(thread.edits)):
        if thread.edits[k].edit_ts > ts:
            before = _body_tokens(thread.edits[k - 1].body_after)
            after = _body_tokens(thread.edits[k].body_after)
            return before ^ after
    return None


def post_change_similarity(thread: AnswerThread, comment: RawComment) -> float:
    change = post_change_tokens(thread, comment)
    if change is None:
        return 0.0
    return jaccard_sets(set(tokenize(comment.text)), change)


_BUT = re.compile(r"\bbut\b", re.IGNORECASE)
_EXCEPTION = re.compile(r"\bexception\b", re.IGNORECASE)
_MENTION = re.compile(r"(?<![\w@])@([^\s:,;!?@()\[\]]+)")


def mentions(text: str) -> list[str]:
    return [m.rstrip(".'\"").lower() for m in _MENTION.findall(text) if m.rstrip(".'\"")]


def _name_key(user) -> str | None:
    if user is None or not user.display_name:
        return None
    return re.sub(r"\s+", "", user.display_name).lower()


def talks_to_role(thread: AnswerThread, comment: RawComment) -> int:
    targets = mentions(comment.text)
    if not targets:
        return TALKS_TO_NOBODY

    def hits(user) -> bool:
        key = _name_key(user)
        return key is not None and any(key.startswith(t) for t in targets)

    if hits(thread.user(thread.question.owner_user_id)):
        return TALKS_TO_ASKER
    if hits(thread.user(thread.answer.owner_user_id)):
        return TALKS_TO_ANSWERER
    pos = _position(thread, comment)
    if any(hits(thread.user(c.owner_user_id)) for c in thread.comments[:pos]):
        return TALKS_TO_COMMENTER
    return TALKS_TO_NOBODY


def contains_emotions(text: str) -> bool:
    for tok in text.split():
        if tok in EMOTICONS or tok.rstrip(".,!?") in EMOTICONS:
            return True
    return False


def surface_features(thread: AnswerThread, comment: RawComment) -> dict:
    text = comment.text
    lower = text.lower()
    return {
        "text_len": len(text),
        "starts_with_at": text.lstrip().startswith("@"),
        "contains_question_mark": "?" in text,
        "contains_exclamation_mark": "!" in text,
        "contains_but": bool(_BUT.search(text)),
        "contains_exception": bool(_EXCEPTION.search(text)),
        "contains_url": any(s in lower for s in ("http://", "https://", "www.")),
        "contains_emotions": contains_emotions(text),
        "talks_to_role": talks_to_role(thread, comment),
    }


def _embed_sim(embeddings, a: RawComment, b: RawComment | None) -> tuple[float, bool]:
    """Cosine of two comments' vectors; the flag is False when a vector is missing."""
    if b is None:
        return 0.0, True
    if embeddings is None:
        return 0.0, False
    va, vb = embeddings.get(a.comment_id), embeddings.get(b.comment_id)
    if va is None or vb is None:
        return 0.0, False
    return cosine(va, vb), True


def comment_features(thread: AnswerThread, comment: RawComment, embeddings=None) -> tuple[FeatureVector, bool]:
    pos = _position(thread, comment)
    prev_c = thread.comments[pos - 1] if pos > 0 else None
    next_c = thread.comments[pos + 1] if pos + 1 < len(thread.comments) else None
    roles, rep = resolve_role(thread, comment)
    prev_edit, next_edit, prev_time, next_time = time_features(thread, comment)
    prev_embed, ok_prev = _embed_sim(embeddings, comment, prev_c)
    next_embed, ok_next = _embed_sim(embeddings, comment, next_c)
    pol, subj = sentiment(comment.text)
    fv = FeatureVector(
        comment_score=comment.score,
        comment_order=pos + 1,
        post_score=thread.answer.score,
        post_comment_count=len(thread.comments),
        by_asker=roles.by_asker,
        by_answerer=roles.by_answerer,
        by_not_seen_commenter=roles.by_not_seen_commenter,
        by_seen_commenter=roles.by_seen_commenter,
        user_reputation=rep,
        prev_post_edit_time=prev_edit,
        next_post_edit_time=next_edit,
        prev_comment_time=prev_time,
        next_comment_time=next_time,
        prev_comment_jaccard_sim=jaccard(comment.text, prev_c.text) if prev_c else 0.0,
        next_comment_jaccard_sim=jaccard(comment.text, next_c.text) if next_c else 0.0,
        prev_comment_embed_sim=prev_embed,
        next_comment_embed_sim=next_embed,
        comment_post_change_sim=post_change_similarity(thread, comment),
        polarity=pol,
        subjectivity=subj,
        **surface_features(thread, comment),
    )
    return fv, ok_prev and ok_next


def featurize_thread(thread: AnswerThread, mode: str = FULL, embeddings=None) -> list[tuple[int, dict, bool]]:
    """One (comment_id, {column: value}, embeddings_complete) triple per comment."""
    cols = columns_for(mode)
    rows = []
    for c in thread.comments:
        fv, ok = comment_features(thread, c, embeddings)
        d = fv.as_dict()
        rows.append((c.comment_id, {k: d[k] for k in cols}, ok))
    return rows


def featurize(threads: Sequence[AnswerThread], mode: str = FULL, embeddings=None) -> Matrix:
    cols = list(columns_for(mode))
    ids, values, missing = [], [], []
    for t in threads:
        for cid, d, ok in featurize_thread(t, mode, embeddings):
            ids.append(cid)
            values.append([float(d[k]) for k in cols])
            if not ok:
                missing.append(cid)
    if embeddings is None:
        status = "absent"
    else:
        status = "partial" if missing else "present"
    m = Matrix(ids, cols, np.array(values, dtype=np.float64).reshape(len(ids), len(cols)), mode,
               {"kind": "features", "embeddings": status})
    m.missing_embeddings = missing
    return m


def load_embeddings(path) -> dict[int, np.ndarray]:
    """JSON-lines sidecar of ``{"comment_id": ..., "vector": [...]}`` with one fixed dimension."""
    out, dim = {}, None
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                vec = np.asarray(rec["vector"], dtype=np.float64)
                cid = int(rec["comment_id"])
            except (KeyError, ValueError, TypeError) as exc:
                raise DataError(f"{path}:{n}: bad embedding record: {exc}") from None
            if vec.ndim != 1 or (dim is not None and vec.shape[0] != dim):
                raise DataError(f"{path}:{n}: vector dimension {vec.shape} differs from {dim}")
            dim = vec.shape[0]
            out[cid] = vec
    return out

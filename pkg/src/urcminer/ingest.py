"""Stack Overflow dump ingestion.

Reads the four attribute-encoded XML tables (Posts, Comments, Users,
PostHistory), selects answer threads the way the URC study did, samples
them, and joins the three-column comment annotations.
"""

from __future__ import annotations

import csv
import html
import json
import logging
import re
import xml.etree.ElementTree as ET
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from urcminer.errors import DataError, DumpParseError, ValidationError

log = logging.getLogger(__name__)

QUESTION = "question"
ANSWER = "answer"
_POST_TYPES = {"1": QUESTION, "2": ANSWER}

# PostHistoryTypeId: 2 initial body, 5 edit body, 8 rollback body
BODY_HISTORY_TYPES = {"2", "5", "8"}
_GUID_RE = re.compile(r"^[0-9a-fA-F]{8}-[0-9a-fA-F]{4}-[0-9a-fA-F]{4}-[0-9a-fA-F]{4}-[0-9a-fA-F]{12}$")

NO_URC = "NO_URC"
URC = "URC"
URC_ADDRESSED = "URC_ADDRESSED"
URC_UNADDRESSED = "URC_UNADDRESSED"
BINARY_CLASSES = (NO_URC, URC)
THREE_CLASSES = (NO_URC, URC_ADDRESSED, URC_UNADDRESSED)

ADDRESSED_VALUES = ("comment", "post", "both", "no", "none")
ANNOTATION_COLUMNS = (
    "question_id",
    "answer_id",
    "comment_id",
    "needs_update",
    "addressed_in",
    "addressed_by_comment_id",
)


def parse_ts(value: str) -> datetime:
    """Parse a dump timestamp; naive values are taken to be UTC."""
    s = value.strip()
    if s.endswith("Z"):
        s = s[:-1] + "+00:00"
    ts = datetime.fromisoformat(s)
    if ts.tzinfo is None:
        return ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def format_ts(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).isoformat(timespec="microseconds")


def parse_tags(value: str | None) -> tuple[str, ...]:
    if not value:
        return ()
    if "<" in value:
        tags = re.findall(r"<([^<>]+)>", value)
    else:
        tags = value.strip("|").split("|")
    return tuple(t.strip().lower() for t in tags if t.strip())


@dataclass(frozen=True)
class RawPost:
    post_id: int
    post_type: str
    parent_id: int | None
    accepted_answer_id: int | None
    owner_user_id: int | None
    score: int
    creation_ts: datetime
    last_activity_ts: datetime
    tags: tuple[str, ...]
    body: str

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["creation_ts"] = format_ts(self.creation_ts)
        d["last_activity_ts"] = format_ts(self.last_activity_ts)
        d["tags"] = list(self.tags)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RawPost":
        return cls(
            post_id=int(d["post_id"]),
            post_type=d["post_type"],
            parent_id=d.get("parent_id"),
            accepted_answer_id=d.get("accepted_answer_id"),
            owner_user_id=d.get("owner_user_id"),
            score=int(d["score"]),
            creation_ts=parse_ts(d["creation_ts"]),
            last_activity_ts=parse_ts(d["last_activity_ts"]),
            tags=tuple(d.get("tags", ())),
            body=d.get("body", ""),
        )


@dataclass(frozen=True)
class RawComment:
    comment_id: int
    post_id: int
    owner_user_id: int | None
    score: int
    creation_ts: datetime
    text: str

    @property
    def sort_key(self):
        return (self.creation_ts, self.comment_id)

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["creation_ts"] = format_ts(self.creation_ts)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RawComment":
        return cls(
            comment_id=int(d["comment_id"]),
            post_id=int(d["post_id"]),
            owner_user_id=d.get("owner_user_id"),
            score=int(d["score"]),
            creation_ts=parse_ts(d["creation_ts"]),
            text=d.get("text", ""),
        )


@dataclass(frozen=True)
class RawUser:
    user_id: int
    reputation: int
    display_name: str

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    @classmethod
    def from_dict(cls, d: dict) -> "RawUser":
        return cls(int(d["user_id"]), int(d["reputation"]), d.get("display_name", ""))


@dataclass(frozen=True)
class PostEditEvent:
    post_id: int
    editor_user_id: int | None
    edit_ts: datetime
    body_after: str

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["edit_ts"] = format_ts(self.edit_ts)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PostEditEvent":
        return cls(int(d["post_id"]), d.get("editor_user_id"), parse_ts(d["edit_ts"]), d.get("body_after", ""))


@dataclass
class RawCorpus:
    posts: dict[int, RawPost] = field(default_factory=dict)
    comments: dict[int, RawComment] = field(default_factory=dict)
    users: dict[int, RawUser] = field(default_factory=dict)
    edits: dict[int, tuple[PostEditEvent, ...]] = field(default_factory=dict)
    summary: Counter = field(default_factory=Counter)

    def counts(self) -> dict[str, int]:
        kinds = Counter(p.post_type for p in self.posts.values())
        return {
            "questions": kinds[QUESTION],
            "answers": kinds[ANSWER],
            "comments": len(self.comments),
            "users": len(self.users),
            "edit_events": sum(len(v) for v in self.edits.values()),
        }

    def comments_on(self, post_id: int) -> list[RawComment]:
        return sorted((c for c in self.comments.values() if c.post_id == post_id), key=lambda c: c.sort_key)


@dataclass(frozen=True)
class AnswerThread:
    question: RawPost
    answer: RawPost
    comments: tuple[RawComment, ...]
    edits: tuple[PostEditEvent, ...]
    users: dict[int, RawUser]

    @property
    def answer_id(self) -> int:
        return self.answer.post_id

    def user(self, user_id: int | None) -> RawUser | None:
        return None if user_id is None else self.users.get(user_id)

    def comment(self, comment_id: int) -> RawComment:
        for c in self.comments:
            if c.comment_id == comment_id:
                return c
        raise KeyError(comment_id)

    def last_activity(self) -> datetime:
        last = self.edits[-1].edit_ts if self.edits else self.answer.creation_ts
        return max(self.answer.creation_ts, last)

    def to_dict(self) -> dict:
        return {
            "question": self.question.to_dict(),
            "answer": self.answer.to_dict(),
            "comments": [c.to_dict() for c in self.comments],
            "edits": [e.to_dict() for e in self.edits],
            "users": [self.users[k].to_dict() for k in sorted(self.users)],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AnswerThread":
        users = [RawUser.from_dict(u) for u in d.get("users", [])]
        return cls(
            question=RawPost.from_dict(d["question"]),
            answer=RawPost.from_dict(d["answer"]),
            comments=tuple(RawComment.from_dict(c) for c in d["comments"]),
            edits=tuple(PostEditEvent.from_dict(e) for e in d["edits"]),
            users={u.user_id: u for u in users},
        )


def _int(value: str | None) -> int | None:
    if value is None or value == "":
        return None
    return int(value)


def _iter_rows(path) -> Iterator[dict[str, str]]:
    """Yield attribute dicts of every ``<row>`` element; tolerate empty files."""
    if path is None:
        return
    path = Path(path)
    with open(path, "rb") as fh:
        if not fh.read(4096).strip():
            return
    try:
        for _, elem in ET.iterparse(path, events=("end",)):
            if elem.tag == "row":
                yield dict(elem.attrib)
                elem.clear()
    except ET.ParseError as exc:
        line = exc.position[0] if getattr(exc, "position", None) else 0
        raise DumpParseError(path, line, str(exc)) from None


def _row_error(path, n, exc):
    return DumpParseError(path, n, f"bad row #{n}: {exc!r}")


def parse_posts(path, summary: Counter) -> dict[int, RawPost]:
    posts = {}
    for n, row in enumerate(_iter_rows(path), 1):
        post_type = _POST_TYPES.get(row.get("PostTypeId", ""))
        if post_type is None:
            summary["skipped_post_type"] += 1
            continue
        try:
            created = parse_ts(row["CreationDate"])
            last = parse_ts(row["LastActivityDate"]) if row.get("LastActivityDate") else created
            post = RawPost(
                post_id=int(row["Id"]),
                post_type=post_type,
                parent_id=_int(row.get("ParentId")) if post_type == ANSWER else None,
                accepted_answer_id=_int(row.get("AcceptedAnswerId")) if post_type == QUESTION else None,
                owner_user_id=_int(row.get("OwnerUserId")),
                score=int(row.get("Score", 0)),
                creation_ts=created,
                last_activity_ts=max(created, last),
                tags=parse_tags(row.get("Tags")) if post_type == QUESTION else (),
                body=row.get("Body", ""),
            )
        except (KeyError, ValueError) as exc:
            raise _row_error(path, n, exc) from None
        posts[post.post_id] = post
    return posts


def parse_comments(path) -> dict[int, RawComment]:
    comments = {}
    for n, row in enumerate(_iter_rows(path), 1):
        try:
            c = RawComment(
                comment_id=int(row["Id"]),
                post_id=int(row["PostId"]),
                owner_user_id=_int(row.get("UserId")),
                score=max(0, int(row.get("Score", 0) or 0)),
                creation_ts=parse_ts(row["CreationDate"]),
                text=html.unescape(row.get("Text", "")),
            )
        except (KeyError, ValueError) as exc:
            raise _row_error(path, n, exc) from None
        comments[c.comment_id] = c
    return comments


def parse_users(path) -> dict[int, RawUser]:
    users = {}
    for n, row in enumerate(_iter_rows(path), 1):
        try:
            u = RawUser(int(row["Id"]), max(0, int(row.get("Reputation", 1))), row.get("DisplayName", ""))
        except (KeyError, ValueError) as exc:
            raise _row_error(path, n, exc) from None
        users[u.user_id] = u
    return users


def parse_history(path) -> dict[int, tuple[PostEditEvent, ...]]:
    """Collapse body-type PostHistory rows into per-post edit sequences."""
    raw = defaultdict(list)
    by_guid = {}
    for n, row in enumerate(_iter_rows(path), 1):
        if row.get("PostHistoryTypeId") not in BODY_HISTORY_TYPES:
            continue
        try:
            rec = (
                parse_ts(row["CreationDate"]),
                int(row["Id"]),
                int(row["PostId"]),
                _int(row.get("UserId")),
                row.get("Text", ""),
            )
        except (KeyError, ValueError) as exc:
            raise _row_error(path, n, exc) from None
        raw[rec[2]].append(rec)
        if row.get("RevisionGUID"):
            by_guid[row["RevisionGUID"]] = rec[4]
    edits = {}
    for post_id, recs in raw.items():
        recs.sort(key=lambda r: (r[0], r[1]))
        events = []
        for ts, _, pid, uid, text in recs:
            # some dumps store the target revision GUID for rollbacks instead of the body
            if _GUID_RE.match(text.strip()) and text.strip() in by_guid:
                text = by_guid[text.strip()]
            events.append(PostEditEvent(pid, uid, ts, text))
        edits[post_id] = tuple(events)
    return edits


def parse_dump(posts_file, comments_file, users_file, history_file) -> RawCorpus:
    summary = Counter()
    posts = parse_posts(posts_file, summary)
    comments = parse_comments(comments_file)
    users = parse_users(users_file)
    edits = parse_history(history_file)
    corpus = RawCorpus(posts, comments, users, edits, summary)
    summary.update(corpus.counts())
    log.info("parsed dump: %s", dict(summary))
    return corpus


def _thread_edits(answer: RawPost, events: Sequence[PostEditEvent]) -> tuple[PostEditEvent, ...]:
    # the edit sequence always opens with the creation event
    events = list(events)
    if not events:
        return (PostEditEvent(answer.post_id, answer.owner_user_id, answer.creation_ts, answer.body),)
    if events[0].edit_ts < answer.creation_ts:
        first = events[0]
        events[0] = PostEditEvent(first.post_id, first.editor_user_id, answer.creation_ts, first.body_after)
    elif events[0].edit_ts > answer.creation_ts:
        # initial-body row missing from history: the original text is unknown
        events.insert(0, PostEditEvent(answer.post_id, answer.owner_user_id, answer.creation_ts, ""))
    return tuple(events)


def build_thread(corpus: RawCorpus, question: RawPost, answer: RawPost, comments=None) -> AnswerThread:
    comments = tuple(comments if comments is not None else corpus.comments_on(answer.post_id))
    edits = _thread_edits(answer, corpus.edits.get(answer.post_id, ()))
    wanted = {question.owner_user_id, answer.owner_user_id}
    wanted.update(c.owner_user_id for c in comments)
    wanted.update(e.editor_user_id for e in edits)
    users = {uid: corpus.users[uid] for uid in wanted if uid is not None and uid in corpus.users}
    return AnswerThread(question, answer, comments, edits, users)


def _as_datetime(cutoff) -> datetime:
    if isinstance(cutoff, datetime):
        return cutoff if cutoff.tzinfo else cutoff.replace(tzinfo=timezone.utc)
    if isinstance(cutoff, date):
        return datetime(cutoff.year, cutoff.month, cutoff.day, tzinfo=timezone.utc)
    return _as_datetime(date.fromisoformat(str(cutoff)))


def select_answers(corpus: RawCorpus, tag: str, cutoff_date) -> list[AnswerThread]:
    """Answer threads passing the study's filter, ordered by answer id.

    Kept: answers to non-negative questions carrying ``tag`` that are
    accepted or top-voted (ties: accepted, then lowest id), were last
    touched on/after ``cutoff_date`` and have at least one comment.
    """
    tag = tag.lower()
    cutoff = _as_datetime(cutoff_date)
    answers_of = defaultdict(list)
    for p in corpus.posts.values():
        if p.post_type == ANSWER and p.parent_id is not None:
            answers_of[p.parent_id].append(p)
    comments_of = defaultdict(list)
    for c in corpus.comments.values():
        comments_of[c.post_id].append(c)

    threads = []
    for qid, answers in answers_of.items():
        q = corpus.posts.get(qid)
        if q is None or q.post_type != QUESTION or tag not in q.tags or q.score < 0:
            continue
        accepted = next((a for a in answers if a.post_id == q.accepted_answer_id), None)
        top = min(answers, key=lambda a: (-a.score, a is not accepted, a.post_id))
        chosen = {top.post_id: top}
        if accepted is not None:
            chosen[accepted.post_id] = accepted
        for a in chosen.values():
            if not comments_of.get(a.post_id):
                continue
            thread = build_thread(corpus, q, a, sorted(comments_of[a.post_id], key=lambda c: c.sort_key))
            if thread.last_activity() >= cutoff:
                threads.append(thread)
    threads.sort(key=lambda t: t.answer_id)
    return threads


def sample_answers(threads: Sequence[AnswerThread], n: int, seed: int) -> list[AnswerThread]:
    """Uniform sample without replacement; same seed and pool give the same sample."""
    if n < 0 or n > len(threads):
        raise ValueError(f"cannot sample {n} answers from a pool of {len(threads)}")
    pool = sorted(threads, key=lambda t: t.answer_id)
    rng = np.random.default_rng(int(seed) & 0xFFFFFFFFFFFFFFFF)
    picked = rng.choice(len(pool), size=n, replace=False) if n else []
    return [pool[i] for i in sorted(picked)]


def write_threads(threads: Iterable[AnswerThread], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for t in threads:
            fh.write(json.dumps(t.to_dict(), ensure_ascii=False, sort_keys=True) + "\n")


def read_threads(path) -> list[AnswerThread]:
    threads = []
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                threads.append(AnswerThread.from_dict(json.loads(line)))
            except (KeyError, ValueError, TypeError) as exc:
                raise DataError(f"{path}:{n}: bad thread record: {exc}") from None
    return threads


# --- annotations -----------------------------------------------------------


@dataclass(frozen=True)
class AnnotatedComment:
    question_id: int
    answer_id: int
    comment_id: int
    needs_update: bool
    addressed_in: str
    addressed_by_comment_id: int | None = None

    @property
    def is_urc(self) -> bool:
        return self.needs_update

    @property
    def is_addressed(self) -> bool:
        return self.addressed_in in ("comment", "post", "both")

    @property
    def in_comment(self) -> bool:
        return self.addressed_in in ("comment", "both")

    @property
    def in_post(self) -> bool:
        return self.addressed_in in ("post", "both")

    def label(self, scheme: str = "binary") -> str:
        if not self.needs_update:
            return NO_URC
        if scheme == "binary":
            return URC
        return URC_ADDRESSED if self.is_addressed else URC_UNADDRESSED


def class_names(scheme: str) -> tuple[str, ...]:
    if scheme == "binary":
        return BINARY_CLASSES
    if scheme == "three_class":
        return THREE_CLASSES
    raise ValueError(f"unknown class scheme {scheme!r}")


def _comment_index(corpus) -> dict[int, tuple[int, int | None, tuple]]:
    """comment_id -> (answer_id, question_id, sort key)."""
    index = {}
    if isinstance(corpus, RawCorpus):
        for c in corpus.comments.values():
            post = corpus.posts.get(c.post_id)
            qid = post.parent_id if post is not None else None
            index[c.comment_id] = (c.post_id, qid, c.sort_key)
    else:
        for t in corpus:
            for c in t.comments:
                index[c.comment_id] = (t.answer_id, t.question.post_id, c.sort_key)
    return index


def _normalize_addressed(value: str) -> str:
    v = value.strip().lower()
    return "none" if v in ("", "-", "none") else v


def load_annotations(path, corpus) -> list[AnnotatedComment]:
    """Read the annotation CSV and validate every row against ``corpus``.

    ``corpus`` is a RawCorpus or a sequence of AnswerThreads. All bad rows
    are collected before raising.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        text = fh.read()
    if not text.strip():
        return []
    reader = csv.DictReader(text.splitlines())
    missing = [c for c in ANNOTATION_COLUMNS if c not in (reader.fieldnames or [])]
    if missing:
        raise ValidationError(f"{path}: missing columns {missing}")

    index = _comment_index(corpus)
    out, dangling, illegal = [], [], []
    for line_no, row in enumerate(reader, 2):
        try:
            qid, aid, cid = int(row["question_id"]), int(row["answer_id"]), int(row["comment_id"])
            by = _int(row["addressed_by_comment_id"].strip()) if row["addressed_by_comment_id"] else None
        except ValueError as exc:
            illegal.append(f"line {line_no}: {exc}")
            continue
        needs = row["needs_update"].strip().lower()
        addressed = _normalize_addressed(row["addressed_in"])
        problems = []
        if needs not in ("yes", "no"):
            problems.append(f"needs_update={needs!r}")
        if addressed not in ADDRESSED_VALUES:
            problems.append(f"addressed_in={addressed!r}")
        if needs == "no" and addressed != "none":
            problems.append(f"needs_update=no with addressed_in={addressed}")
        if needs == "yes" and addressed == "none":
            problems.append("needs_update=yes without addressed_in")
        if addressed in ("comment", "both") and by is None:
            problems.append(f"addressed_in={addressed} without addressed_by_comment_id")
        if addressed not in ("comment", "both") and by is not None:
            problems.append(f"addressed_by_comment_id set with addressed_in={addressed}")
        if cid not in index:
            dangling.append(f"line {line_no}: comment {cid}")
            continue
        post_id, q_of, key = index[cid]
        if post_id != aid:
            problems.append(f"comment {cid} belongs to answer {post_id}, not {aid}")
        if q_of is not None and q_of != qid:
            problems.append(f"answer {aid} belongs to question {q_of}, not {qid}")
        if by is not None:
            target = index.get(by)
            if target is None:
                dangling.append(f"line {line_no}: addressing comment {by}")
                continue
            if target[0] != aid or target[2] <= key:
                problems.append(f"addressing comment {by} is not a later comment on answer {aid}")
        if problems:
            illegal.append(f"line {line_no}: " + ", ".join(problems))
            continue
        out.append(AnnotatedComment(qid, aid, cid, needs == "yes", addressed, by))
    if dangling:
        raise ValidationError(f"{path}: rows reference unknown comments", dangling)
    if illegal:
        raise ValidationError(f"{path}: illegal label combinations", illegal)
    return out


def write_annotations(annotations: Iterable[AnnotatedComment], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ANNOTATION_COLUMNS)
        for a in annotations:
            w.writerow([
                a.question_id,
                a.answer_id,
                a.comment_id,
                "yes" if a.needs_update else "no",
                "" if a.addressed_in == "none" else a.addressed_in,
                "" if a.addressed_by_comment_id is None else a.addressed_by_comment_id,
            ])

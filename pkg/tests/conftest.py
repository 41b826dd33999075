import sys
from datetime import datetime, timedelta, timezone
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from urcminer.ingest import AnswerThread, PostEditEvent, RawComment, RawPost, RawUser  # noqa: E402

import synth  # noqa: E402

UTC = timezone.utc
SCHEMA_APPENDED = ("For a list of implementations, including validators in various languages, "
                 "see JSON-Schema Implementations.")
SCHEMA_BODY = "JSON Schema is a way to describe the structure of JSON documents. Write the schema once and validate."


def ts(*args):
    return datetime(*args, tzinfo=UTC)


def post(pid, kind, owner, created, score=0, parent=None, accepted=None, tags=(), body=""):
    return RawPost(pid, kind, parent, accepted, owner, score, created, created, tuple(tags), body)


@pytest.fixture
def schema_thread():
    """Answer 36155326 with its four comments, questioner 1, answerer 2, commenter ubiquibacon 3."""
    users = {
        1: RawUser(1, 120, "Steven Aka Taz"),
        2: RawUser(2, 15400, "Answer Owner"),
        3: RawUser(3, 3300, "ubiquibacon"),
    }
    q = post(36152972, "question", 1, ts(2016, 3, 22, 9, 0), score=3, tags=("java", "json"))
    a_ts = ts(2016, 3, 22, 10, 0)
    a = post(36155326, "answer", 2, a_ts, score=7, parent=q.post_id, body=SCHEMA_BODY)
    comments = (
        RawComment(60185364, a.post_id, 1, 2, ts(2016, 3, 28, 12, 0),
                   "Thank you. Is it easy to find validators for the schema in other languages?"),
        RawComment(60190443, a.post_id, 2, 1, ts(2016, 3, 28, 13, 0), "Generally, sure. See the implementations page."),
        RawComment(99591573, a.post_id, 3, 0, ts(2019, 6, 1, 8, 0), "Can you expand on why the schema is needed?"),
        RawComment(99594548, a.post_id, 2, 0, ts(2019, 6, 1, 9, 30), "@ubiquibacon: Of course any document can be checked."),
    )
    edits = (
        PostEditEvent(a.post_id, 2, a_ts, SCHEMA_BODY),
        PostEditEvent(a.post_id, 2, ts(2016, 3, 29, 7, 0), SCHEMA_BODY + " " + SCHEMA_APPENDED),
    )
    return AnswerThread(q, a, comments, edits, users)


@pytest.fixture
def smallest_thread():
    """Answer 27304654 with four unaddressed URCs."""
    users = {10: RawUser(10, 50, "StevenAkaTaz"), 11: RawUser(11, 900, "Answerer Two"),
             12: RawUser(12, 10, "third"), 13: RawUser(13, 20, "fourth"), 14: RawUser(14, 30, "fifth")}
    q = post(27304556, "question", 10, ts(2014, 12, 4, 9, 0), score=1, tags=("java",), accepted=27304654)
    a_ts = ts(2014, 12, 4, 9, 30)
    a = post(27304654, "answer", 11, a_ts, score=2, parent=q.post_id, body="Loop and keep the smallest.")
    base = ts(2014, 12, 4, 10, 0)
    comments = (
        RawComment(43072230, a.post_id, 12, 1, base, "What about if the smallest value is repeated?"),
        RawComment(43072237, a.post_id, 13, 0, base + timedelta(minutes=1), "should probably stop at the end"),
        RawComment(43073707, a.post_id, 10, 0, base + timedelta(hours=1), "I accepted your answer not because"),
        RawComment(76939452, a.post_id, 14, 0, base + timedelta(days=900), "@StevenAkaTaz Its better to sort"),
    )
    edits = (PostEditEvent(a.post_id, 11, a_ts, a.body),)
    return AnswerThread(q, a, comments, edits, users)


# hand-labelled rows for the two fixture threads
LABELLED_CSV = """question_id,answer_id,comment_id,needs_update,addressed_in,addressed_by_comment_id
36152972,36155326,60185364,yes,both,60190443
36152972,36155326,60190443,no,,
36152972,36155326,99591573,yes,comment,99594548
36152972,36155326,99594548,no,,
27304556,27304654,43072230,yes,no,
27304556,27304654,43072237,yes,no,
27304556,27304654,43073707,yes,no,
27304556,27304654,76939452,yes,no,
"""


@pytest.fixture
def labelled_csv(tmp_path):
    p = tmp_path / "labelled.csv"
    p.write_text(LABELLED_CSV)
    return p


@pytest.fixture(scope="session")
def synthetic(tmp_path_factory):
    root = tmp_path_factory.mktemp("synthetic")
    dump, corpus, threads, anns, path = synth.build_annotated(root, n_questions=120, seed=3)
    return {"root": root, "dump": dump, "corpus": corpus, "threads": threads, "annotations": anns, "csv": path}


# one line per acceptance criterion, collected by test_acceptance and printed at the end of the run
ACCEPTANCE_RESULTS: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(ACCEPTANCE_RESULTS[n])

import dataclasses
import json
from datetime import timedelta

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from urcminer.empirics import (
    address_latency,
    empirics_report,
    nearest_rank,
    prevalence,
    render_tables,
    report_json,
    role_location_matrix,
    score_quantiles,
)
from urcminer.ingest import AnnotatedComment, load_annotations


@pytest.fixture
def labelled(schema_thread, smallest_thread, labelled_csv):
    threads = [schema_thread, smallest_thread]
    return load_annotations(labelled_csv, threads), threads


def test_prevalence_labelled(labelled):
    anns, _ = labelled
    p = prevalence(anns)
    assert (p["urc"]["count"], p["urc"]["of"], p["urc"]["percent"]) == (6, 8, 75.0)
    assert (p["addressed"]["count"], p["addressed"]["of"]) == (2, 6)
    assert p["addressed"]["percent"] == 33.3
    assert [p[k]["count"] for k in ("in_comment", "in_post", "in_both")] == [2, 1, 1]


def test_prevalence_all_no_urc(schema_thread):
    anns = [AnnotatedComment(1, 2, c, False, "none", None) for c in (1, 2, 3)]
    p = prevalence(anns)
    assert (p["urc"]["count"], p["urc"]["of"], p["urc"]["percent"]) == (0, 3, 0.0)
    assert p["addressed"]["percent"] is None and p["in_both"]["of"] == 0
    text = render_tables({"prevalence": p, "latency": address_latency(anns, []),
                          "role_matrix": role_location_matrix(anns, []), "score_quantiles": score_quantiles([], [])})
    assert "—" in text


def test_latency_labelled(labelled):
    anns, threads = labelled
    lat = address_latency(anns, threads)
    assert [r["count"] for r in lat["rows"]] == [0, 1, 2, 2, 2]
    assert [r["pct_of_addressed"] for r in lat["rows"]] == [0.0, 50.0, 100.0, 100.0, 100.0]
    assert [r["pct_of_all"] for r in lat["rows"]] == [0.0, 16.7, 33.3, 33.3, 33.3]
    both = next(r for r in lat["latencies"] if r["comment_id"] == 60185364)
    assert (both["minutes"], both["via_comment_minutes"], both["via_post_minutes"]) == (60.0, 60.0, 1140.0)


def test_three_minute_reply_in_every_bucket(smallest_thread):
    reply = dataclasses.replace(smallest_thread.comments[1],
                                creation_ts=smallest_thread.comments[0].creation_ts + timedelta(minutes=3))
    t = dataclasses.replace(smallest_thread, comments=(smallest_thread.comments[0], reply) + smallest_thread.comments[2:])
    anns = [AnnotatedComment(t.question.post_id, t.answer_id, 43072230, True, "comment", 43072237)]
    lat = address_latency(anns, [t])
    assert all(r["count"] == 1 for r in lat["rows"])


def test_post_label_without_later_edit_excluded(smallest_thread):
    anns = [AnnotatedComment(smallest_thread.question.post_id, smallest_thread.answer_id, 43072230, True, "post", None)]
    lat = address_latency(anns, [smallest_thread])
    assert lat["post_label_without_later_edit"] == 1 and lat["excluded_no_later_edit"] == 1
    assert all(r["count"] == 0 for r in lat["rows"]) and lat["n_addressed"] == 1


def test_role_matrix_labelled(labelled):
    anns, threads = labelled
    m = role_location_matrix(anns, threads)
    owner = m["rows"]["answer_owner"]
    assert [owner[k] for k in ("in_comment", "in_post", "in_either", "in_both")] == [2, 1, 2, 1]
    assert m["anyone"] == {"in_comment": 2, "in_post": 1, "in_either": 2, "in_both": 1}


def test_questioner_row(smallest_thread):
    anns = [AnnotatedComment(smallest_thread.question.post_id, smallest_thread.answer_id, 43072230, True, "comment", 43073707)]
    q = role_location_matrix(anns, [smallest_thread])["rows"]["questioner"]
    assert [q[k] for k in ("in_comment", "in_post", "in_either", "in_both")] == [1, 0, 1, 0]


def test_editor_post_role(schema_thread):
    edit = dataclasses.replace(schema_thread.edits[1], editor_user_id=3)
    t = dataclasses.replace(schema_thread, edits=(schema_thread.edits[0], edit))
    anns = [AnnotatedComment(t.question.post_id, t.answer_id, 60185364, True, "post", None)]
    rows = role_location_matrix(anns, [t])["rows"]
    assert rows["answer_editor"]["in_post"] == 1 and rows["answer_owner"]["in_post"] == 0


def test_score_quantiles_labelled(labelled):
    anns, threads = labelled
    q = score_quantiles(anns, threads)
    assert q["nearest_rank"]["URC"] == [0, 1, 1, 2, 2, 2]
    assert q["nearest_rank"]["NO_URC"] == [0, 1, 1, 1, 1, 1]
    assert q["n"] == {"URC": 6, "NO_URC": 2}


def test_all_zero_scores(smallest_thread):
    t = dataclasses.replace(smallest_thread, comments=tuple(dataclasses.replace(c, score=0) for c in smallest_thread.comments))
    anns = [AnnotatedComment(t.question.post_id, t.answer_id, c.comment_id, True, "no", None) for c in t.comments]
    q = score_quantiles(anns, [t])
    assert q["nearest_rank"]["URC"] == [0] * 6 and q["interpolated"]["URC"] == [0.0] * 6


def test_nearest_rank():
    assert nearest_rank([1, 2, 3, 4], 0.5) == 2
    assert nearest_rank([1, 2, 3, 4], 0.75) == 3
    assert nearest_rank(list(range(1, 21)), 0.95) == 19
    assert nearest_rank([], 0.5) is None


def test_report_renders(labelled):
    anns, threads = labelled
    rep = empirics_report(anns, threads)
    assert json.loads(report_json(rep))["prevalence"]["urc"]["count"] == 6
    text = render_tables(rep)
    assert "75.0%" in text and "by answer_owner" in text and "by anyone" in text


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_invariants_on_random_labels(synthetic, data):
    threads = synthetic["threads"]
    anns = []
    for t in threads:
        for i, c in enumerate(t.comments):
            later = [d.comment_id for d in t.comments[i + 1:]]
            kinds = ["no_urc", "no"] + (["comment", "both"] if later else []) + ["post"]
            kind = data.draw(st.sampled_from(kinds))
            if kind == "no_urc":
                anns.append(AnnotatedComment(t.question.post_id, t.answer_id, c.comment_id, False, "none", None))
            else:
                by = data.draw(st.sampled_from(later)) if kind in ("comment", "both") else None
                anns.append(AnnotatedComment(t.question.post_id, t.answer_id, c.comment_id, True, kind, by))
    p = prevalence(anns)
    assert p["in_both"]["count"] <= min(p["in_comment"]["count"], p["in_post"]["count"])
    m = role_location_matrix(anns, threads)
    for row in m["rows"].values():
        assert row["in_either"] <= row["in_comment"] + row["in_post"]
        assert row["in_both"] <= min(row["in_comment"], row["in_post"])
    a = m["anyone"]
    assert a["in_either"] == a["in_comment"] + a["in_post"] - a["in_both"] == p["addressed"]["count"]
    lat = address_latency(anns, threads)
    for prev, row in zip(lat["rows"], lat["rows"][1:]):
        assert row["count"] >= prev["count"]
    for row in lat["rows"]:
        if row["pct_of_all"] is not None and row["pct_of_addressed"] is not None:
            assert row["pct_of_all"] <= row["pct_of_addressed"]

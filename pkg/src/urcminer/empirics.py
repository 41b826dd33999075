"""URC statistics from annotated threads: prevalence, address latency,
who-addressed-where, and comment-score quantiles.
"""

from __future__ import annotations

import json
import logging
import math
from datetime import timedelta
from typing import Sequence

import numpy as np

from urcminer.errors import DataError
from urcminer.ingest import NO_URC, URC, AnnotatedComment, AnswerThread

log = logging.getLogger(__name__)

LATENCY_THRESHOLDS = (
    ("5 min", timedelta(minutes=5)),
    ("1 hour", timedelta(hours=1)),
    ("1 day", timedelta(days=1)),
    ("7 days", timedelta(days=7)),
    ("1 year", timedelta(days=365)),
)
QUANTILE_PROBS = (0.5, 0.75, 0.8, 0.85, 0.9, 0.95)

OWNER, EDITOR, QUESTIONER, OTHERS = "answer_owner", "answer_editor", "questioner", "others"
ROLES = (OWNER, EDITOR, QUESTIONER, OTHERS)
LOCATIONS = ("in_comment", "in_post", "in_either", "in_both")


def _pct(count, of):
    return None if of == 0 else round(100.0 * count / of, 1)


def _row(question, count, of):
    return {"question": question, "count": count, "of": of, "percent": _pct(count, of)}


def prevalence(annotated: Sequence[AnnotatedComment]) -> dict:
    urcs = [a for a in annotated if a.is_urc]
    addressed = [a for a in urcs if a.is_addressed]
    n_addr = len(addressed)
    return {
        "urc": _row("How many comments are URC?", len(urcs), len(annotated)),
        "addressed": _row("How many of URCs are addressed (either in post or next comments)?", n_addr, len(urcs)),
        "in_comment": _row("How many of the addressed URCs are addressed in the next comments?",
                           sum(a.in_comment for a in addressed), n_addr),
        "in_post": _row("How many of the addressed URCs are addressed in the post body?",
                        sum(a.in_post for a in addressed), n_addr),
        "in_both": _row("How many of the addressed URCs are addressed both in the next comments and the post body?",
                        sum(a.addressed_in == "both" for a in addressed), n_addr),
    }


def _thread_index(threads) -> dict[int, AnswerThread]:
    return {t.answer_id: t for t in threads}


def _thread_for(index, a: AnnotatedComment) -> AnswerThread:
    t = index.get(a.answer_id)
    if t is None:
        raise DataError(f"no thread for answer {a.answer_id} (comment {a.comment_id})")
    return t


def first_edit_after(thread: AnswerThread, ts):
    """The first body edit strictly after ``ts`` (the creation event never counts)."""
    for e in thread.edits[1:]:
        if e.edit_ts > ts:
            return e
    return None


def urc_resolution(thread: AnswerThread, a: AnnotatedComment) -> dict:
    """Timestamps and actors of the comment and post-edit that addressed ``a``."""
    urc = thread.comment(a.comment_id)
    out = {"comment_id": a.comment_id, "urc_ts": urc.creation_ts, "comment": None, "post": None}
    if a.in_comment:
        out["comment"] = thread.comment(a.addressed_by_comment_id)
    if a.in_post:
        out["post"] = first_edit_after(thread, urc.creation_ts)
    return out


def _minutes(delta: timedelta) -> float:
    return delta.total_seconds() / 60.0


def address_latency(annotated: Sequence[AnnotatedComment], threads, thresholds=LATENCY_THRESHOLDS) -> dict:
    """Share of URCs addressed within each threshold, over addressed URCs and over all URCs.

    Address time is the earlier of the addressing comment and the first post
    edit after the URC. A post-addressed URC without any later edit is
    excluded from the counts (but not from the denominators) and counted.
    """
    index = _thread_index(threads)
    urcs = [a for a in annotated if a.is_urc]
    addressed = [a for a in urcs if a.is_addressed]
    latencies, excluded, missing_edit = [], 0, 0
    for a in addressed:
        res = urc_resolution(_thread_for(index, a), a)
        via_c = _minutes(res["comment"].creation_ts - res["urc_ts"]) if res["comment"] else None
        via_p = _minutes(res["post"].edit_ts - res["urc_ts"]) if res["post"] else None
        if a.in_post and via_p is None:
            log.warning("URC %s is marked addressed in post but the answer has no later edit", a.comment_id)
            missing_edit += 1
        candidates = [m for m in (via_c, via_p) if m is not None]
        if not candidates:
            excluded += 1
        latencies.append({
            "comment_id": a.comment_id,
            "addressed_in": a.addressed_in,
            "minutes": min(candidates) if candidates else None,
            "via_comment_minutes": via_c,
            "via_post_minutes": via_p,
        })
    mins = [r["minutes"] for r in latencies if r["minutes"] is not None]
    rows = []
    for label, delta in thresholds:
        limit = _minutes(delta)
        count = sum(m <= limit for m in mins)
        rows.append({
            "within": label,
            "minutes": limit,
            "count": count,
            "pct_of_addressed": _pct(count, len(addressed)),
            "pct_of_all": _pct(count, len(urcs)),
        })
    return {
        "n_addressed": len(addressed),
        "n_urc": len(urcs),
        "rows": rows,
        "excluded_no_later_edit": excluded,
        "post_label_without_later_edit": missing_edit,
        "latencies": latencies,
    }


def _comment_role(thread: AnswerThread, user_id) -> str:
    if user_id is None:
        return OTHERS
    if user_id == thread.answer.owner_user_id:
        return OWNER
    editors = {e.editor_user_id for e in thread.edits[1:]}
    if user_id in editors:
        return EDITOR
    if user_id == thread.question.owner_user_id:
        return QUESTIONER
    return OTHERS


def _post_role(thread: AnswerThread, edit) -> str:
    owner = thread.answer.owner_user_id
    if edit.editor_user_id is not None and edit.editor_user_id == owner:
        return OWNER
    return EDITOR


def role_location_matrix(annotated: Sequence[AnnotatedComment], threads) -> dict:
    """Counts of addressed URCs per addresser role and location.

    The ``anyone`` row counts URCs by label, so its either/both cells are
    not column sums.
    """
    index = _thread_index(threads)
    rows = {r: dict.fromkeys(LOCATIONS, 0) for r in ROLES}
    anyone = dict.fromkeys(LOCATIONS, 0)
    unresolved_post = 0
    for a in annotated:
        if not (a.is_urc and a.is_addressed):
            continue
        thread = _thread_for(index, a)
        res = urc_resolution(thread, a)
        c_role = _comment_role(thread, res["comment"].owner_user_id) if res["comment"] else None
        p_role = _post_role(thread, res["post"]) if res["post"] else None
        if a.in_post and p_role is None:
            unresolved_post += 1
        if c_role:
            rows[c_role]["in_comment"] += 1
        if p_role:
            rows[p_role]["in_post"] += 1
        for r in {c_role, p_role} - {None}:
            rows[r]["in_either"] += 1
        if c_role is not None and c_role == p_role:
            rows[c_role]["in_both"] += 1
        anyone["in_comment"] += a.in_comment
        anyone["in_post"] += a.in_post
        anyone["in_either"] += 1
        anyone["in_both"] += a.addressed_in == "both"
    return {"rows": rows, "anyone": anyone, "unresolved_post": unresolved_post}


def nearest_rank(sorted_values: Sequence[float], p: float):
    n = len(sorted_values)
    if n == 0:
        return None
    rank = max(1, math.ceil(p * n - 1e-9))
    return sorted_values[rank - 1]


def score_quantiles(annotated: Sequence[AnnotatedComment], threads, probs=QUANTILE_PROBS) -> dict:
    """Nearest-rank quantiles of comment score per class, plus linear-interpolated ones."""
    index = _thread_index(threads)
    scores = {URC: [], NO_URC: []}
    for a in annotated:
        c = _thread_for(index, a).comment(a.comment_id)
        scores[URC if a.is_urc else NO_URC].append(c.score)
    out = {"probs": list(probs), "nearest_rank": {}, "interpolated": {}, "n": {}}
    for cls, vals in scores.items():
        vals = sorted(vals)
        out["n"][cls] = len(vals)
        out["nearest_rank"][cls] = [nearest_rank(vals, p) for p in probs]
        out["interpolated"][cls] = [float(np.quantile(vals, p)) if vals else None for p in probs]
    return out


def empirics_report(annotated: Sequence[AnnotatedComment], threads) -> dict:
    return {
        "prevalence": prevalence(annotated),
        "latency": address_latency(annotated, threads),
        "role_matrix": role_location_matrix(annotated, threads),
        "score_quantiles": score_quantiles(annotated, threads),
    }


def _fmt_pct(p):
    return "—" if p is None else f"{p:.1f}%"


def render_tables(report: dict) -> str:
    out = []
    prev = report["prevalence"]
    out.append("URC prevalence")
    width = max(len(r["question"]) for r in prev.values())
    for r in prev.values():
        out.append(f"  {r['question']:<{width}}  {r['count']:>5} of {r['of']:<5} {_fmt_pct(r['percent']):>7}")

    lat = report["latency"]
    out.append("")
    out.append(f"Addressed within     of {lat['n_addressed']} addressed   of {lat['n_urc']} URCs")
    for r in lat["rows"]:
        out.append(f"  {r['within']:<8}  {_fmt_pct(r['pct_of_addressed']):>20} {_fmt_pct(r['pct_of_all']):>12}")

    rm = report["role_matrix"]
    out.append("")
    out.append(f"  {'URCs addressed':<18}" + "".join(f"{c:>11}" for c in LOCATIONS))
    for role in ROLES:
        out.append(f"  {'by ' + role:<18}" + "".join(f"{rm['rows'][role][c]:>11}" for c in LOCATIONS))
    out.append(f"  {'by anyone':<18}" + "".join(f"{rm['anyone'][c]:>11}" for c in LOCATIONS))

    sq = report["score_quantiles"]
    out.append("")
    out.append(f"  {'Category':<8}" + "".join(f"{int(round(100 * p)):>5}%" for p in sq["probs"]))
    for cls in (NO_URC, URC):
        vals = sq["nearest_rank"][cls]
        out.append(f"  {cls:<8}" + "".join(f"{'—' if v is None else v:>6}" for v in vals))
    return "\n".join(out)


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, default=str)

"""Classification metrics: per-class P/R/F1, accuracy, confusion matrix, rank AUC."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from urcminer.errors import UndefinedMetricError


def average_ranks(x) -> np.ndarray:
    """1-based ranks with ties sharing their mean rank."""
    x = np.asarray(x, dtype=np.float64)
    order = np.argsort(x, kind="mergesort")
    xs = x[order]
    ranks = np.empty(len(x), dtype=np.float64)
    boundaries = np.flatnonzero(np.diff(xs)) + 1
    starts = np.concatenate([[0], boundaries])
    ends = np.concatenate([boundaries, [len(x)]])
    for s, e in zip(starts, ends):
        ranks[order[s:e]] = (s + 1 + e) / 2.0
    return ranks


def auc(truth_binary, scores) -> float:
    """Mann-Whitney AUC: P(score_pos > score_neg) + 0.5 * P(tie)."""
    y = np.asarray(truth_binary).astype(bool)
    s = np.asarray(scores, dtype=np.float64)
    if y.shape != s.shape:
        raise ValueError(f"{len(y)} labels but {len(s)} scores")
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("AUC needs both positive and negative instances")
    r = average_ranks(s)
    u = r[y].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


@dataclass
class ClassStats:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass
class EvalReport:
    classes: list[str]
    accuracy: float
    auc: float | None
    per_class: dict[str, ClassStats]
    confusion: list[list[int]]
    n: int
    flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["per_class"] = {k: asdict(v) for k, v in self.per_class.items()}
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_table(self, title: str | None = None) -> str:
        head = f"Acc: {100 * self.accuracy:.1f}%"
        if self.auc is not None:
            head += f"  AUC: {self.auc:.3f}"
        width = max([len("Category")] + [len(c) for c in self.classes])
        lines = [title] if title else []
        lines.append(head)
        lines.append(f"{'Category':<{width}}  {'P':>6} {'R':>6} {'F1':>6} {'Supp.':>6}")
        for c in self.classes:
            s = self.per_class[c]
            lines.append(f"{c:<{width}}  {s.precision:6.3f} {s.recall:6.3f} {s.f1:6.3f} {s.support:6d}")
        return "\n".join(lines)


def confusion_matrix(truth, predictions, classes) -> np.ndarray:
    pos = {c: i for i, c in enumerate(classes)}
    cm = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for t, p in zip(truth, predictions):
        cm[pos[t], pos[p]] += 1
    return cm


def classification_report(truth: Sequence, predictions: Sequence, classes=None, probabilities=None,
                          positive=None) -> EvalReport:
    """Rows of ``confusion`` are true classes, columns predicted.

    ``probabilities`` (n x len(classes)) enables AUC: binary AUC on
    ``positive`` (default: the last class), macro one-vs-rest otherwise.
    Zero denominators give 0 and are listed in ``flags``.
    """
    truth = [str(t) for t in truth]
    predictions = [str(p) for p in predictions]
    if len(truth) != len(predictions):
        raise ValueError(f"{len(truth)} truth labels but {len(predictions)} predictions")
    classes = list(classes) if classes is not None else sorted(set(truth) | set(predictions))
    unknown = sorted((set(truth) | set(predictions)) - set(classes))
    if unknown:
        raise ValueError(f"label {unknown[0]!r} not in class list {classes}")
    cm = confusion_matrix(truth, predictions, classes)
    n = len(truth)
    flags = []
    per_class = {}
    for i, c in enumerate(classes):
        tp = int(cm[i, i])
        fp = int(cm[:, i].sum()) - tp
        fn = int(cm[i, :].sum()) - tp
        if tp + fp == 0:
            flags.append(f"precision undefined for {c}")
        if tp + fn == 0:
            flags.append(f"recall undefined for {c}")
        p = tp / (tp + fp) if tp + fp else 0.0
        r = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * p * r / (p + r) if p + r else 0.0
        per_class[c] = ClassStats(p, r, f1, tp + fn)
    acc = float(np.trace(cm) / n) if n else 0.0

    auc_value = None
    if probabilities is not None and n:
        proba = np.asarray(probabilities, dtype=np.float64)
        truth_arr = np.asarray(truth)
        if len(classes) == 2:
            k = classes.index(positive) if positive is not None else 1
            try:
                auc_value = auc(truth_arr == classes[k], proba[:, k])
            except UndefinedMetricError:
                flags.append("auc undefined: single-class truth")
        else:
            vals = []
            for k, c in enumerate(classes):
                y = truth_arr == c
                if y.all() or not y.any():
                    flags.append(f"one-vs-rest auc undefined for {c}")
                    continue
                vals.append(auc(y, proba[:, k]))
            auc_value = float(np.mean(vals)) if vals else None
    return EvalReport(classes, acc, auc_value, per_class, cm.tolist(), n, flags)

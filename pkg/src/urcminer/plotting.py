"""Figures written next to the JSON/text reports."""

from __future__ import annotations

import io
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from urcminer.empirics import LOCATIONS, ROLES  # noqa: E402
from urcminer.manifest import write_atomic  # noqa: E402

_SAVE = {"dpi": 120, "bbox_inches": "tight", "metadata": {"Software": None}}


def _style(ax):
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)
    ax.tick_params(labelsize=8)


def _save(fig, path) -> Path:
    path = Path(path)
    buf = io.BytesIO()
    fig.savefig(buf, format="png", **_SAVE)
    plt.close(fig)
    write_atomic(path, buf.getvalue())
    return path


def latency_figure(latency: dict, path) -> Path:
    rows = latency["rows"]
    labels = [r["within"] for r in rows]
    x = np.arange(len(rows))
    fig, ax = plt.subplots(figsize=(5, 3))
    for off, key, name in ((-0.2, "pct_of_addressed", f"of {latency['n_addressed']} addressed"),
                           (0.2, "pct_of_all", f"of {latency['n_urc']} URCs")):
        vals = [r[key] or 0.0 for r in rows]
        ax.bar(x + off, vals, width=0.4, label=name)
    ax.set_xticks(x, labels)
    ax.set_ylabel("% addressed within")
    ax.set_ylim(0, 100)
    ax.legend(fontsize=7, frameon=False)
    _style(ax)
    return _save(fig, path)


def role_matrix_figure(role_matrix: dict, path) -> Path:
    data = np.array([[role_matrix["rows"][r][c] for c in LOCATIONS] for r in ROLES]
                    + [[role_matrix["anyone"][c] for c in LOCATIONS]])
    ylabels = [r.replace("_", " ") for r in ROLES] + ["anyone"]
    fig, ax = plt.subplots(figsize=(5, 3))
    ax.imshow(data, cmap="Blues", aspect="auto")
    ax.set_xticks(range(len(LOCATIONS)), [c.replace("_", " ") for c in LOCATIONS])
    ax.set_yticks(range(len(ylabels)), ylabels)
    top = data.max() if data.size else 0
    for i in range(data.shape[0]):
        for j in range(data.shape[1]):
            ax.text(j, i, str(data[i, j]), ha="center", va="center", fontsize=8,
                    color="white" if top and data[i, j] > top / 2 else "black")
    ax.tick_params(labelsize=8)
    return _save(fig, path)


def score_quantile_figure(quantiles: dict, path) -> Path:
    probs = [int(round(100 * p)) for p in quantiles["probs"]]
    fig, ax = plt.subplots(figsize=(5, 3))
    for cls, vals in quantiles["nearest_rank"].items():
        ax.step(probs, [np.nan if v is None else v for v in vals], where="mid", label=cls)
    ax.set_xlabel("quantile (%)")
    ax.set_ylabel("comment score")
    ax.legend(fontsize=7, frameon=False)
    _style(ax)
    return _save(fig, path)


def confusion_figure(report, path) -> Path:
    cm = np.asarray(report.confusion)
    fig, ax = plt.subplots(figsize=(3.5, 3))
    ax.imshow(cm, cmap="Greens")
    ax.set_xticks(range(len(report.classes)), report.classes, rotation=30, ha="right")
    ax.set_yticks(range(len(report.classes)), report.classes)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    for i in range(cm.shape[0]):
        for j in range(cm.shape[1]):
            ax.text(j, i, str(cm[i, j]), ha="center", va="center", fontsize=8)
    ax.tick_params(labelsize=8)
    return _save(fig, path)


def roc_points(truth_binary, scores):
    y = np.asarray(truth_binary, dtype=bool)
    s = np.asarray(scores, dtype=np.float64)
    thresholds = np.unique(s)[::-1]
    tpr = [0.0] + [float((s[y] >= t).mean()) for t in thresholds]
    fpr = [0.0] + [float((s[~y] >= t).mean()) for t in thresholds]
    return np.array(fpr), np.array(tpr)


def roc_figure(truth_binary, scores, path, auc_value=None) -> Path:
    fpr, tpr = roc_points(truth_binary, scores)
    fig, ax = plt.subplots(figsize=(3.5, 3.5))
    label = "ROC" if auc_value is None else f"AUC = {auc_value:.3f}"
    ax.plot(fpr, tpr, label=label)
    ax.plot([0, 1], [0, 1], ls="--", color="grey", lw=0.8)
    ax.set_xlabel("false positive rate")
    ax.set_ylabel("true positive rate")
    ax.legend(fontsize=7, frameon=False, loc="lower right")
    _style(ax)
    return _save(fig, path)


def importance_figure(feature_names, importances, path, top=25) -> Path:
    imp = np.asarray(importances, dtype=np.float64)
    order = np.argsort(-imp, kind="stable")[:top][::-1]
    fig, ax = plt.subplots(figsize=(5, 0.22 * len(order) + 0.8))
    ax.barh([feature_names[i] for i in order], imp[order])
    ax.set_xlabel("mean impurity decrease")
    _style(ax)
    return _save(fig, path)

"""Random forest of CART trees (Gini impurity, bootstrap rows, sqrt(d) features per split).

Every tree draws from its own child of ``SeedSequence(seed)``, so training
in parallel gives exactly the sequential result.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from urcminer.errors import DataError, TrainingError
from urcminer.matrix import Matrix
from urcminer.models.base import TrainedModel, check_training_input, encode_labels

LEAF = -1


class Tree:
    __slots__ = ("feature", "threshold", "left", "right", "counts")

    def __init__(self, feature, threshold, left, right, counts):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.counts = np.asarray(counts, dtype=np.int64)

    @property
    def n_nodes(self):
        return len(self.feature)

    def apply(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        active = self.feature[node] != LEAF
        while active.any():
            r, nd = rows[active], node[active]
            go_left = X[r, self.feature[nd]] <= self.threshold[nd]
            node[r] = np.where(go_left, self.left[nd], self.right[nd])
            active = self.feature[node] != LEAF
        return node

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        c = self.counts[self.apply(X)].astype(np.float64)
        return c / c.sum(axis=1, keepdims=True)


def _scan(Xs: np.ndarray, ys: np.ndarray, n_classes: int):
    """Best Gini split over the columns of ``Xs``: (column, threshold, score) or None.

    ``score`` is sum_k left_k^2/n_left + sum_k right_k^2/n_right; larger is purer.
    """
    n = Xs.shape[0]
    order = np.argsort(Xs, axis=0, kind="stable")
    xs = np.take_along_axis(Xs, order, axis=0)
    onehot = np.eye(n_classes)[ys[order]]
    left = np.cumsum(onehot, axis=0)[:-1]
    right = left[-1] + onehot[-1] - left
    n_left = np.arange(1, n, dtype=np.float64)[:, None]
    score = (left ** 2).sum(axis=2) / n_left + (right ** 2).sum(axis=2) / (n - n_left)
    score[xs[:-1] >= xs[1:]] = -np.inf
    flat = score.T.ravel()
    k = int(np.argmax(flat))
    if not np.isfinite(flat[k]):
        return None
    col, i = divmod(k, n - 1)
    a, b = xs[i, col], xs[i + 1, col]
    thr = a + (b - a) / 2.0
    if not a <= thr < b:
        thr = a
    return col, float(thr), float(flat[k])


def _best_split(X, y, idx, n_classes, max_features, rng):
    d = X.shape[1]
    order = rng.permutation(d)
    ys = y[idx]
    # sklearn-style: keep drawing features past max_features until one splits
    for start in range(0, d, max_features):
        group = order[start:start + max_features]
        sub = X[np.ix_(idx, group)]
        keep = sub.min(axis=0) < sub.max(axis=0)
        if not keep.any():
            continue
        res = _scan(sub[:, keep], ys, n_classes)
        if res is not None:
            col, thr, score = res
            return int(group[np.flatnonzero(keep)[col]]), thr, score
    return None


def build_tree(X, y, n_classes, max_features, rng, sample=None):
    """Grow one unpruned CART tree; returns (Tree, impurity-decrease per feature)."""
    idx0 = np.arange(len(y)) if sample is None else sample
    feature, threshold, left, right, counts = [], [], [], [], []
    importance = np.zeros(X.shape[1])

    def new_node(idx):
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        counts.append(np.bincount(y[idx], minlength=n_classes))
        return len(feature) - 1

    stack = [(new_node(idx0), idx0)]
    while stack:
        node, idx = stack.pop()
        c = counts[node]
        if len(idx) < 2 or np.count_nonzero(c) <= 1:
            continue
        split = _best_split(X, y, idx, n_classes, max_features, rng)
        if split is None:
            continue
        f, thr, score = split
        mask = X[idx, f] <= thr
        importance[f] += score - (c.astype(np.float64) ** 2).sum() / len(idx)
        l_idx, r_idx = idx[mask], idx[~mask]
        feature[node], threshold[node] = f, thr
        left[node] = new_node(l_idx)
        right[node] = new_node(r_idx)
        stack.append((right[node], r_idx))
        stack.append((left[node], l_idx))
    return Tree(feature, threshold, left, right, counts), importance


def _fit_one(X, y, n_classes, max_features, seed_seq):
    rng = np.random.default_rng(seed_seq)
    sample = rng.integers(0, len(y), size=len(y))
    return build_tree(X, y, n_classes, max_features, rng, sample)


def train_rforest(matrix: Matrix, labels, n_trees=100, seed=0, classes=None, n_jobs=1, bootstrap=True) -> TrainedModel:
    if n_trees < 1:
        raise TrainingError("n_trees must be >= 1")
    check_training_input(matrix, labels)
    classes, y = encode_labels(labels, classes)
    X = matrix.values
    d = X.shape[1]
    max_features = max(1, math.isqrt(d))
    seed = 0 if seed is None else int(seed)
    children = np.random.SeedSequence(seed & 0xFFFFFFFFFFFFFFFF).spawn(n_trees)

    def fit(ss):
        if bootstrap:
            return _fit_one(X, y, len(classes), max_features, ss)
        return build_tree(X, y, len(classes), max_features, np.random.default_rng(ss))

    if n_jobs and n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            fitted = list(pool.map(fit, children))
    else:
        fitted = [fit(ss) for ss in children]
    trees = [t for t, _ in fitted]
    imps = []
    for _, imp in fitted:
        total = imp.sum()
        imps.append(imp / total if total > 0 else imp)
    params = {
        "n_trees": n_trees,
        "max_features": max_features,
        "trees": trees,
        "feature_importances": np.mean(imps, axis=0).tolist() if d else [],
    }
    return TrainedModel("rforest", classes, params, list(matrix.feature_names), seed)


def predict_proba(model: TrainedModel, X: np.ndarray) -> np.ndarray:
    trees = model.parameters["trees"]
    acc = np.zeros((X.shape[0], len(model.classes)))
    for t in trees:
        acc += t.predict_proba(X)
    return acc / len(trees)


def tree_model(model: TrainedModel, i: int) -> TrainedModel:
    """Single-tree view of forest member ``i``."""
    params = dict(model.parameters, trees=[model.parameters["trees"][i]], n_trees=1)
    return TrainedModel("rforest", model.classes, params, model.feature_names, model.seed)


# --- nested JSON form --------------------------------------------------------


def _tree_to_nested(t: Tree) -> dict:
    records = []
    for i in range(t.n_nodes):
        rec = {"counts": t.counts[i].tolist()}
        if t.feature[i] != LEAF:
            rec["feature"] = int(t.feature[i])
            rec["threshold"] = float(t.threshold[i])
        records.append(rec)
    for i in range(t.n_nodes):
        if t.feature[i] != LEAF:
            records[i]["children"] = [records[t.left[i]], records[t.right[i]]]
    return records[0]


def _tree_from_nested(root: dict) -> Tree:
    feature, threshold, left, right, counts = [], [], [], [], []

    def add(rec):
        feature.append(int(rec["feature"]) if "children" in rec else LEAF)
        threshold.append(float(rec.get("threshold", 0.0)))
        left.append(LEAF)
        right.append(LEAF)
        counts.append([int(c) for c in rec["counts"]])
        return len(feature) - 1

    stack = [(root, add(root))]
    while stack:
        rec, i = stack.pop()
        if "children" in rec:
            lrec, rrec = rec["children"]
            left[i] = add(lrec)
            right[i] = add(rrec)
            stack.append((rrec, right[i]))
            stack.append((lrec, left[i]))
    return Tree(feature, threshold, left, right, counts)


def to_nested(params: dict) -> dict:
    out = {k: v for k, v in params.items() if k != "trees"}
    out["trees"] = [_tree_to_nested(t) for t in params["trees"]]
    return out


def from_nested(params: dict) -> dict:
    out = {k: v for k, v in params.items() if k != "trees"}
    try:
        out["trees"] = [_tree_from_nested(t) for t in params["trees"]]
    except (KeyError, ValueError, TypeError) as exc:
        raise DataError(f"bad tree record: {exc}") from None
    return out

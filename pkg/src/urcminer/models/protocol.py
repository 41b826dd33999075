"""Seed-median model selection and stratified resampling."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from urcminer.matrix import Matrix
from urcminer.models.base import TrainedModel, predict_labels

TrainFn = Callable[[Matrix, Sequence[str], int], TrainedModel]


def accuracy(model: TrainedModel, matrix: Matrix, labels) -> float:
    pred = predict_labels(model, matrix)
    return float(np.mean([p == t for p, t in zip(pred, labels)]))


def median_protocol(train_fn: TrainFn, train_data, validation_data, k=101, base_seed=0) -> TrainedModel:
    """Train with seeds base_seed..base_seed+k-1 and keep the median-accuracy model.

    For even ``k`` the lower middle accuracy is used; ties go to the lowest seed.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    val_matrix, val_labels = validation_data
    if len(val_matrix) == 0:
        raise ValueError("validation set is empty")
    X, y = train_data
    models, accs = [], []
    for i in range(k):
        m = train_fn(X, y, base_seed + i)
        models.append(m)
        accs.append(accuracy(m, val_matrix, val_labels))
    target = sorted(accs)[(k - 1) // 2]
    pick = next(i for i, a in enumerate(accs) if a == target)
    chosen = models[pick]
    chosen.info["protocol"] = {
        "k": k,
        "base_seed": base_seed,
        "accuracies": accs,
        "median_accuracy": target,
        "chosen_seed": base_seed + pick,
    }
    return chosen


def _rng(seed):
    return np.random.default_rng(int(seed) & 0xFFFFFFFFFFFFFFFF)


def stratified_folds(labels, n_folds=10, seed=0) -> np.ndarray:
    """Fold index per row; each class is shuffled then dealt round-robin."""
    labels = np.asarray([str(y) for y in labels])
    fold = np.empty(len(labels), dtype=np.int64)
    rng = _rng(seed)
    offset = 0
    for cls in sorted(set(labels.tolist())):
        idx = np.flatnonzero(labels == cls)
        idx = idx[rng.permutation(len(idx))]
        fold[idx] = (np.arange(len(idx)) + offset) % n_folds
        offset += len(idx)
    return fold


def stratified_split(labels, test_fraction=0.1, seed=0) -> tuple[np.ndarray, np.ndarray]:
    """(train_idx, test_idx), both sorted, with each class split in proportion."""
    labels = np.asarray([str(y) for y in labels])
    rng = _rng(seed)
    test = []
    for cls in sorted(set(labels.tolist())):
        idx = np.flatnonzero(labels == cls)
        n_test = int(round(len(idx) * test_fraction))
        if len(idx) > 1:
            n_test = min(max(n_test, 1), len(idx) - 1)
        test.extend(idx[rng.permutation(len(idx))[:n_test]].tolist())
    test = np.array(sorted(test), dtype=np.int64)
    train = np.setdiff1d(np.arange(len(labels)), test)
    return train, test


def cross_validate(train_fn: TrainFn, matrix: Matrix, labels, n_folds=10, seed=0, positive=None):
    """Per-fold EvalReports of ``train_fn(train_matrix, train_labels, seed)``."""
    from urcminer.metrics import classification_report
    from urcminer.models.base import predict_proba

    labels = [str(y) for y in labels]
    folds = stratified_folds(labels, n_folds, seed)
    reports = []
    for f in range(n_folds):
        test_idx = np.flatnonzero(folds == f)
        train_idx = np.flatnonzero(folds != f)
        model = train_fn(matrix.take(train_idx), [labels[i] for i in train_idx], seed)
        test_m = matrix.take(test_idx)
        proba = predict_proba(model, test_m)
        pred = [model.classes[int(k)] for k in np.argmax(proba, axis=1)]
        truth = [labels[i] for i in test_idx]
        reports.append(classification_report(truth, pred, classes=model.classes, probabilities=proba, positive=positive))
    return reports

"""L2-regularised logistic regression by full-batch gradient descent with backtracking."""

from __future__ import annotations

import numpy as np

from urcminer.matrix import Matrix
from urcminer.models.base import TrainedModel, check_training_input, encode_labels

ARMIJO_C = 1e-4
MIN_STEP = 1e-16


def sigmoid(z):
    return np.exp(-np.logaddexp(0.0, -z))


def loss_and_grad(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray, l2_lambda: float):
    """Mean negative log-likelihood plus lambda/(2n) * ||w||^2, and its gradient.

    ``y`` holds 0/1 targets. The bias is not penalised.
    """
    n = X.shape[0]
    z = X @ w + b
    loss = np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2_lambda / n * (w @ w)
    r = sigmoid(z) - y
    gw = X.T @ r / n + l2_lambda / n * w
    gb = np.mean(r)
    return float(loss), gw, float(gb)


def fit_binary(X, y, l2_lambda=1.0, max_iter=1000, tol=1e-6):
    w = np.zeros(X.shape[1])
    b = 0.0
    loss, gw, gb = loss_and_grad(w, b, X, y, l2_lambda)
    history = [loss]
    step = 1.0
    for _ in range(max_iter):
        gnorm2 = gw @ gw + gb * gb
        if max(np.max(np.abs(gw), initial=0.0), abs(gb)) < tol:
            break
        step = min(step * 2.0, 1e4)
        while True:
            w_new, b_new = w - step * gw, b - step * gb
            new_loss, ngw, ngb = loss_and_grad(w_new, b_new, X, y, l2_lambda)
            if new_loss <= loss - ARMIJO_C * step * gnorm2 or step < MIN_STEP:
                break
            step *= 0.5
        if new_loss > loss:
            break
        w, b, loss, gw, gb = w_new, b_new, new_loss, ngw, ngb
        history.append(loss)
    return w, b, history


def standardization(X):
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    flat = scale == 0
    mean[flat] = 0.0
    scale[flat] = 1.0
    return mean, scale


def train_logreg(matrix: Matrix, labels, l2_lambda=1.0, max_iter=1000, tol=1e-6, classes=None) -> TrainedModel:
    check_training_input(matrix, labels)
    classes, codes = encode_labels(labels, classes)
    mean, scale = standardization(matrix.values)
    Z = (matrix.values - mean) / scale
    targets = [1] if len(classes) == 2 else range(len(classes))
    weights, biases, histories = [], [], []
    for k in targets:
        w, b, hist = fit_binary(Z, (codes == k).astype(np.float64), l2_lambda, max_iter, tol)
        weights.append(w.tolist())
        biases.append(b)
        histories.append(hist)
    params = {
        "mean": mean.tolist(),
        "scale": scale.tolist(),
        "weights": weights,
        "bias": biases,
        "l2_lambda": l2_lambda,
        "max_iter": max_iter,
        "tol": tol,
    }
    model = TrainedModel("logreg", classes, params, list(matrix.feature_names))
    model.info["loss_history"] = histories
    return model


def predict_proba(model: TrainedModel, X: np.ndarray) -> np.ndarray:
    p = model.parameters
    Z = (X - np.asarray(p["mean"])) / np.asarray(p["scale"])
    W = np.asarray(p["weights"], dtype=np.float64)
    scores = sigmoid(Z @ W.T + np.asarray(p["bias"]))
    if len(model.classes) == 2:
        return np.column_stack([1.0 - scores[:, 0], scores[:, 0]])
    total = scores.sum(axis=1, keepdims=True)
    out = np.full_like(scores, 1.0 / scores.shape[1])
    np.divide(scores, total, out=out, where=total > 0)
    return out

from __future__ import annotations

import numpy as np

from urcminer.matrix import Matrix
from urcminer.models.base import TrainedModel, check_training_input, encode_labels


def train_gnb(matrix: Matrix, labels, var_smoothing=1e-9, classes=None) -> TrainedModel:
    """Gaussian naive Bayes.

    Per-class variances are floored at ``var_smoothing`` times the largest
    feature variance (or ``var_smoothing`` itself when every column is constant).
    """
    check_training_input(matrix, labels)
    classes, codes = encode_labels(labels, classes)
    X = matrix.values
    floor = var_smoothing * float(np.max(X.var(axis=0), initial=0.0))
    if floor <= 0.0:
        floor = var_smoothing
    d = X.shape[1]
    means, variances, priors = [], [], []
    for k in range(len(classes)):
        Xk = X[codes == k]
        if len(Xk):
            means.append(Xk.mean(axis=0).tolist())
            variances.append(np.maximum(Xk.var(axis=0), floor).tolist())
        else:
            means.append([0.0] * d)
            variances.append([1.0] * d)
        priors.append(len(Xk) / len(X))
    params = {"means": means, "variances": variances, "priors": priors, "var_smoothing": var_smoothing}
    return TrainedModel("gnb", classes, params, list(matrix.feature_names))


def joint_log_likelihood(model: TrainedModel, X: np.ndarray) -> np.ndarray:
    p = model.parameters
    mu = np.asarray(p["means"])
    var = np.asarray(p["variances"])
    with np.errstate(divide="ignore"):
        log_prior = np.log(np.asarray(p["priors"]))
    out = np.empty((X.shape[0], len(model.classes)))
    for k in range(len(model.classes)):
        ll = -0.5 * np.log(2.0 * np.pi * var[k]) - (X - mu[k]) ** 2 / (2.0 * var[k])
        out[:, k] = log_prior[k] + ll.sum(axis=1)
    return out


def predict_proba(model: TrainedModel, X: np.ndarray) -> np.ndarray:
    jll = joint_log_likelihood(model, X)
    top = jll.max(axis=1, keepdims=True)
    e = np.exp(jll - top)
    return e / e.sum(axis=1, keepdims=True)

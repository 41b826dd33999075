from urcminer.models.base import (
    Prediction,
    TrainedModel,
    as_matrix,
    from_json as from_json_model,
    load,
    predict,
    predict_labels,
    predict_proba,
    save,
    to_json as model_to_json,
)
from urcminer.models.forest import train_rforest
from urcminer.models.gnb import train_gnb
from urcminer.models.logreg import train_logreg
from urcminer.models.protocol import cross_validate, median_protocol, stratified_folds, stratified_split

TRAINERS = {"logreg": train_logreg, "gnb": train_gnb, "rforest": train_rforest}
ALIASES = {"rf": "rforest", "lr": "logreg", "nb": "gnb"}


def trainer(kind: str, classes=None, n_jobs=1, **hyper):
    """A ``(matrix, labels, seed) -> TrainedModel`` closure for ``kind``."""
    kind = ALIASES.get(kind, kind)
    if kind == "rforest":
        n_trees = hyper.get("n_trees", 100)
        return lambda X, y, seed: train_rforest(X, y, n_trees=n_trees, seed=seed, classes=classes, n_jobs=n_jobs)
    if kind == "logreg":
        args = {k: hyper[k] for k in ("l2_lambda", "max_iter", "tol") if k in hyper}
        return lambda X, y, seed: train_logreg(X, y, classes=classes, **args)
    if kind == "gnb":
        vs = hyper.get("var_smoothing", 1e-9)
        return lambda X, y, seed: train_gnb(X, y, var_smoothing=vs, classes=classes)
    raise ValueError(f"unknown model kind {kind!r}")


__all__ = [
    "Prediction",
    "TrainedModel",
    "TRAINERS",
    "as_matrix",
    "from_json_model",
    "model_to_json",
    "cross_validate",
    "load",
    "median_protocol",
    "predict",
    "predict_labels",
    "predict_proba",
    "save",
    "stratified_folds",
    "stratified_split",
    "train_gnb",
    "train_logreg",
    "train_rforest",
    "trainer",
]

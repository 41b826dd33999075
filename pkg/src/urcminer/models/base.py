from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from urcminer.errors import DataError, SchemaError, TrainingError
from urcminer.matrix import Matrix

FORMAT_VERSION = 1
KINDS = ("logreg", "gnb", "rforest")


@dataclass
class TrainedModel:
    kind: str
    classes: list[str]
    parameters: dict
    feature_names: list[str]
    seed: int | None = None
    # training diagnostics; not persisted
    info: dict = field(default_factory=dict, repr=False, compare=False)


@dataclass(frozen=True)
class Prediction:
    comment_id: int
    class_probabilities: dict[str, float]
    predicted_class: str


def as_matrix(values, feature_names=None, row_ids=None) -> Matrix:
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 1:
        values = values.reshape(-1, 1)
    n, d = values.shape
    names = list(feature_names) if feature_names is not None else [f"x{j}" for j in range(d)]
    ids = list(row_ids) if row_ids is not None else list(range(n))
    return Matrix(ids, names, values)


def encode_labels(labels: Sequence[str], classes=None) -> tuple[list[str], np.ndarray]:
    labels = [str(y) for y in labels]
    present = sorted(set(labels))
    classes = list(classes) if classes is not None else present
    if len(present) < 2:
        raise TrainingError(f"need at least two classes to train, got {present}")
    pos = {c: i for i, c in enumerate(classes)}
    unknown = [y for y in present if y not in pos]
    if unknown:
        raise TrainingError(f"label {unknown[0]!r} is not one of the classes {classes}")
    return classes, np.array([pos[y] for y in labels], dtype=np.int64)


def check_training_input(matrix: Matrix, labels) -> None:
    if len(matrix) == 0:
        raise TrainingError("empty training matrix")
    if len(labels) != len(matrix):
        raise TrainingError(f"{len(labels)} labels for {len(matrix)} rows")
    if not np.all(np.isfinite(matrix.values)):
        raise TrainingError("training matrix contains NaN or infinite values")


def check_schema(model: TrainedModel, matrix: Matrix) -> None:
    got, want = matrix.feature_names, model.feature_names
    for i, (a, b) in enumerate(zip(got, want)):
        if a != b:
            raise SchemaError(f"column {i} is {a!r}, model expects {b!r}")
    if len(got) != len(want):
        i = min(len(got), len(want))
        name = want[i] if len(want) > len(got) else got[i]
        raise SchemaError(f"column count {len(got)} != {len(want)}; first differing column {name!r}")


def predict_proba(model: TrainedModel, matrix: Matrix) -> np.ndarray:
    check_schema(model, matrix)
    if len(matrix) == 0:
        return np.zeros((0, len(model.classes)))
    from urcminer.models import forest, gnb, logreg

    impl = {"logreg": logreg, "gnb": gnb, "rforest": forest}[model.kind]
    return impl.predict_proba(model, matrix.values)


def predict(model: TrainedModel, matrix: Matrix) -> list[Prediction]:
    proba = predict_proba(model, matrix)
    out = []
    for rid, p in zip(matrix.row_ids, proba):
        k = int(np.argmax(p))
        out.append(Prediction(rid, {c: float(v) for c, v in zip(model.classes, p)}, model.classes[k]))
    return out


def predict_labels(model: TrainedModel, matrix: Matrix) -> list[str]:
    proba = predict_proba(model, matrix)
    return [model.classes[int(k)] for k in np.argmax(proba, axis=1)]


def to_json(model: TrainedModel) -> str:
    from urcminer.models import forest

    params = model.parameters
    if model.kind == "rforest":
        params = forest.to_nested(params)
    doc = {
        "kind": model.kind,
        "version": FORMAT_VERSION,
        "classes": model.classes,
        "feature_names": model.feature_names,
        "seed": model.seed,
        "parameters": params,
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def from_json(text: str) -> TrainedModel:
    from urcminer.models import forest

    try:
        doc = json.loads(text)
        kind = doc["kind"]
        if kind not in KINDS:
            raise ValueError(f"unknown model kind {kind!r}")
        if doc.get("version") != FORMAT_VERSION:
            raise ValueError(f"unsupported model version {doc.get('version')!r}")
        params = doc["parameters"]
        if kind == "rforest":
            params = forest.from_nested(params)
        return TrainedModel(kind, list(doc["classes"]), params, list(doc["feature_names"]), doc.get("seed"))
    except (KeyError, ValueError, TypeError) as exc:
        raise DataError(f"bad model artifact: {exc}") from None


def save(model: TrainedModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(to_json(model))


def load(path) -> TrainedModel:
    with open(path, encoding="utf-8") as fh:
        return from_json(fh.read())

"""Glue between ingest, featurize, textvec and models used by the CLI and experiments."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from urcminer.errors import DataError
from urcminer.featurize import featurize
from urcminer.ingest import AnnotatedComment, AnswerThread, class_names
from urcminer.matrix import Matrix
from urcminer.metrics import classification_report
from urcminer.models import predict_proba, stratified_folds, stratified_split, trainer
from urcminer.textvec import fit_vocabulary, transform

INPUTS = ("features", "tfidf", "both")


def derive_seed(seed: int, purpose: int) -> int:
    """Independent 63-bit seed for sub-task ``purpose`` of one invocation seed."""
    ss = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=(purpose,))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


@dataclass
class Dataset:
    features: Matrix
    labels: list[str]
    texts: list[str]
    classes: tuple[str, ...]

    def take(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=int)
        return Dataset(self.features.take(idx), [self.labels[i] for i in idx],
                       [self.texts[i] for i in idx], self.classes)


def build_dataset(threads: Sequence[AnswerThread], annotations: Sequence[AnnotatedComment],
                  mode="deploy", scheme="binary", embeddings=None) -> Dataset:
    """Feature rows of the annotated comments, in annotation order, with labels and texts."""
    by_answer = {t.answer_id: t for t in threads}
    wanted = []
    for a in annotations:
        if a.answer_id not in by_answer:
            raise DataError(f"annotation for comment {a.comment_id} refers to answer {a.answer_id} not in the corpus")
        wanted.append(a.answer_id)
    used = [by_answer[aid] for aid in dict.fromkeys(wanted)]
    full = featurize(used, mode, embeddings)
    rows = full.select_rows([a.comment_id for a in annotations])
    text_of = {c.comment_id: c.text for t in used for c in t.comments}
    return Dataset(
        rows,
        [a.label(scheme) for a in annotations],
        [text_of[a.comment_id] for a in annotations],
        class_names(scheme),
    )


def input_matrices(train: Dataset, test: Dataset, kind: str, stopwords=None) -> tuple[Matrix, Matrix]:
    """Model inputs for a split; the TF-IDF vocabulary is fitted on the training texts only."""
    if kind not in INPUTS:
        raise ValueError(f"unknown input {kind!r}; expected one of {INPUTS}")
    if kind == "features":
        return train.features, test.features
    vocab = fit_vocabulary(train.texts, stopwords)
    tr = transform(train.texts, vocab, train.features.row_ids)
    te = transform(test.texts, vocab, test.features.row_ids)
    if kind == "tfidf":
        return tr, te
    return train.features.hstack(tr), test.features.hstack(te)


def cross_validate_dataset(data: Dataset, model_kind="rforest", input_kind="features", n_folds=10, seed=0,
                           n_jobs=1, stopwords=None, **hyper) -> dict:
    """Stratified k-fold CV; returns per-fold and mean accuracy/AUC."""
    folds = stratified_folds(data.labels, n_folds, derive_seed(seed, 1))
    fit = trainer(model_kind, classes=list(data.classes), n_jobs=n_jobs, **hyper)
    per_fold = []
    for f in range(n_folds):
        tr_idx, te_idx = np.flatnonzero(folds != f), np.flatnonzero(folds == f)
        train, test = data.take(tr_idx), data.take(te_idx)
        Xtr, Xte = input_matrices(train, test, input_kind, stopwords)
        model = fit(Xtr, train.labels, seed + f)
        proba = predict_proba(model, Xte)
        pred = [model.classes[int(k)] for k in np.argmax(proba, axis=1)]
        per_fold.append(classification_report(test.labels, pred, classes=model.classes, probabilities=proba))
    aucs = [r.auc for r in per_fold if r.auc is not None]
    return {
        "model": model_kind,
        "input": input_kind,
        "folds": n_folds,
        "seed": seed,
        "mean_accuracy": float(np.mean([r.accuracy for r in per_fold])),
        "mean_auc": float(np.mean(aucs)) if aucs else None,
        "per_fold": [r.to_dict() for r in per_fold],
    }


def holdout_split(data: Dataset, test_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    tr, te = stratified_split(data.labels, test_fraction, derive_seed(seed, 2))
    return data.take(tr), data.take(te)

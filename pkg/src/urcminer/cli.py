"""``urcminer`` command line.

Stages exchange JSON-lines corpora and CSV matrices; every written file
gets a ``<file>.manifest.json`` sidecar recording config, seeds and digests.
Exit codes: 0 ok, 1 data/validation error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from urcminer import __version__
from urcminer import empirics, plotting
from urcminer.errors import UrcError
from urcminer.featurize import MODES, featurize, load_embeddings
from urcminer.ingest import (
    class_names,
    load_annotations,
    parse_dump,
    read_threads,
    sample_answers,
    select_answers,
)
from urcminer.manifest import pipeline_manifest, verify_manifest, write_atomic, write_manifest
from urcminer.matrix import Matrix, labels_for, read_labels
from urcminer.metrics import classification_report
from urcminer.models import (
    ALIASES,
    TRAINERS,
    from_json_model,
    median_protocol,
    model_to_json,
    predict,
    predict_proba,
    trainer,
)
from urcminer.pipeline import INPUTS, Dataset, build_dataset, cross_validate_dataset, holdout_split
from urcminer.textvec import Vocabulary, fit_vocabulary, load_stopwords, transform

log = logging.getLogger("urcminer")

SCHEMES = {"2": "binary", "3": "three_class", "binary": "binary", "three_class": "three_class"}


def _config(args) -> dict:
    return {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(vars(args).items()) if k != "func"}


def _emit(args, payload: dict, table: str | None = None) -> None:
    if getattr(args, "table", False) and table is not None:
        print(table)
    else:
        print(json.dumps(payload, indent=2, sort_keys=True, default=str))


def _many(name, paths) -> dict:
    return {f"{name}_{i}": p for i, p in enumerate(paths or [])}


def _finish(args, outputs: dict, inputs: dict, seeds=None) -> None:
    record = pipeline_manifest(_config(args), inputs, outputs, seeds)
    for out in outputs.values():
        if out:
            write_manifest(record, out)


def _scheme(args) -> str:
    return SCHEMES[args.classes]


def _load_features(paths) -> Matrix:
    matrices = [Matrix.from_csv(p) for p in paths]
    m = matrices[0]
    for other in matrices[1:]:
        m = m.hstack(other)
    return m


def _dataset(args) -> Dataset:
    """Labelled data from either --features/--labels or --corpus/--annotations."""
    scheme = _scheme(args)
    if args.features:
        if not args.labels:
            raise UrcError("--features needs --labels")
        m = _load_features(args.features)
        if args.mode and m.mode and m.mode != args.mode:
            raise UrcError(f"feature file was built in {m.mode} mode but --mode {args.mode} was requested")
        labels = labels_for(m, read_labels(args.labels))
        classes = class_names(scheme)
        bad = sorted(set(labels) - set(classes))
        if bad:
            raise UrcError(f"label {bad[0]!r} does not fit class scheme {scheme} {classes}")
        return Dataset(m, labels, [""] * len(labels), classes)
    if not (args.corpus and args.annotations):
        raise UrcError("give either --features/--labels or --corpus/--annotations")
    threads = read_threads(args.corpus)
    annotations = load_annotations(args.annotations, threads)
    emb = load_embeddings(args.embeddings) if getattr(args, "embeddings", None) else None
    return build_dataset(threads, annotations, args.mode or "deploy", scheme, emb)


def _hyper(args) -> dict:
    out = {}
    for key in ("n_trees", "l2_lambda", "max_iter", "tol", "var_smoothing"):
        v = getattr(args, key, None)
        if v is not None:
            out[key] = v
    return out


# --- subcommands -------------------------------------------------------------


def _threads_text(threads) -> str:
    return "".join(json.dumps(t.to_dict(), ensure_ascii=False, sort_keys=True) + "\n" for t in threads)


def cmd_ingest(args):
    corpus = parse_dump(args.posts, args.comments, args.users, args.history)
    threads = select_answers(corpus, args.tag, args.cutoff)
    write_atomic(args.out, _threads_text(threads))
    _finish(args, {"corpus": args.out},
            {"posts": args.posts, "comments": args.comments, "users": args.users, "history": args.history})
    _emit(args, {"counts": corpus.counts(), "skipped": dict(corpus.summary), "selected_answers": len(threads)})


def cmd_sample(args):
    threads = read_threads(args.corpus)
    picked = sample_answers(threads, args.n, args.seed)
    write_atomic(args.out, _threads_text(picked))
    _finish(args, {"sample": args.out}, {"corpus": args.corpus}, {"seed": args.seed})
    _emit(args, {"pool": len(threads), "sampled": len(picked), "answer_ids": [t.answer_id for t in picked]})


def cmd_featurize(args):
    threads = read_threads(args.corpus)
    emb = load_embeddings(args.embeddings) if args.embeddings else None
    outputs = {"features": args.out}
    if args.annotations:
        annotations = load_annotations(args.annotations, threads)
        data = build_dataset(threads, annotations, args.mode, _scheme(args), emb)
        m = data.features
        if args.labels_out:
            lines = ["comment_id,label"] + [f"{r},{y}" for r, y in zip(m.row_ids, data.labels)]
            write_atomic(args.labels_out, "\n".join(lines) + "\n")
            outputs["labels"] = args.labels_out
    else:
        m = featurize(threads, args.mode, emb)
    write_atomic(args.out, m.to_csv_text())
    _finish(args, outputs, {"corpus": args.corpus, "annotations": args.annotations, "embeddings": args.embeddings})
    _emit(args, {"rows": len(m), "columns": m.feature_names, "mode": m.mode, "embeddings": m.meta.get("embeddings")})


def cmd_vectorize(args):
    threads = read_threads(args.corpus)
    if args.annotations:
        anns = load_annotations(args.annotations, threads)
        text_of = {c.comment_id: c.text for t in threads for c in t.comments}
        ids = [a.comment_id for a in anns]
        texts = [text_of[i] for i in ids]
    else:
        ids = [c.comment_id for t in threads for c in t.comments]
        texts = [c.text for t in threads for c in t.comments]
    if args.vocab:
        with open(args.vocab, encoding="utf-8") as fh:
            vocab = Vocabulary.from_json(fh.read())
    else:
        vocab = fit_vocabulary(texts, load_stopwords(args.stopwords))
    m = transform(texts, vocab, ids)
    write_atomic(args.out, m.to_csv_text())
    outputs = {"tfidf": args.out}
    if args.vocab_out:
        write_atomic(args.vocab_out, vocab.to_json() + "\n")
        outputs["vocabulary"] = args.vocab_out
    _finish(args, outputs, {"corpus": args.corpus, "annotations": args.annotations, "vocab": args.vocab})
    _emit(args, {"rows": len(m), "terms": len(vocab), "documents": vocab.n_documents})


def cmd_train(args):
    data = _dataset(args)
    kind = ALIASES.get(args.model, args.model)
    k = args.k if args.k is not None else (101 if kind == "rforest" else 1)
    train, val = holdout_split(data, args.validation_fraction, args.seed)
    fit = trainer(kind, classes=list(data.classes), n_jobs=args.jobs, **_hyper(args))
    model = median_protocol(fit, (train.features, train.labels), (val.features, val.labels), k, args.seed)
    proto = model.info["protocol"]
    write_atomic(args.out, model_to_json(model))
    _finish(args, {"model": args.out},
            {**_many("features", args.features), "labels": args.labels,
             "corpus": args.corpus, "annotations": args.annotations},
            {"seed": args.seed, "chosen_seed": proto["chosen_seed"]})
    payload = {
        "model": kind,
        "classes": model.classes,
        "n_train": len(train.labels),
        "n_validation": len(val.labels),
        "k": k,
        "chosen_seed": proto["chosen_seed"],
        "validation_accuracy": proto["median_accuracy"],
    }
    _emit(args, payload, f"validation accuracy: {100 * proto['median_accuracy']:.1f}% (seed {proto['chosen_seed']})")


def cmd_eval(args):
    with open(args.model, encoding="utf-8") as fh:
        model = from_json_model(fh.read())
    m = _load_features(args.features)
    labels = labels_for(m, read_labels(args.labels))
    proba = predict_proba(model, m)
    pred = [model.classes[int(i)] for i in np.argmax(proba, axis=1)]
    report = classification_report(labels, pred, classes=model.classes, probabilities=proba)
    outputs = {}
    if args.out:
        write_atomic(args.out, report.to_json() + "\n")
        outputs["report"] = args.out
    if args.figures:
        fig_dir = Path(args.figures)
        outputs["confusion_png"] = plotting.confusion_figure(report, fig_dir / "confusion.png")
        if len(model.classes) == 2 and report.auc is not None:
            truth = np.asarray(labels) == model.classes[1]
            outputs["roc_png"] = plotting.roc_figure(truth, proba[:, 1], fig_dir / "roc.png", report.auc)
        if model.kind == "rforest":
            outputs["importance_png"] = plotting.importance_figure(
                model.feature_names, model.parameters["feature_importances"], fig_dir / "importance.png")
    if outputs:
        _finish(args, outputs, {"model": args.model, **_many("features", args.features), "labels": args.labels})
    _emit(args, report.to_dict(), report.to_table())


def cmd_predict(args):
    with open(args.model, encoding="utf-8") as fh:
        model = from_json_model(fh.read())
    m = _load_features(args.features)
    preds = predict(model, m)
    text = "".join(json.dumps({"comment_id": p.comment_id, "class_probabilities": p.class_probabilities,
                               "predicted_class": p.predicted_class}, sort_keys=True) + "\n" for p in preds)
    if args.out:
        write_atomic(args.out, text)
        _finish(args, {"predictions": args.out}, {"model": args.model, **_many("features", args.features)})
    else:
        sys.stdout.write(text)


def cmd_stats(args):
    threads = read_threads(args.corpus)
    annotations = load_annotations(args.annotations, threads)
    report = empirics.empirics_report(annotations, threads)
    outputs = {}
    if args.out:
        write_atomic(args.out, empirics.report_json(report) + "\n")
        outputs["stats"] = args.out
    if args.figures:
        d = Path(args.figures)
        outputs["latency_png"] = plotting.latency_figure(report["latency"], d / "latency.png")
        outputs["roles_png"] = plotting.role_matrix_figure(report["role_matrix"], d / "roles.png")
        outputs["scores_png"] = plotting.score_quantile_figure(report["score_quantiles"], d / "score_quantiles.png")
    if outputs:
        _finish(args, outputs, {"corpus": args.corpus, "annotations": args.annotations})
    _emit(args, json.loads(empirics.report_json(report)), empirics.render_tables(report))


def cmd_cv(args):
    data = _dataset(args)
    kind = ALIASES.get(args.model, args.model)
    if args.input != "features" and args.features:
        raise UrcError("--input tfidf/both needs --corpus/--annotations (vocabulary is fitted per fold)")
    stop = load_stopwords(args.stopwords) if args.input != "features" else None
    result = cross_validate_dataset(data, kind, args.input, args.folds, args.seed, args.jobs, stop, **_hyper(args))
    if args.out:
        write_atomic(args.out, json.dumps(result, indent=2, sort_keys=True) + "\n")
        _finish(args, {"cv": args.out}, {"corpus": args.corpus, "annotations": args.annotations,
                                         "labels": args.labels, **_many("features", args.features)}, {"seed": args.seed})
    summary = {k: v for k, v in result.items() if k != "per_fold"}
    table = (f"{kind} ({args.input}) {args.folds}-fold: accuracy {100 * result['mean_accuracy']:.1f}%"
             + (f", AUC {result['mean_auc']:.3f}" if result["mean_auc"] is not None else ""))
    _emit(args, summary, table)


def cmd_verify(args):
    with open(args.manifest, encoding="utf-8") as fh:
        record = json.load(fh)
    problems = verify_manifest(record)
    _emit(args, {"ok": not problems, "problems": problems})
    return 1 if problems else 0


# --- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="urcminer", description="Find and analyse update-request comments on Stack Overflow answers.")
    p.add_argument("--version", action="version", version=f"urcminer {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=func)
        sp.add_argument("--table", action="store_true", help="print a text table instead of JSON")
        sp.add_argument("--jobs", type=int, default=1, help="worker threads for forest training")
        return sp

    def data_args(sp):
        sp.add_argument("--features", action="append", help="feature CSV; repeat to concatenate columns")
        sp.add_argument("--labels", help="labels CSV (comment_id,label)")
        sp.add_argument("--corpus", help="threads JSON-lines")
        sp.add_argument("--annotations", help="annotation CSV")
        sp.add_argument("--embeddings", help="sentence-embedding sidecar (JSON-lines)")
        sp.add_argument("--mode", choices=MODES, default=None)
        sp.add_argument("--classes", choices=sorted(SCHEMES), default="2")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--n-trees", type=int, dest="n_trees")
        sp.add_argument("--l2-lambda", type=float, dest="l2_lambda")
        sp.add_argument("--max-iter", type=int, dest="max_iter")
        sp.add_argument("--tol", type=float)
        sp.add_argument("--var-smoothing", type=float, dest="var_smoothing")

    models = sorted(set(TRAINERS) | set(ALIASES))

    sp = add("ingest", cmd_ingest, "parse a dump and select answer threads")
    sp.add_argument("--posts", required=True)
    sp.add_argument("--comments", required=True)
    sp.add_argument("--users", required=True)
    sp.add_argument("--history", required=True)
    sp.add_argument("--tag", default="java")
    sp.add_argument("--cutoff", default="2017-01-01", help="UTC date, YYYY-MM-DD")
    sp.add_argument("--out", required=True)

    sp = add("sample", cmd_sample, "uniformly sample answer threads")
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--out", required=True)

    sp = add("featurize", cmd_featurize, "per-comment feature CSV")
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--mode", choices=MODES, default="full")
    sp.add_argument("--embeddings")
    sp.add_argument("--annotations")
    sp.add_argument("--classes", choices=sorted(SCHEMES), default="2")
    sp.add_argument("--labels-out", dest="labels_out")
    sp.add_argument("--out", required=True)

    sp = add("vectorize", cmd_vectorize, "TF-IDF matrix of comment texts")
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--annotations")
    sp.add_argument("--vocab", help="use this fitted vocabulary instead of fitting one")
    sp.add_argument("--vocab-out", dest="vocab_out")
    sp.add_argument("--stopwords", help="stop-word file (default: $URCMINER_STOPWORDS or bundled)")
    sp.add_argument("--out", required=True)

    sp = add("train", cmd_train, "train a classifier with the seed-median protocol")
    data_args(sp)
    sp.add_argument("--model", choices=models, required=True)
    sp.add_argument("--k", type=int, default=None, help="protocol runs (default 101 for rf, else 1)")
    sp.add_argument("--validation-fraction", type=float, default=0.1, dest="validation_fraction")
    sp.add_argument("--out", default="model.json")

    sp = add("eval", cmd_eval, "evaluate a model on labelled features")
    sp.add_argument("--model", required=True)
    sp.add_argument("--features", action="append", required=True)
    sp.add_argument("--labels", required=True)
    sp.add_argument("--out")
    sp.add_argument("--figures", help="directory for PNG figures")

    sp = add("predict", cmd_predict, "class probabilities per comment")
    sp.add_argument("--model", required=True)
    sp.add_argument("--features", action="append", required=True)
    sp.add_argument("--out")

    sp = add("stats", cmd_stats, "prevalence, latency, roles and score quantiles")
    sp.add_argument("--annotations", required=True)
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--out")
    sp.add_argument("--figures", help="directory for PNG figures")

    sp = add("cv", cmd_cv, "stratified k-fold cross-validation")
    data_args(sp)
    sp.add_argument("--model", choices=models, default="rforest")
    sp.add_argument("--input", choices=INPUTS, default="features")
    sp.add_argument("--folds", type=int, default=10)
    sp.add_argument("--stopwords")
    sp.add_argument("--out")

    sp = add("verify", cmd_verify, "check a manifest against the files it names")
    sp.add_argument("--manifest", required=True)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        rc = args.func(args)
    except (UrcError, ValueError, OSError) as exc:
        print(f"urcminer: error: {exc}", file=sys.stderr)
        return 1
    return rc or 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

"""Command-line workflows: synth, preprocess, train, grid, eval, predict, serve.

Exit codes: 0 success, 1 usage error, 2 data/validation error, 3 internal
error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, artext, classical, corpus, evaluation, features, neural, service
from .artifact import (
    EmbeddingRef,
    MeanEmbeddingFeaturizer,
    ModelArtifact,
    SequenceFeaturizer,
    TfidfFeaturizer,
    hash_file,
    save_artifact,
)
from .errors import AljpError, DataError

__all__ = ["main", "build_parser", "train_artifact"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="aljp", description=__doc__)
    parser.add_argument("--version", action="version", version=f"aljp {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate a synthetic case corpus")
    p_synth.add_argument("--case-type", choices=corpus.CASE_TYPES, default="custody")
    p_synth.add_argument("--per-class", type=int, default=25)
    p_synth.add_argument("--seed", type=int, default=42)
    p_synth.add_argument("--out", required=True, help="output JSONL path")
    p_synth.add_argument("--embeddings-out", help="also write a synthetic word-vector file")
    p_synth.add_argument("--embed-dim", type=int, default=32)

    p_pre = sub.add_parser("preprocess", help="tokenize a case file")
    p_pre.add_argument("--data", required=True)
    p_pre.add_argument("--out", required=True)
    p_pre.add_argument("--config", help="preprocessing config JSON")

    p_train = sub.add_parser("train", help="train one model and save an artifact")
    p_train.add_argument("--data", required=True)
    p_train.add_argument("--task", choices=corpus.TASKS, default="judgment")
    p_train.add_argument("--family", choices=("svm", "logreg", "lstm", "bilstm"), required=True)
    p_train.add_argument("--representation", choices=("tfidf", "word2vec"), default="tfidf")
    p_train.add_argument("--embeddings", help="word-vector file (required for word2vec)")
    p_train.add_argument("--seed", type=int, default=42)
    p_train.add_argument("--config", help="hyperparameter overrides JSON")
    p_train.add_argument("--out", required=True, help="artifact path")

    p_grid = sub.add_parser("grid", help="grid-search SVM hyperparameters")
    p_grid.add_argument("--data", required=True)
    p_grid.add_argument("--task", choices=corpus.TASKS, default="judgment")
    p_grid.add_argument("--representation", choices=("tfidf", "word2vec"), default="tfidf")
    p_grid.add_argument("--embeddings")
    p_grid.add_argument("--seed", type=int, default=42)
    p_grid.add_argument("--out", help="write scores JSON here")

    p_eval = sub.add_parser("eval", help="run the model x representation experiment table")
    p_eval.add_argument("--data", required=True)
    p_eval.add_argument("--task", choices=corpus.TASKS, default="judgment")
    p_eval.add_argument("--rows", help="comma-separated row names, e.g. SVM-TFIDF,LR-TFIDF")
    p_eval.add_argument("--embeddings")
    p_eval.add_argument("--seed", type=int, default=42)
    p_eval.add_argument("--config", help="experiment overrides JSON")
    p_eval.add_argument("--out", help="report JSON path")

    p_pred = sub.add_parser("predict", help="predict one case with a saved artifact")
    p_pred.add_argument("--model", required=True)
    p_pred.add_argument("--evidence-model")
    p_pred.add_argument("--claim", default="")
    p_pred.add_argument("--answer", default="")
    p_pred.add_argument("--pleading", default="")
    p_pred.add_argument("--embeddings")

    p_serve = sub.add_parser("serve", help="serve predictions over HTTP")
    p_serve.add_argument("--addr", default="127.0.0.1:8356")
    p_serve.add_argument("--artifact", action="append", required=True)
    p_serve.add_argument("--embeddings")
    return parser


def _parse_rows(spec: str):
    name_to_pair = {
        evaluation.row_name(f, r): (f, r) for f, r in evaluation.ALL_ROWS
    }
    rows = []
    for name in spec.split(","):
        name = name.strip()
        if name not in name_to_pair:
            raise DataError(f"unknown row name {name!r}")
        rows.append(name_to_pair[name])
    return tuple(rows)


def _load_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def cmd_synth(args) -> int:
    spec = corpus.default_synth_spec(args.case_type, per_class=args.per_class)
    caseset = corpus.generate_synthetic(spec, seed=args.seed)
    corpus.save_cases(caseset, args.out)
    print(f"wrote {len(caseset)} cases to {args.out}")
    if args.embeddings_out:
        store = corpus.synthetic_embeddings(spec, dim=args.embed_dim, seed=args.seed)
        features.save_embeddings(store, args.embeddings_out)
        print(f"wrote {len(store)} word vectors to {args.embeddings_out}")
    return 0


def cmd_preprocess(args) -> int:
    config = artext.PreprocessConfig.from_file(args.config) if args.config else artext.default_config()
    caseset = corpus.load_cases(args.data)
    with open(args.out, "w", encoding="utf-8") as handle:
        for case in caseset.cases:
            record = {
                "id": case.id,
                "claim_tokens": artext.preprocess(case.claim_text, config),
                "answer_tokens": artext.preprocess(case.answer_text, config),
                "pleading_tokens": artext.preprocess(case.pleading_text, config),
            }
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")
    print(f"wrote tokens for {len(caseset)} cases to {args.out}")
    return 0


def train_artifact(
    caseset: corpus.CaseSet,
    task: str,
    family: str,
    representation: str,
    seed: int,
    embeddings_path=None,
    overrides: dict | None = None,
    preprocess_config: artext.PreprocessConfig | None = None,
) -> ModelArtifact:
    """Train one pipeline on the full case set and wrap it as an artifact."""
    overrides = overrides or {}
    pre = preprocess_config or artext.default_config()
    catalog = caseset.catalog(task)
    docs = [
        artext.preprocess(evaluation.task_text(c, task), pre) for c in caseset.cases
    ]
    y = np.asarray(caseset.labels(task), dtype=np.int64)
    min_df = int(overrides.get("min_df", 1))

    store = None
    if representation == "word2vec":
        if not embeddings_path:
            raise DataError("representation word2vec requires an embeddings file")
        store = features.load_embeddings(embeddings_path)

    if family in ("svm", "logreg"):
        if representation == "tfidf":
            vectorizer = features.tfidf_fit(docs, min_df=min_df)
            featurizer = TfidfFeaturizer(vectorizer=vectorizer)
        else:
            featurizer = MeanEmbeddingFeaturizer(
                ref=EmbeddingRef(
                    path=str(embeddings_path),
                    sha256=hash_file(embeddings_path),
                    dim=store.dim,
                ),
                store=store,
            )
        X = np.stack([featurizer.featurize(d) for d in docs])
        if family == "svm":
            kernel_raw = overrides.get("kernel", {"kind": "rbf", "c": 10.0, "gamma": 0.1})
            kernel = classical.KernelSpec(
                kind=kernel_raw["kind"],
                c=kernel_raw["c"],
                gamma=kernel_raw.get("gamma"),
            )
            model = classical.ovr_train(X, y, "svm", kernel=kernel, seed=seed)
        else:
            lr_raw = overrides.get("logreg", {})
            config = classical.LogRegConfig(
                lr=lr_raw.get("lr", 0.5),
                epochs=lr_raw.get("epochs", 200),
                batch_size=lr_raw.get("batch_size", 16),
                l2=lr_raw.get("l2", 1e-4),
                seed=seed,
            )
            model = classical.train_logreg(X, y, config)
    elif family in ("lstm", "bilstm"):
        vocab = features.fit_vocab(docs, min_df=min_df)
        maxlen = int(overrides.get("maxlen", 64))
        arch = neural.ArchSpec(
            maxlen=maxlen,
            embed_dim=int(overrides.get("embed_dim", store.dim if store else 32)),
            lstm_units=int(overrides.get("lstm_units", 16 if family == "bilstm" else 32)),
            bidirectional=family == "bilstm",
            dense_units=int(overrides.get("dense_units", 32)),
            head="sigmoid" if task == "probability" else "softmax",
            n_classes=len(catalog),
        )
        model = neural.init_model(
            arch,
            seed,
            vocab,
            embeddings=store if representation == "word2vec" else None,
        )
        seqs = np.stack([features.encode_sequence(d, vocab, maxlen) for d in docs])
        if arch.head == "sigmoid":
            targets = np.eye(len(catalog))[y]
        else:
            targets = y
        config = neural.TrainConfig(
            lr=float(overrides.get("lr", 0.01)),
            batch_size=int(overrides.get("batch_size", 8)),
            epochs=int(overrides.get("epochs", 30)),
            seed=seed,
            clip_norm=float(overrides.get("clip_norm", 5.0)),
        )
        model, _history = neural.train(model, (seqs, targets), None, config)
        featurizer = SequenceFeaturizer(vocab=vocab, maxlen=maxlen)
    else:
        raise DataError(f"unknown family {family!r}")

    return ModelArtifact(
        task=task,
        case_type=caseset.case_type,
        preprocess=pre,
        catalog=catalog,
        featurizer=featurizer,
        family=family,
        model=model,
        seed=seed,
        toolkit_version=__version__,
    )


def cmd_train(args) -> int:
    caseset = corpus.load_cases(args.data)
    overrides = _load_json(args.config) if args.config else {}
    artifact = train_artifact(
        caseset,
        task=args.task,
        family=args.family,
        representation=args.representation,
        seed=args.seed,
        embeddings_path=args.embeddings,
        overrides=overrides,
    )
    save_artifact(artifact, args.out)
    print(f"saved {args.family}/{args.representation} artifact for task {args.task} to {args.out}")
    return 0


def cmd_grid(args) -> int:
    caseset = corpus.load_cases(args.data)
    pre = artext.default_config()
    docs = [artext.preprocess(evaluation.task_text(c, args.task), pre) for c in caseset.cases]
    y = np.asarray(caseset.labels(args.task), dtype=np.int64)
    split = corpus.split_stratified(caseset, 0.25, args.seed, by=args.task)
    train_ids = {c.id for c in split.train.cases}
    is_train = np.array([c.id in train_ids for c in caseset.cases])
    if args.representation == "tfidf":
        vectorizer = features.tfidf_fit([d for d, t in zip(docs, is_train) if t])
        X = vectorizer.transform_dense(docs)
    else:
        if not args.embeddings:
            raise DataError("representation word2vec requires --embeddings")
        store = features.load_embeddings(args.embeddings)
        X = np.stack([features.average_embedding(d, store) for d in docs])
    result = evaluation.grid_search(
        "svm",
        list(evaluation.DEFAULT_SVM_GRID),
        (X[is_train], y[is_train]),
        (X[~is_train], y[~is_train]),
        args.seed,
    )
    print(f"best: {result.best_params} (validation accuracy {result.best_score:.3f})")
    if args.out:
        doc = {
            "best": result.best_params,
            "best_score": result.best_score,
            "scores": [{"params": p, "score": s} for p, s in result.scores],
        }
        Path(args.out).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
        print(f"wrote grid scores to {args.out}")
    return 0


def cmd_eval(args) -> int:
    caseset = corpus.load_cases(args.data)
    overrides = _load_json(args.config) if args.config else {}
    if args.rows:
        overrides["rows"] = _parse_rows(args.rows)
    config = evaluation.ExperimentConfig(
        task=args.task,
        case_type=caseset.case_type,
        seed=args.seed,
        embedding_path=args.embeddings,
        **{k: v for k, v in overrides.items() if k != "task"},
    )
    report = evaluation.run_experiment(config, caseset)
    print(report.render_table())
    if args.out:
        out = Path(args.out)
        out.write_bytes(report.to_json_bytes())
        # timings live in the text rendering only; the JSON stays
        # byte-identical for a fixed config and seed
        out.with_suffix(".txt").write_text(report.render_table() + "\n", encoding="utf-8")
        print(f"wrote report to {args.out}")
    return 0


def cmd_predict(args) -> int:
    registry = service.Registry()
    model_id = registry.add_path(args.model, embedding_path=args.embeddings)
    request = {
        "model_id": model_id,
        "claim": args.claim,
        "answer": args.answer,
        "pleading": args.pleading,
    }
    if args.evidence_model:
        request["evidence_model_id"] = registry.add_path(
            args.evidence_model, embedding_path=args.embeddings
        )
    response = service.handle_predict(request, registry)
    print(json.dumps(response, ensure_ascii=False, indent=2))
    return 0


def cmd_serve(args) -> int:
    server = service.serve(args.addr, args.artifact, embedding_path=args.embeddings)
    host, port = server.address[0], server.address[1]
    print(f"serving on http://{host}:{port} (health: /health, models: /models)")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    return 0


_COMMANDS = {
    "synth": cmd_synth,
    "preprocess": cmd_preprocess,
    "train": cmd_train,
    "grid": cmd_grid,
    "eval": cmd_eval,
    "predict": cmd_predict,
    "serve": cmd_serve,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except AljpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

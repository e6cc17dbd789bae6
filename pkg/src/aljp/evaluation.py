"""Metrics, hyperparameter grid search, and the experiment runner.

``run_experiment`` executes preprocess -> featurize -> train -> evaluate for
every requested (model family, representation) pair and emits a report with
one row per pair and the four columns P/R/F1/Acc (percent, macro-averaged).
Report content is deterministic for a fixed config and seed; wall-clock
timings are kept out of the canonical byte form and shown only in the
rendered table.
"""

from __future__ import annotations

import json
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import artext, classical, corpus, features, neural
from .errors import DataError
from .numkit import derive_seed

__all__ = [
    "ConfusionMatrix",
    "MetricsReport",
    "confusion",
    "macro_metrics",
    "GridResult",
    "grid_search",
    "DEFAULT_SVM_GRID",
    "ALL_ROWS",
    "ExperimentConfig",
    "RowResult",
    "ExperimentReport",
    "run_experiment",
    "row_name",
    "task_text",
]

ConfusionMatrix = np.ndarray

FAMILY_LABELS = {"svm": "SVM", "logreg": "LR", "lstm": "LSTM", "bilstm": "BILSTM"}
REPR_LABELS = {"tfidf": "TFIDF", "word2vec": "Word2Vec"}

ALL_ROWS = (
    ("svm", "tfidf"),
    ("svm", "word2vec"),
    ("logreg", "tfidf"),
    ("logreg", "word2vec"),
    ("lstm", "tfidf"),
    ("lstm", "word2vec"),
    ("bilstm", "tfidf"),
    ("bilstm", "word2vec"),
)

DEFAULT_SVM_GRID = tuple(
    [{"kind": "linear", "c": c} for c in (0.1, 1.0, 10.0, 100.0)]
    + [
        {"kind": "rbf", "c": c, "gamma": g}
        for c in (0.1, 1.0, 10.0, 100.0)
        for g in (0.001, 0.01, 0.1, 1.0)
    ]
)


def confusion(y_true, y_pred, n_classes: int) -> ConfusionMatrix:
    """K x K count matrix; rows are true classes, columns predictions."""
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape:
        raise DataError("y_true and y_pred must have equal length")
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    for t, p in zip(y_true, y_pred):
        if not (0 <= t < n_classes and 0 <= p < n_classes):
            raise DataError(f"label pair ({t}, {p}) out of range for {n_classes} classes")
        cm[t, p] += 1
    return cm


@dataclass(frozen=True)
class MetricsReport:
    """Percent accuracy plus macro-averaged precision/recall/F1."""

    accuracy: float
    precision: float
    recall: float
    f1: float

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }


def macro_metrics(cm: ConfusionMatrix) -> MetricsReport:
    """Unweighted per-class means; zero-denominator P/R/F1 count as 0."""
    cm = np.asarray(cm)
    total = int(cm.sum())
    if total == 0:
        raise DataError("confusion matrix is empty")
    n_classes = cm.shape[0]
    precisions, recalls, f1s = [], [], []
    for k in range(n_classes):
        tp = float(cm[k, k])
        col = float(cm[:, k].sum())
        row = float(cm[k, :].sum())
        if col > 0:
            p = tp / col
        else:
            warnings.warn(f"class {k}: no predictions, precision defined as 0", stacklevel=2)
            p = 0.0
        if row > 0:
            r = tp / row
        else:
            warnings.warn(f"class {k}: no true cases, recall defined as 0", stacklevel=2)
            r = 0.0
        f = 2.0 * p * r / (p + r) if (p + r) > 0 else 0.0
        precisions.append(p)
        recalls.append(r)
        f1s.append(f)
    return MetricsReport(
        accuracy=100.0 * float(np.trace(cm)) / total,
        precision=100.0 * float(np.mean(precisions)),
        recall=100.0 * float(np.mean(recalls)),
        f1=100.0 * float(np.mean(f1s)),
    )


@dataclass
class GridResult:
    best_params: dict
    best_score: float
    scores: list  # [(params, score)] in canonical grid order


def grid_search(
    family: str,
    grid,
    train_data,
    valid_data,
    seed: int,
) -> GridResult:
    """Train one model per grid point, score validation accuracy, return the max.

    Ties break to the earlier grid point, so the outcome is independent of
    evaluation order.
    """
    grid = list(grid)
    if not grid:
        raise DataError("grid must not be empty")
    X_train, y_train = train_data
    X_valid, y_valid = valid_data
    scores = []
    best_idx = -1
    best_score = -np.inf
    for idx, point in enumerate(grid):
        point_seed = derive_seed(seed, f"grid/{idx}")
        if family == "svm":
            kernel = classical.KernelSpec(
                kind=point["kind"], c=point["c"], gamma=point.get("gamma")
            )
            model = classical.ovr_train(X_train, y_train, "svm", kernel=kernel, seed=point_seed)
            predictions = [classical.ovr_predict(model, x)[0] for x in X_valid]
        elif family == "logreg":
            config = classical.LogRegConfig(seed=point_seed % (2**32), **point)
            model = classical.train_logreg(X_train, y_train, config)
            predictions = list(
                np.argmax(classical.logreg_predict_proba(model, np.asarray(X_valid)), axis=1)
            )
        else:
            raise DataError(f"unknown model family {family!r}")
        score = float(np.mean(np.asarray(predictions) == np.asarray(y_valid)))
        scores.append((point, score))
        if score > best_score:
            best_score = score
            best_idx = idx
    return GridResult(best_params=grid[best_idx], best_score=best_score, scores=scores)


@dataclass
class ExperimentConfig:
    """Everything run_experiment needs; defaults target desk-scale corpora."""

    task: str = "judgment"
    case_type: str = "custody"
    rows: tuple = ALL_ROWS
    test_fraction: float = 0.25
    valid_fraction: float = 0.25
    seed: int = 42
    min_df: int = 1
    maxlen: int = 64
    embed_dim: int = 32
    lstm_units: int = 32
    bilstm_units: int = 32
    dense_units: int = 32
    neural_epochs: int = 30
    neural_batch: int = 8
    neural_lr: float = 0.015
    clip_norm: float = 5.0
    logreg_lr: float = 0.5
    logreg_epochs: int = 200
    logreg_l2: float = 1e-4
    svm_grid: tuple = DEFAULT_SVM_GRID
    embedding_path: str | None = None
    preprocess: artext.PreprocessConfig = field(default_factory=artext.default_config)

    def echo(self) -> dict:
        return {
            "task": self.task,
            "case_type": self.case_type,
            "rows": [row_name(f, r) for f, r in self.rows],
            "test_fraction": self.test_fraction,
            "valid_fraction": self.valid_fraction,
            "seed": self.seed,
            "min_df": self.min_df,
            "maxlen": self.maxlen,
            "embed_dim": self.embed_dim,
            "lstm_units": self.lstm_units,
            "bilstm_units": self.bilstm_units,
            "dense_units": self.dense_units,
            "neural_epochs": self.neural_epochs,
            "neural_batch": self.neural_batch,
            "neural_lr": self.neural_lr,
            "clip_norm": self.clip_norm,
            "logreg_lr": self.logreg_lr,
            "logreg_epochs": self.logreg_epochs,
            "logreg_l2": self.logreg_l2,
            "svm_grid_size": len(self.svm_grid),
            "embedding_path": self.embedding_path,
        }


@dataclass
class RowResult:
    name: str
    metrics: MetricsReport
    hyperparams: dict


@dataclass
class ExperimentReport:
    config: dict
    rows: list
    timings: dict

    def to_json_bytes(self) -> bytes:
        """Canonical machine-readable form; deterministic for (config, seed)."""
        doc = {
            "config": self.config,
            "rows": [
                {
                    "name": row.name,
                    "hyperparams": row.hyperparams,
                    **row.metrics.to_dict(),
                }
                for row in self.rows
            ],
        }
        return (
            json.dumps(doc, ensure_ascii=False, sort_keys=True, separators=(",", ":")) + "\n"
        ).encode("utf-8")

    def render_table(self) -> str:
        """Aligned text table, including wall-clock timings."""
        header = f"{'Model':<18}{'P(%)':>9}{'R(%)':>9}{'F1(%)':>9}{'Acc(%)':>9}{'sec':>9}"
        lines = [header, "-" * len(header)]
        for row in self.rows:
            m = row.metrics
            secs = self.timings.get(row.name, 0.0)
            lines.append(
                f"{row.name:<18}{m.precision:>9.2f}{m.recall:>9.2f}"
                f"{m.f1:>9.2f}{m.accuracy:>9.2f}{secs:>9.2f}"
            )
        lines.append(f"total time: {self.timings.get('total', 0.0):.2f}s")
        return "\n".join(lines)


def row_name(family: str, representation: str) -> str:
    try:
        return f"{FAMILY_LABELS[family]}-{REPR_LABELS[representation]}"
    except KeyError as exc:
        raise DataError(f"unknown row ({family!r}, {representation!r})") from exc


def task_text(case: corpus.Case, task: str) -> str:
    if task in ("judgment", "evidence"):
        return case.pleading_text
    if task == "probability":
        return f"{case.claim_text} {features.SEPARATOR_TOKEN} {case.answer_text}"
    raise DataError(f"unknown task {task!r}")


def _prepare_docs(caseset: corpus.CaseSet, task: str, config: ExperimentConfig) -> list:
    return [artext.preprocess(task_text(c, task), config.preprocess) for c in caseset.cases]


def run_experiment(config: ExperimentConfig, cases: corpus.CaseSet) -> ExperimentReport:
    """Full harness over every requested model x representation pair."""
    for family, representation in config.rows:
        row_name(family, representation)  # validate early
    needs_embeddings = any(rep == "word2vec" for _, rep in config.rows)
    store = None
    if needs_embeddings:
        if not config.embedding_path:
            raise DataError("representation word2vec requires embedding_path")
        store = features.load_embeddings(config.embedding_path)
        if store.dim != config.embed_dim:
            raise DataError(
                f"embedding file dim {store.dim} != configured embed_dim {config.embed_dim}"
            )

    catalog = cases.catalog(config.task)
    n_classes = len(catalog)
    split = corpus.split_stratified(
        cases, config.test_fraction, config.seed, by=config.task
    )
    inner = corpus.split_stratified(
        split.train,
        config.valid_fraction,
        derive_seed(config.seed, "valid") % (2**32),
        by=config.task,
    )

    docs_train = _prepare_docs(split.train, config.task, config)
    docs_test = _prepare_docs(split.test, config.task, config)
    docs_sub = _prepare_docs(inner.train, config.task, config)
    docs_valid = _prepare_docs(inner.test, config.task, config)
    y_train = np.asarray(split.train.labels(config.task), dtype=np.int64)
    y_test = np.asarray(split.test.labels(config.task), dtype=np.int64)
    y_sub = np.asarray(inner.train.labels(config.task), dtype=np.int64)
    y_valid = np.asarray(inner.test.labels(config.task), dtype=np.int64)

    vectorizer = features.tfidf_fit(docs_train, min_df=config.min_df)
    vocab = features.fit_vocab(docs_train, min_df=config.min_df)

    def tfidf_matrix(docs):
        return vectorizer.transform_dense(docs)

    def w2v_matrix(docs):
        return np.stack([features.average_embedding(d, store) for d in docs])

    def sequences(docs):
        return np.stack([features.encode_sequence(d, vocab, config.maxlen) for d in docs])

    rows: list[RowResult] = []
    timings: dict[str, float] = {}
    started = time.perf_counter()
    for family, representation in config.rows:
        name = row_name(family, representation)
        row_started = time.perf_counter()
        row_seed = derive_seed(config.seed, f"row/{name}") % (2**32)
        if family in ("svm", "logreg"):
            make = tfidf_matrix if representation == "tfidf" else w2v_matrix
            X_train, X_test = make(docs_train), make(docs_test)
            if family == "svm":
                X_sub, X_valid = make(docs_sub), make(docs_valid)
                result = grid_search(
                    "svm", list(config.svm_grid), (X_sub, y_sub), (X_valid, y_valid), row_seed
                )
                kernel = classical.KernelSpec(
                    kind=result.best_params["kind"],
                    c=result.best_params["c"],
                    gamma=result.best_params.get("gamma"),
                )
                model = classical.ovr_train(X_train, y_train, "svm", kernel=kernel, seed=row_seed)
                y_pred = np.array([classical.ovr_predict(model, x)[0] for x in X_test])
                hyper = {"kernel": result.best_params, "valid_accuracy": result.best_score}
            else:
                lr_config = classical.LogRegConfig(
                    lr=config.logreg_lr,
                    epochs=config.logreg_epochs,
                    l2=config.logreg_l2,
                    seed=row_seed,
                )
                model = classical.train_logreg(X_train, y_train, lr_config)
                y_pred = np.argmax(classical.logreg_predict_proba(model, X_test), axis=1)
                hyper = {
                    "lr": lr_config.lr,
                    "epochs": lr_config.epochs,
                    "l2": lr_config.l2,
                }
        else:
            bidirectional = family == "bilstm"
            arch = neural.ArchSpec(
                maxlen=config.maxlen,
                embed_dim=config.embed_dim,
                lstm_units=config.bilstm_units if bidirectional else config.lstm_units,
                bidirectional=bidirectional,
                dense_units=config.dense_units,
                head="sigmoid" if config.task == "probability" else "softmax",
                n_classes=n_classes,
            )
            model = neural.init_model(
                arch,
                row_seed,
                vocab,
                embeddings=store if representation == "word2vec" else None,
            )
            # Neural rows train on the full train split; the carved validation
            # set only picks the kept epoch (classical grid points train on the
            # sub-split so their selection stays held-out).
            seq_train, seq_valid = sequences(docs_train), sequences(docs_valid)
            if arch.head == "sigmoid":
                eye = np.eye(n_classes)
                targets_train, targets_valid = eye[y_train], eye[y_valid]
            else:
                targets_train, targets_valid = y_train, y_valid
            train_config = neural.TrainConfig(
                lr=config.neural_lr,
                batch_size=config.neural_batch,
                epochs=config.neural_epochs,
                seed=row_seed,
                clip_norm=config.clip_norm,
            )
            model, _history = neural.train(
                model, (seq_train, targets_train), (seq_valid, targets_valid), train_config
            )
            probs = neural.predict_batch(model, sequences(docs_test))
            y_pred = probs.argmax(axis=1)
            hyper = {
                "arch": arch.to_dict(),
                "epochs": config.neural_epochs,
                "lr": config.neural_lr,
                "batch_size": config.neural_batch,
            }
        cm = confusion(y_test, y_pred, n_classes)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")  # degenerate classes are expected at desk scale
            metrics = macro_metrics(cm)
        rows.append(RowResult(name=name, metrics=metrics, hyperparams=hyper))
        timings[name] = time.perf_counter() - row_started
    timings["total"] = time.perf_counter() - started
    return ExperimentReport(config=config.echo(), rows=rows, timings=timings)

"""Versioned model artifacts: one self-contained file per trained pipeline.

An artifact binds the preprocessing config, the fitted featurizer, the model
parameters, and the label catalog, and validates magic, version, and shape
consistency before any prediction. Floats are serialized via JSON repr, so a
save/load round trip reproduces predictions bit-for-bit. Embedding stores
are not inlined; they are referenced by path and content hash.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import classical, neural
from .artext import PreprocessConfig, preprocess
from .corpus import LabelCatalog
from .errors import ArtifactError, InvalidInputError
from .features import (
    SEPARATOR_TOKEN,
    EmbeddingStore,
    TfidfVectorizer,
    Vocabulary,
    average_embedding,
    encode_sequence,
    load_embeddings,
)

__all__ = [
    "MAGIC",
    "FORMAT_VERSION",
    "EmbeddingRef",
    "TfidfFeaturizer",
    "MeanEmbeddingFeaturizer",
    "SequenceFeaturizer",
    "ModelArtifact",
    "save_artifact",
    "load_artifact",
    "hash_file",
    "predict",
]

MAGIC = "ALJP"
FORMAT_VERSION = 1


def hash_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass
class EmbeddingRef:
    path: str
    sha256: str
    dim: int


@dataclass
class TfidfFeaturizer:
    vectorizer: TfidfVectorizer

    kind = "tfidf"

    @property
    def dim(self) -> int:
        return len(self.vectorizer.vocab)

    def featurize(self, tokens) -> np.ndarray:
        return self.vectorizer.transform(tokens).to_dense(self.dim)


@dataclass
class MeanEmbeddingFeaturizer:
    ref: EmbeddingRef
    store: EmbeddingStore

    kind = "w2v_mean"

    @property
    def dim(self) -> int:
        return self.ref.dim

    def featurize(self, tokens) -> np.ndarray:
        return average_embedding(tokens, self.store)


@dataclass
class SequenceFeaturizer:
    vocab: Vocabulary
    maxlen: int

    kind = "sequence"

    def featurize(self, tokens) -> np.ndarray:
        return encode_sequence(tokens, self.vocab, self.maxlen)


@dataclass
class ModelArtifact:
    task: str
    case_type: str
    preprocess: PreprocessConfig
    catalog: LabelCatalog
    featurizer: object
    family: str  # logreg | svm | lstm | bilstm
    model: object
    seed: int
    toolkit_version: str


def _featurizer_payload(featurizer) -> dict:
    if isinstance(featurizer, TfidfFeaturizer):
        return {"kind": "tfidf", **featurizer.vectorizer.to_dict()}
    if isinstance(featurizer, MeanEmbeddingFeaturizer):
        ref = featurizer.ref
        return {
            "kind": "w2v_mean",
            "embedding": {"path": ref.path, "sha256": ref.sha256, "dim": ref.dim},
        }
    if isinstance(featurizer, SequenceFeaturizer):
        return {
            "kind": "sequence",
            "vocab": featurizer.vocab.to_dict(),
            "maxlen": featurizer.maxlen,
        }
    raise ArtifactError(f"unknown featurizer type {type(featurizer).__name__}")


def _model_payload(family: str, model) -> dict:
    if family == "logreg":
        return {
            "family": "logreg",
            "weights": model.weights.tolist(),
            "bias": model.bias.tolist(),
            "l2": model.l2,
        }
    if family == "svm":
        return {
            "family": "svm",
            "kernel": model.models[0].kernel.to_dict(),
            "classes": [
                {
                    "support_idx": sub.support_idx.astype(int).tolist(),
                    "support_vectors": sub.support_vectors.tolist(),
                    "support_labels": sub.support_labels.tolist(),
                    "alphas": sub.alphas.tolist(),
                    "bias": sub.bias,
                }
                for sub in model.models
            ],
        }
    if family in ("lstm", "bilstm"):
        return {
            "family": family,
            "arch": model.arch.to_dict(),
            "vocab_rows": model.vocab_rows,
            "params": {name: p.tolist() for name, p in model.params.items()},
        }
    raise ArtifactError(f"unknown model family {family!r}")


def save_artifact(artifact: ModelArtifact, path) -> None:
    payload = {
        "magic": MAGIC,
        "format_version": FORMAT_VERSION,
        "meta": {"seed": artifact.seed, "toolkit_version": artifact.toolkit_version},
        "task": artifact.task,
        "case_type": artifact.case_type,
        "preprocess": artifact.preprocess.to_dict(),
        "catalog": artifact.catalog.to_dict(),
        "featurizer": _featurizer_payload(artifact.featurizer),
        "model": _model_payload(artifact.family, artifact.model),
    }
    Path(path).write_text(json.dumps(payload, ensure_ascii=False), encoding="utf-8")


def _load_featurizer(raw: dict, embedding_path=None):
    kind = raw.get("kind")
    if kind == "tfidf":
        return TfidfFeaturizer(vectorizer=TfidfVectorizer.from_dict(raw))
    if kind == "w2v_mean":
        ref_raw = raw["embedding"]
        path = embedding_path or ref_raw["path"]
        if not Path(path).exists():
            raise ArtifactError(f"embedding file {path!r} not found")
        actual = hash_file(path)
        if actual != ref_raw["sha256"]:
            raise ArtifactError(
                f"embedding hash check failed for {path!r}: "
                f"expected {ref_raw['sha256'][:12]}..., got {actual[:12]}..."
            )
        store = load_embeddings(path)
        if store.dim != ref_raw["dim"]:
            raise ArtifactError(
                f"embedding dim {store.dim} != recorded dim {ref_raw['dim']}"
            )
        ref = EmbeddingRef(path=str(path), sha256=ref_raw["sha256"], dim=ref_raw["dim"])
        return MeanEmbeddingFeaturizer(ref=ref, store=store)
    if kind == "sequence":
        return SequenceFeaturizer(
            vocab=Vocabulary.from_dict(raw["vocab"]), maxlen=int(raw["maxlen"])
        )
    raise ArtifactError(f"unknown featurizer kind {kind!r}")


def _load_model(raw: dict):
    family = raw.get("family")
    if family == "logreg":
        return family, classical.LogRegModel(
            weights=np.array(raw["weights"], dtype=np.float64),
            bias=np.array(raw["bias"], dtype=np.float64),
            l2=float(raw["l2"]),
        )
    if family == "svm":
        kernel = classical.KernelSpec.from_dict(raw["kernel"])
        models = [
            classical.SvmBinaryModel(
                support_idx=np.array(cls["support_idx"], dtype=np.int64),
                support_vectors=np.array(cls["support_vectors"], dtype=np.float64),
                support_labels=np.array(cls["support_labels"], dtype=np.float64),
                alphas=np.array(cls["alphas"], dtype=np.float64),
                bias=float(cls["bias"]),
                kernel=kernel,
            )
            for cls in raw["classes"]
        ]
        return family, classical.OvrModel(family="svm", models=models)
    if family in ("lstm", "bilstm"):
        arch = neural.ArchSpec.from_dict(raw["arch"])
        params = {name: np.array(p, dtype=np.float64) for name, p in raw["params"].items()}
        return family, neural.SeqClassifier(
            arch=arch, params=params, vocab_rows=int(raw["vocab_rows"])
        )
    raise ArtifactError(f"unknown model family {family!r}")


def _check_shapes(artifact: ModelArtifact) -> None:
    n_classes = len(artifact.catalog)
    family = artifact.family
    if family == "logreg":
        model = artifact.model
        if model.weights.ndim != 2 or model.weights.shape[0] != n_classes:
            raise ArtifactError("logreg weight matrix does not match the catalog size")
        if model.bias.shape != (n_classes,):
            raise ArtifactError("logreg bias does not match the catalog size")
        if hasattr(artifact.featurizer, "dim") and model.weights.shape[1] != artifact.featurizer.dim:
            raise ArtifactError(
                f"logreg input dim {model.weights.shape[1]} != featurizer dim "
                f"{artifact.featurizer.dim}"
            )
    elif family == "svm":
        model = artifact.model
        if model.n_classes != n_classes:
            raise ArtifactError("svm class count does not match the catalog size")
        for sub in model.models:
            rows = sub.support_vectors.shape[0]
            if not (len(sub.alphas) == len(sub.support_labels) == rows):
                raise ArtifactError("svm support arrays are inconsistent")
            if hasattr(artifact.featurizer, "dim") and rows and sub.support_vectors.shape[1] != artifact.featurizer.dim:
                raise ArtifactError("svm support vector dim != featurizer dim")
    elif family in ("lstm", "bilstm"):
        model = artifact.model
        arch = model.arch
        if arch.n_classes != n_classes:
            raise ArtifactError("neural head size does not match the catalog size")
        expected = {
            "embedding": (model.vocab_rows, arch.embed_dim),
            "dense_w": (arch.readout_dim, arch.dense_units),
            "dense_b": (arch.dense_units,),
            "head_w": (arch.dense_units, arch.n_classes),
            "head_b": (arch.n_classes,),
        }
        for direction in model.directions():
            expected[f"{direction}_wx"] = (arch.embed_dim, 4 * arch.lstm_units)
            expected[f"{direction}_wh"] = (arch.lstm_units, 4 * arch.lstm_units)
            expected[f"{direction}_b"] = (4 * arch.lstm_units,)
        for name, shape in expected.items():
            if name not in model.params or model.params[name].shape != shape:
                raise ArtifactError(f"neural parameter {name!r} missing or misshaped")
        if not isinstance(artifact.featurizer, SequenceFeaturizer):
            raise ArtifactError("neural model requires a sequence featurizer")
        if artifact.featurizer.vocab.seq_vocab_size != model.vocab_rows:
            raise ArtifactError("neural vocab rows != featurizer vocabulary size")
    else:
        raise ArtifactError(f"unknown model family {family!r}")


def load_artifact(path, embedding_path=None) -> ModelArtifact:
    """Validate and reconstruct an artifact; rejects unknown versions outright."""
    try:
        text = Path(path).read_text(encoding="utf-8")
        payload = json.loads(text)
    except (OSError, json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ArtifactError(f"{path}: truncated or unreadable artifact: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("magic") != MAGIC:
        raise ArtifactError(f"{path}: magic check failed (expected {MAGIC!r})")
    if payload.get("format_version") != FORMAT_VERSION:
        raise ArtifactError(
            f"{path}: unsupported format_version {payload.get('format_version')!r}"
        )
    try:
        family, model = _load_model(payload["model"])
        artifact = ModelArtifact(
            task=payload["task"],
            case_type=payload["case_type"],
            preprocess=PreprocessConfig.from_dict(payload["preprocess"]),
            catalog=LabelCatalog.from_dict(payload["catalog"]),
            featurizer=_load_featurizer(payload["featurizer"], embedding_path),
            family=family,
            model=model,
            seed=int(payload["meta"]["seed"]),
            toolkit_version=str(payload["meta"]["toolkit_version"]),
        )
    except KeyError as exc:
        raise ArtifactError(f"{path}: missing artifact field {exc}") from exc
    _check_shapes(artifact)
    return artifact


def input_text(artifact: ModelArtifact, claim: str = "", answer: str = "", pleading: str = "") -> str:
    """Pick and combine the request texts the artifact's task needs."""
    if artifact.task in ("judgment", "evidence"):
        if not pleading.strip():
            raise InvalidInputError(f"task {artifact.task!r} requires a pleading text")
        return pleading
    if not claim.strip() or not answer.strip():
        raise InvalidInputError("task 'probability' requires both claim and answer texts")
    return f"{claim} {SEPARATOR_TOKEN} {answer}"


def predict(artifact: ModelArtifact, text: str) -> dict:
    """Run the artifact's full pipeline on raw text."""
    tokens = preprocess(text, artifact.preprocess)
    if not tokens:
        raise InvalidInputError("input is empty after preprocessing")
    encoded = artifact.featurizer.featurize(tokens)
    if artifact.family == "logreg":
        probs = classical.logreg_predict_proba(artifact.model, encoded)
        class_index = int(np.argmax(probs))
    elif artifact.family == "svm":
        class_index, _scores, probs = classical.ovr_predict(artifact.model, encoded)
    else:
        probs, _caches = neural.forward(artifact.model, encoded)
        class_index = int(np.argmax(probs))
    return {
        "class_index": class_index,
        "probabilities": np.asarray(probs, dtype=np.float64),
        "token_count": len(tokens),
    }

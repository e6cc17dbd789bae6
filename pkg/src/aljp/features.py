"""Token lists to model inputs: TF-IDF weights, averaged embeddings, index sequences.

Vocabulary indices are dense 0..V-1 over corpus tokens; sequence encoding
shifts them by two so 0 is padding and 1 the unknown token. TF-IDF weights
are raw count times ln(N/df); an optional smoothed variant and L2 row
normalization sit behind flags and default off.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, EmbeddingFormatError, NotFittedError

logger = logging.getLogger(__name__)

__all__ = [
    "PAD_ID",
    "UNK_ID",
    "SEQ_OFFSET",
    "SEPARATOR_TOKEN",
    "Vocabulary",
    "SparseVector",
    "TfidfVectorizer",
    "EmbeddingStore",
    "fit_vocab",
    "tfidf_fit",
    "tfidf_transform",
    "load_embeddings",
    "average_embedding",
    "encode_sequence",
]

PAD_ID = 0
UNK_ID = 1
SEQ_OFFSET = 2

# Joins claim and answer before featurization in the two-text task.
SEPARATOR_TOKEN = "xxsepxx"


@dataclass
class Vocabulary:
    """Token-to-index map with per-token document frequencies."""

    token_index: dict
    df: np.ndarray  # document frequency per index
    n_docs: int

    def __len__(self) -> int:
        return len(self.token_index)

    @property
    def seq_vocab_size(self) -> int:
        """Row count needed by sequence models (tokens plus PAD and UNK)."""
        return len(self.token_index) + SEQ_OFFSET

    @property
    def tokens(self) -> list[str]:
        out = [""] * len(self.token_index)
        for tok, idx in self.token_index.items():
            out[idx] = tok
        return out

    def to_dict(self) -> dict:
        return {"tokens": self.tokens, "df": self.df.astype(int).tolist(), "n_docs": self.n_docs}

    @classmethod
    def from_dict(cls, raw: dict) -> "Vocabulary":
        return cls(
            token_index={tok: i for i, tok in enumerate(raw["tokens"])},
            df=np.asarray(raw["df"], dtype=np.float64),
            n_docs=int(raw["n_docs"]),
        )


def fit_vocab(docs, min_df: int = 1) -> Vocabulary:
    """Count document frequencies and keep tokens with df >= min_df.

    Tokens are indexed in sorted order so fitting is order-independent.
    """
    if not docs:
        raise DataError("cannot fit a vocabulary on an empty corpus")
    counts: dict[str, int] = {}
    for doc in docs:
        for token in set(doc):
            counts[token] = counts.get(token, 0) + 1
    kept = sorted(t for t, c in counts.items() if c >= min_df)
    token_index = {tok: i for i, tok in enumerate(kept)}
    df = np.array([counts[t] for t in kept], dtype=np.float64)
    return Vocabulary(token_index=token_index, df=df, n_docs=len(docs))


@dataclass
class SparseVector:
    """(index, weight) pairs with strictly increasing indices."""

    entries: list  # list[(int, float)]

    def to_dense(self, size: int) -> np.ndarray:
        out = np.zeros(size, dtype=np.float64)
        for idx, weight in self.entries:
            out[idx] = weight
        return out


@dataclass
class TfidfVectorizer:
    """Weight = count(token in doc) * ln(n_docs / df(token))."""

    vocab: Vocabulary | None = None
    idf: np.ndarray | None = None
    smooth: bool = False
    l2_normalize: bool = False
    fitted: bool = field(default=False)

    def fit(self, docs, min_df: int = 1) -> "TfidfVectorizer":
        self.vocab = fit_vocab(docs, min_df=min_df)
        n = self.vocab.n_docs
        if self.smooth:
            self.idf = np.log((1.0 + n) / (1.0 + self.vocab.df)) + 1.0
        else:
            self.idf = np.log(n / self.vocab.df)
        self.fitted = True
        return self

    def transform(self, doc) -> SparseVector:
        if not self.fitted:
            raise NotFittedError("transform called before fit")
        counts: dict[int, int] = {}
        for token in doc:
            idx = self.vocab.token_index.get(token)
            if idx is not None:
                counts[idx] = counts.get(idx, 0) + 1
        entries = [
            (idx, counts[idx] * float(self.idf[idx]))
            for idx in sorted(counts)
            if counts[idx] * float(self.idf[idx]) != 0.0
        ]
        if self.l2_normalize:
            norm = math.sqrt(sum(w * w for _, w in entries))
            if norm > 0:
                entries = [(i, w / norm) for i, w in entries]
        return SparseVector(entries=entries)

    def transform_dense(self, docs) -> np.ndarray:
        out = np.zeros((len(docs), len(self.vocab)), dtype=np.float64)
        for row, doc in enumerate(docs):
            for idx, weight in self.transform(doc).entries:
                out[row, idx] = weight
        return out

    def to_dict(self) -> dict:
        if not self.fitted:
            raise NotFittedError("cannot serialize an unfitted vectorizer")
        return {
            "vocab": self.vocab.to_dict(),
            "smooth": self.smooth,
            "l2_normalize": self.l2_normalize,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "TfidfVectorizer":
        vec = cls(smooth=raw["smooth"], l2_normalize=raw["l2_normalize"])
        vec.vocab = Vocabulary.from_dict(raw["vocab"])
        n = vec.vocab.n_docs
        if vec.smooth:
            vec.idf = np.log((1.0 + n) / (1.0 + vec.vocab.df)) + 1.0
        else:
            vec.idf = np.log(n / vec.vocab.df)
        vec.fitted = True
        return vec


def tfidf_fit(docs, min_df: int = 1, smooth: bool = False, l2_normalize: bool = False) -> TfidfVectorizer:
    return TfidfVectorizer(smooth=smooth, l2_normalize=l2_normalize).fit(docs, min_df=min_df)


def tfidf_transform(vectorizer: TfidfVectorizer, doc) -> SparseVector:
    return vectorizer.transform(doc)


@dataclass
class EmbeddingStore:
    """Pretrained word vectors of a fixed dimensionality."""

    dim: int
    vectors: dict  # token -> np.ndarray(dim,)

    def __post_init__(self):
        if self.dim <= 0:
            raise DataError("embedding dimension must be positive")

    def __contains__(self, token: str) -> bool:
        return token in self.vectors

    def __len__(self) -> int:
        return len(self.vectors)

    def get(self, token: str):
        return self.vectors.get(token)


def load_embeddings(path) -> EmbeddingStore:
    """Parse the word-vector text format: header ``vocab_size dim`` then one token per line."""
    try:
        handle = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"embedding file {path!r} not readable: {exc}") from exc
    with handle:
        header = handle.readline().split()
        if len(header) != 2:
            raise EmbeddingFormatError(f"{path}: header must be 'vocab_size dim'")
        try:
            declared, dim = int(header[0]), int(header[1])
        except ValueError as exc:
            raise EmbeddingFormatError(f"{path}: non-integer header") from exc
        if dim <= 0:
            raise EmbeddingFormatError(f"{path}: dimension must be positive")
        vectors: dict[str, np.ndarray] = {}
        for lineno, line in enumerate(handle, 2):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split(" ")
            if len(parts) != dim + 1:
                raise EmbeddingFormatError(
                    f"{path}:{lineno}: expected {dim + 1} fields, got {len(parts)}"
                )
            token = parts[0]
            try:
                vec = np.array([float(p) for p in parts[1:]], dtype=np.float64)
            except ValueError as exc:
                raise EmbeddingFormatError(f"{path}:{lineno}: non-numeric component") from exc
            if token in vectors:
                logger.warning("%s:%d: duplicate token %r, keeping the later row", path, lineno, token)
            vectors[token] = vec
    if declared != len(vectors):
        logger.warning(
            "%s: header declares %d tokens but %d parsed", path, declared, len(vectors)
        )
    return EmbeddingStore(dim=dim, vectors=vectors)


def save_embeddings(store: EmbeddingStore, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(f"{len(store.vectors)} {store.dim}\n")
        for token, vec in store.vectors.items():
            comps = " ".join(repr(float(v)) for v in vec)
            handle.write(f"{token} {comps}\n")


def average_embedding(tokens, store: EmbeddingStore) -> np.ndarray:
    """Mean of the in-store token vectors; zero vector when none are present."""
    total = np.zeros(store.dim, dtype=np.float64)
    hits = 0
    for token in tokens:
        vec = store.get(token)
        if vec is not None:
            total += vec
            hits += 1
    if hits == 0:
        return total
    return total / hits


def encode_sequence(tokens, vocab: Vocabulary, maxlen: int = 1200) -> np.ndarray:
    """Map tokens to shifted vocabulary ids, head-truncate, and post-pad to maxlen."""
    if maxlen < 1:
        raise DataError(f"maxlen must be >= 1, got {maxlen}")
    ids = np.full(maxlen, PAD_ID, dtype=np.int64)
    for pos, token in enumerate(tokens[:maxlen]):
        idx = vocab.token_index.get(token)
        ids[pos] = UNK_ID if idx is None else idx + SEQ_OFFSET
    return ids

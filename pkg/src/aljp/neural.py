"""Recurrent sequence classifiers with explicit forward and backward passes.

Layer stack: trainable embedding -> (Bi)LSTM -> dense relu -> head, where
the head is a softmax distribution or independent per-class sigmoids.
Gate weights are stored as one matrix per direction with slices ordered
input, forget, candidate, output. Padding (id 0) is masked by carrying the
previous state through, so the readout is the state at the last real token
and padded positions contribute no gradient.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .features import PAD_ID, SEQ_OFFSET, EmbeddingStore, Vocabulary
from .numkit import OptimizerState, RngState, optimizer_step, sigmoid, softmax

__all__ = [
    "ArchSpec",
    "SeqClassifier",
    "TrainConfig",
    "init_model",
    "forward",
    "predict_batch",
    "loss_and_grads",
    "train",
]


@dataclass(frozen=True)
class ArchSpec:
    maxlen: int = 1200
    embed_dim: int = 300
    lstm_units: int = 300  # 64 is the usual choice when bidirectional
    bidirectional: bool = False
    dense_units: int = 300
    head: str = "softmax"  # "softmax" | "sigmoid"
    n_classes: int = 4

    def __post_init__(self):
        for name in ("maxlen", "embed_dim", "lstm_units", "dense_units", "n_classes"):
            if getattr(self, name) < 1:
                raise DataError(f"{name} must be positive")
        if self.head not in ("softmax", "sigmoid"):
            raise DataError(f"unknown head {self.head!r}")

    @property
    def readout_dim(self) -> int:
        return self.lstm_units * (2 if self.bidirectional else 1)

    def to_dict(self) -> dict:
        return {
            "maxlen": self.maxlen,
            "embed_dim": self.embed_dim,
            "lstm_units": self.lstm_units,
            "bidirectional": self.bidirectional,
            "dense_units": self.dense_units,
            "head": self.head,
            "n_classes": self.n_classes,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "ArchSpec":
        return cls(**raw)


@dataclass
class SeqClassifier:
    arch: ArchSpec
    params: dict  # name -> np.ndarray
    vocab_rows: int

    def directions(self) -> list[str]:
        return ["fwd", "bwd"] if self.arch.bidirectional else ["fwd"]


@dataclass
class TrainConfig:
    optimizer: str = "adam"
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    batch_size: int = 8
    epochs: int = 30
    seed: int = 0
    clip_norm: float = 5.0

    def __post_init__(self):
        if self.batch_size < 1:
            raise DataError("batch_size must be >= 1")
        if self.epochs < 0:
            raise DataError("epochs must be >= 0")


def _glorot(rng: RngState, shape) -> np.ndarray:
    limit = np.sqrt(6.0 / (shape[0] + shape[1]))
    return rng.uniform_array(shape, -limit, limit)


def init_model(
    arch: ArchSpec,
    seed: int,
    vocab: Vocabulary,
    embeddings: EmbeddingStore | None = None,
) -> SeqClassifier:
    """Seeded init: Glorot-uniform weights, zero biases except forget gate at 1.

    Embedding rows are uniform in [-0.05, 0.05]; rows for tokens present in
    the store are copied verbatim; the padding row is zero.
    """
    if embeddings is not None and embeddings.dim != arch.embed_dim:
        raise DataError(
            f"embedding store dim {embeddings.dim} != arch embed_dim {arch.embed_dim}"
        )
    rng = RngState(seed, stream=41)
    rows = vocab.seq_vocab_size
    emb = rng.uniform_array((rows, arch.embed_dim), -0.05, 0.05)
    emb[PAD_ID] = 0.0
    if embeddings is not None:
        for token, idx in vocab.token_index.items():
            vec = embeddings.get(token)
            if vec is not None:
                emb[idx + SEQ_OFFSET] = vec
    params = {"embedding": emb}
    hidden = arch.lstm_units
    for direction in ["fwd", "bwd"] if arch.bidirectional else ["fwd"]:
        params[f"{direction}_wx"] = _glorot(rng, (arch.embed_dim, 4 * hidden))
        params[f"{direction}_wh"] = _glorot(rng, (hidden, 4 * hidden))
        bias = np.zeros(4 * hidden, dtype=np.float64)
        bias[hidden : 2 * hidden] = 1.0  # forget-gate bias
        params[f"{direction}_b"] = bias
    readout = hidden * (2 if arch.bidirectional else 1)
    params["dense_w"] = _glorot(rng, (readout, arch.dense_units))
    params["dense_b"] = np.zeros(arch.dense_units, dtype=np.float64)
    params["head_w"] = _glorot(rng, (arch.dense_units, arch.n_classes))
    params["head_b"] = np.zeros(arch.n_classes, dtype=np.float64)
    return SeqClassifier(arch=arch, params=params, vocab_rows=rows)


def _run_direction(model: SeqClassifier, seqs: np.ndarray, direction: str):
    """One LSTM direction over the batch; returns final state and step caches."""
    params = model.params
    wx = params[f"{direction}_wx"]
    wh = params[f"{direction}_wh"]
    bias = params[f"{direction}_b"]
    hidden = model.arch.lstm_units
    batch, steps = seqs.shape
    h = np.zeros((batch, hidden), dtype=np.float64)
    c = np.zeros((batch, hidden), dtype=np.float64)
    emb = params["embedding"]
    order = range(steps) if direction == "fwd" else range(steps - 1, -1, -1)
    caches = []
    for t in order:
        ids = seqs[:, t]
        x = emb[ids]
        mask = (ids != PAD_ID).astype(np.float64)[:, None]
        z = x @ wx + h @ wh + bias
        gi = sigmoid(z[:, :hidden])
        gf = sigmoid(z[:, hidden : 2 * hidden])
        gg = np.tanh(z[:, 2 * hidden : 3 * hidden])
        go = sigmoid(z[:, 3 * hidden :])
        c_new = gf * c + gi * gg
        tanh_c = np.tanh(c_new)
        h_new = go * tanh_c
        caches.append(
            {
                "ids": ids,
                "x": x,
                "h_prev": h,
                "c_prev": c,
                "i": gi,
                "f": gf,
                "g": gg,
                "o": go,
                "tanh_c": tanh_c,
                "mask": mask,
            }
        )
        h = mask * h_new + (1.0 - mask) * h
        c = mask * c_new + (1.0 - mask) * c
    return h, caches


def _forward_batch(model: SeqClassifier, seqs: np.ndarray):
    seqs = np.asarray(seqs, dtype=np.int64)
    if seqs.ndim != 2:
        raise DataError("sequence batch must be 2-D")
    if seqs.shape[1] > model.arch.maxlen:
        raise DataError(
            f"sequence length {seqs.shape[1]} exceeds maxlen {model.arch.maxlen}"
        )
    if seqs.size and int(seqs.max()) >= model.vocab_rows:
        raise DataError(f"token id {int(seqs.max())} out of range ({model.vocab_rows} rows)")
    h_fwd, cache_fwd = _run_direction(model, seqs, "fwd")
    caches = {"seqs": seqs, "fwd": cache_fwd}
    if model.arch.bidirectional:
        h_bwd, cache_bwd = _run_direction(model, seqs, "bwd")
        readout = np.concatenate([h_fwd, h_bwd], axis=1)
        caches["bwd"] = cache_bwd
    else:
        readout = h_fwd
    dense_pre = readout @ model.params["dense_w"] + model.params["dense_b"]
    dense_out = np.maximum(dense_pre, 0.0)
    logits = dense_out @ model.params["head_w"] + model.params["head_b"]
    probs = softmax(logits) if model.arch.head == "softmax" else sigmoid(logits)
    caches.update(
        {
            "readout": readout,
            "dense_pre": dense_pre,
            "dense_out": dense_out,
            "logits": logits,
            "probs": probs,
        }
    )
    return probs, caches


def forward(model: SeqClassifier, seq) -> tuple[np.ndarray, dict]:
    """Per-class outputs for one sequence of ids (length <= maxlen)."""
    seq = np.asarray(seq, dtype=np.int64)
    if seq.ndim != 1:
        raise DataError("forward expects a 1-D id sequence")
    probs, caches = _forward_batch(model, seq[None, :])
    return probs[0], caches


def predict_batch(model: SeqClassifier, seqs) -> np.ndarray:
    probs, _ = _forward_batch(model, seqs)
    return probs


def _loss_from_logits(model: SeqClassifier, logits: np.ndarray, targets):
    """Loss and dL/dlogits for the configured head."""
    batch = logits.shape[0]
    k = model.arch.n_classes
    if model.arch.head == "softmax":
        y = np.asarray(targets, dtype=np.int64)
        if y.ndim != 1 or y.shape[0] != batch:
            raise DataError("softmax head expects one class index per sequence")
        if y.size and (y.min() < 0 or y.max() >= k):
            raise DataError("class index out of range")
        zmax = logits.max(axis=1, keepdims=True)
        lse = np.log(np.exp(logits - zmax).sum(axis=1)) + zmax[:, 0]
        loss = float(np.mean(lse - logits[np.arange(batch), y]))
        dlogits = softmax(logits)
        dlogits[np.arange(batch), y] -= 1.0
        dlogits /= batch
        return loss, dlogits
    t = np.asarray(targets, dtype=np.float64)
    if t.shape != logits.shape:
        raise DataError("sigmoid head expects a 0/1 target row per sequence")
    if not np.all((t == 0.0) | (t == 1.0)):
        raise DataError("sigmoid targets must be 0 or 1")
    elementwise = np.maximum(logits, 0.0) - logits * t + np.log1p(np.exp(-np.abs(logits)))
    loss = float(elementwise.sum() / (batch * k))
    dlogits = (sigmoid(logits) - t) / (batch * k)
    return loss, dlogits


def _backward_direction(model: SeqClassifier, caches: list, dh_final: np.ndarray, grads: dict, direction: str):
    params = model.params
    wx = params[f"{direction}_wx"]
    wh = params[f"{direction}_wh"]
    hidden = model.arch.lstm_units
    dh = dh_final
    dc = np.zeros_like(dh)
    g_wx = grads[f"{direction}_wx"]
    g_wh = grads[f"{direction}_wh"]
    g_b = grads[f"{direction}_b"]
    g_emb = grads["embedding"]
    for cache in reversed(caches):
        mask = cache["mask"]
        dh_eff = dh * mask
        dc_eff = dc * mask
        dh_carry = dh * (1.0 - mask)
        dc_carry = dc * (1.0 - mask)
        gi, gf, gg, go = cache["i"], cache["f"], cache["g"], cache["o"]
        tanh_c = cache["tanh_c"]
        d_o = dh_eff * tanh_c
        dct = dc_eff + dh_eff * go * (1.0 - tanh_c**2)
        d_i = dct * gg
        d_f = dct * cache["c_prev"]
        d_g = dct * gi
        dc_prev = dct * gf
        dz = np.concatenate(
            [
                d_i * gi * (1.0 - gi),
                d_f * gf * (1.0 - gf),
                d_g * (1.0 - gg**2),
                d_o * go * (1.0 - go),
            ],
            axis=1,
        )
        g_wx += cache["x"].T @ dz
        g_wh += cache["h_prev"].T @ dz
        g_b += dz.sum(axis=0)
        np.add.at(g_emb, cache["ids"], dz @ wx.T)
        dh = dz @ wh.T + dh_carry
        dc = dc_prev + dc_carry


def loss_and_grads(
    model: SeqClassifier,
    seqs,
    targets,
    clip_norm: float | None = None,
) -> tuple[float, dict]:
    """Batch loss and full gradient set via backpropagation through time.

    With ``clip_norm`` set, gradients are rescaled after computation so
    their global L2 norm does not exceed it.
    """
    probs, caches = _forward_batch(model, seqs)
    if probs.shape[0] == 0:
        raise DataError("batch must be non-empty")
    loss, dlogits = _loss_from_logits(model, caches["logits"], targets)
    grads = {name: np.zeros_like(p) for name, p in model.params.items()}
    dense_out = caches["dense_out"]
    readout = caches["readout"]
    grads["head_w"] += dense_out.T @ dlogits
    grads["head_b"] += dlogits.sum(axis=0)
    d_dense_out = dlogits @ model.params["head_w"].T
    d_dense_pre = d_dense_out * (caches["dense_pre"] > 0.0)
    grads["dense_w"] += readout.T @ d_dense_pre
    grads["dense_b"] += d_dense_pre.sum(axis=0)
    d_readout = d_dense_pre @ model.params["dense_w"].T
    hidden = model.arch.lstm_units
    _backward_direction(model, caches["fwd"], d_readout[:, :hidden], grads, "fwd")
    if model.arch.bidirectional:
        _backward_direction(model, caches["bwd"], d_readout[:, hidden:], grads, "bwd")
    if clip_norm is not None:
        total = np.sqrt(sum(float(np.sum(g**2)) for g in grads.values()))
        if total > clip_norm:
            scale = clip_norm / total
            for g in grads.values():
                g *= scale
    return loss, grads


def _dataset_metrics(model: SeqClassifier, seqs, targets) -> tuple[float, float]:
    probs, caches = _forward_batch(model, seqs)
    loss, _ = _loss_from_logits(model, caches["logits"], targets)
    predicted = probs.argmax(axis=1)
    if model.arch.head == "softmax":
        gold = np.asarray(targets, dtype=np.int64)
    else:
        gold = np.asarray(targets).argmax(axis=1)
    accuracy = float(np.mean(predicted == gold)) if len(gold) else 0.0
    return loss, accuracy


def train(
    model: SeqClassifier,
    train_data,
    valid_data,
    config: TrainConfig,
) -> tuple[SeqClassifier, list]:
    """Seeded epochs of shuffled mini-batches; keeps the best-validation weights.

    ``train_data``/``valid_data`` are (sequences, targets) pairs;
    ``valid_data`` may be None, in which case training loss drives the
    kept-parameter choice. Returns the model and one history entry per epoch.
    """
    seqs, targets = train_data
    seqs = np.asarray(seqs, dtype=np.int64)
    if len(seqs) == 0:
        raise DataError("training set is empty")
    targets_arr = np.asarray(targets)
    rng = RngState(config.seed, stream=53)
    opt = OptimizerState(
        rule=config.optimizer,
        lr=config.lr,
        beta1=config.beta1,
        beta2=config.beta2,
        eps=config.eps,
    )
    history: list[dict] = []
    best_loss = np.inf
    best_params = None
    for epoch in range(config.epochs):
        order = rng.permutation(len(seqs))
        for start in range(0, len(order), config.batch_size):
            batch = order[start : start + config.batch_size]
            _, grads = loss_and_grads(
                model, seqs[batch], targets_arr[batch], clip_norm=config.clip_norm
            )
            optimizer_step(model.params, grads, opt)
        train_loss, train_acc = _dataset_metrics(model, seqs, targets_arr)
        entry = {"epoch": epoch, "train_loss": train_loss, "train_acc": train_acc}
        keep_loss = train_loss
        if valid_data is not None and len(valid_data[0]):
            valid_loss, valid_acc = _dataset_metrics(model, valid_data[0], valid_data[1])
            entry["valid_loss"] = valid_loss
            entry["valid_acc"] = valid_acc
            keep_loss = valid_loss
        history.append(entry)
        if keep_loss < best_loss:
            best_loss = keep_loss
            best_params = {k: v.copy() for k, v in model.params.items()}
    if best_params is not None:
        model.params = best_params
    return model, history

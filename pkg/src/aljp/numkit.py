"""Deterministic numeric kernel shared by every trainable model.

Double precision throughout. All randomness flows through :class:`RngState`
(PCG32), which yields the same stream on every platform, so corpora, weight
initialization, and training schedules reproduce bit-for-bit. The
finite-difference checker here is the correctness oracle for all manually
derived gradients in the toolkit.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "RngState",
    "softmax",
    "sigmoid",
    "sigmoid_bce",
    "OptimizerState",
    "optimizer_step",
    "GradCheckReport",
    "finite_diff_check",
]

_MASK64 = (1 << 64) - 1
_MASK32 = (1 << 32) - 1
_PCG_MULT = 6364136223846793005


class RngState:
    """PCG32 generator (XSH-RR output function, 64-bit LCG state).

    Pure-integer arithmetic: identical seed and stream id give an identical
    draw sequence on every platform and Python version.
    """

    def __init__(self, seed: int, stream: int = 1):
        self.seed = int(seed)
        self._inc = (((int(stream) << 1) | 1)) & _MASK64
        self._state = 0
        self._next_u32()
        self._state = (self._state + (self.seed & _MASK64)) & _MASK64
        self._next_u32()

    def _next_u32(self) -> int:
        old = self._state
        self._state = (old * _PCG_MULT + self._inc) & _MASK64
        xorshifted = (((old >> 18) ^ old) >> 27) & _MASK32
        rot = old >> 59
        return ((xorshifted >> rot) | (xorshifted << ((-rot) & 31))) & _MASK32

    def random(self) -> float:
        """Uniform double in [0, 1) built from 53 random bits."""
        hi = self._next_u32() >> 5  # 27 bits
        lo = self._next_u32() >> 6  # 26 bits
        return (hi * 67108864.0 + lo) / 9007199254740992.0

    def randint(self, bound: int) -> int:
        """Uniform integer in [0, bound), unbiased via rejection."""
        if bound <= 0:
            raise ValueError("randint bound must be positive")
        threshold = (_MASK32 + 1) - ((_MASK32 + 1) % bound)
        while True:
            draw = self._next_u32()
            if draw < threshold:
                return draw % bound

    def uniform(self, low: float, high: float) -> float:
        return low + (high - low) * self.random()

    def uniform_array(self, shape, low: float, high: float) -> np.ndarray:
        size = int(np.prod(shape)) if shape else 1
        flat = np.array([self.random() for _ in range(size)], dtype=np.float64)
        return (low + (high - low) * flat).reshape(shape)

    def shuffle(self, items) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randint(i + 1)
            items[i], items[j] = items[j], items[i]

    def permutation(self, n: int) -> list[int]:
        order = list(range(n))
        self.shuffle(order)
        return order

    def choice(self, seq):
        if not len(seq):
            raise ValueError("choice on empty sequence")
        return seq[self.randint(len(seq))]

    def sample_indices(self, n: int, k: int) -> list[int]:
        """k distinct indices out of range(n), in draw order."""
        if k >= n:
            return list(range(n))
        seen: set[int] = set()
        out: list[int] = []
        while len(out) < k:
            idx = self.randint(n)
            if idx not in seen:
                seen.add(idx)
                out.append(idx)
        return out

    def child(self, key) -> "RngState":
        """Derive an independent substream keyed by an arbitrary label."""
        digest = hashlib.sha256(f"{self.seed}/{key}".encode("utf-8")).digest()
        sub_seed = int.from_bytes(digest[:8], "big")
        sub_stream = int.from_bytes(digest[8:16], "big")
        return RngState(sub_seed, stream=sub_stream)


def derive_seed(seed: int, key) -> int:
    """Stable 63-bit seed derived from a master seed and a label."""
    digest = hashlib.sha256(f"{seed}/{key}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def softmax(logits) -> np.ndarray:
    """Stable softmax over the last axis; rows sum to 1 within 1e-9."""
    z = np.asarray(logits, dtype=np.float64)
    if not np.all(np.isfinite(z)):
        raise ValueError("softmax received non-finite logits")
    shifted = z - z.max(axis=-1, keepdims=True)
    expz = np.exp(shifted)
    return expz / expz.sum(axis=-1, keepdims=True)


def sigmoid(x) -> np.ndarray:
    """Numerically stable logistic function, elementwise."""
    z = np.asarray(x, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def sigmoid_bce(logit: float, target) -> tuple[float, float, float]:
    """Binary cross-entropy on one logit.

    Returns (probability, loss, dloss/dlogit). Uses the overflow-free
    formulation max(z,0) - z*t + log(1 + exp(-|z|)).
    """
    z = float(logit)
    t = float(target)
    if t not in (0.0, 1.0):
        raise ValueError(f"target must be 0 or 1, got {target!r}")
    p = float(sigmoid(z))
    loss = max(z, 0.0) - z * t + math.log1p(math.exp(-abs(z)))
    return p, loss, p - t


@dataclass
class OptimizerState:
    """Update-rule selector plus per-parameter moment buffers."""

    rule: str = "adam"  # "sgd" | "adam"
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.rule not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer rule {self.rule!r}")


def optimizer_step(params: dict, grads: dict, state: OptimizerState) -> None:
    """Apply one SGD or bias-corrected Adam update in place."""
    for name, p in params.items():
        if name not in grads:
            raise ValueError(f"missing gradient for parameter {name!r}")
        if np.shape(grads[name]) != np.shape(p):
            raise ValueError(
                f"shape mismatch for {name!r}: param {np.shape(p)} vs grad {np.shape(grads[name])}"
            )
    if state.rule == "sgd":
        for name, p in params.items():
            p -= state.lr * grads[name]
        return
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    bias1 = 1.0 - b1**state.t
    bias2 = 1.0 - b2**state.t
    for name, p in params.items():
        g = grads[name]
        if name not in state.m:
            state.m[name] = np.zeros_like(p)
            state.v[name] = np.zeros_like(p)
        m = state.m[name]
        v = state.v[name]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * np.square(g)
        p -= state.lr * (m / bias1) / (np.sqrt(v / bias2) + state.eps)


@dataclass
class GradCheckReport:
    """Outcome of a central-difference gradient check."""

    per_param: dict
    max_rel_err: float
    tol: float
    passed: bool


def finite_diff_check(
    loss_fn,
    params: dict,
    analytic_grads: dict,
    eps: float = 1e-5,
    tol: float = 1e-4,
    max_coords_per_tensor: int | None = None,
    seed: int = 0,
) -> GradCheckReport:
    """Compare analytic gradients against central differences.

    ``loss_fn(params) -> float`` must be deterministic and side-effect free.
    For tensors larger than ``max_coords_per_tensor`` a seeded subset of
    coordinates is probed. Relative error per coordinate is
    |g_a - g_n| / max(1e-8, |g_a| + |g_n|).
    """
    rng = RngState(seed, stream=97)
    per_param: dict = {}
    global_max = 0.0
    for name, tensor in params.items():
        flat = tensor.reshape(-1)
        size = flat.shape[0]
        if max_coords_per_tensor is not None and size > max_coords_per_tensor:
            coords = rng.sample_indices(size, max_coords_per_tensor)
        else:
            coords = range(size)
        ana_flat = np.asarray(analytic_grads[name], dtype=np.float64).reshape(-1)
        worst = 0.0
        for idx in coords:
            orig = flat[idx]
            flat[idx] = orig + eps
            loss_plus = float(loss_fn(params))
            flat[idx] = orig - eps
            loss_minus = float(loss_fn(params))
            flat[idx] = orig
            if not (math.isfinite(loss_plus) and math.isfinite(loss_minus)):
                raise ValueError(f"non-finite loss while probing {name!r}")
            g_num = (loss_plus - loss_minus) / (2.0 * eps)
            g_ana = float(ana_flat[idx])
            rel = abs(g_ana - g_num) / max(1e-8, abs(g_ana) + abs(g_num))
            worst = max(worst, rel)
        per_param[name] = worst
        global_max = max(global_max, worst)
    return GradCheckReport(
        per_param=per_param,
        max_rel_err=global_max,
        tol=tol,
        passed=global_max < tol,
    )

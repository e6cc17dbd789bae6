"""Classical learners: multinomial logistic regression and kernel SVM trained by SMO.

The SVM follows the simplified sequential-minimal-optimization scheme: scan
for KKT violators, pair each with a seeded-random partner (falling back to
the remaining candidates when a pair makes no progress), and update the two
dual variables analytically. Multiclass is one-vs-rest with argmax over
scores; ties break to the lowest class index.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .numkit import RngState, sigmoid, softmax

__all__ = [
    "LogRegConfig",
    "LogRegModel",
    "train_logreg",
    "logreg_loss",
    "logreg_gradients",
    "logreg_predict_proba",
    "KernelSpec",
    "kernel_matrix",
    "SvmBinaryModel",
    "smo_train_binary",
    "dual_objective",
    "kkt_residuals",
    "OvrModel",
    "ovr_train",
    "ovr_scores",
    "ovr_predict",
]


# ---------------------------------------------------------------------------
# Logistic regression
# ---------------------------------------------------------------------------


@dataclass
class LogRegConfig:
    lr: float = 0.5
    epochs: int = 200
    batch_size: int = 16
    l2: float = 0.0
    seed: int = 0


@dataclass
class LogRegModel:
    weights: np.ndarray  # (K, D)
    bias: np.ndarray  # (K,)
    l2: float = 0.0

    @property
    def n_classes(self) -> int:
        return self.weights.shape[0]


def _scores(model: LogRegModel, X: np.ndarray) -> np.ndarray:
    return X @ model.weights.T + model.bias


def logreg_loss(model: LogRegModel, X: np.ndarray, y: np.ndarray) -> float:
    """Mean cross-entropy plus (l2/2)*||W||^2."""
    logits = _scores(model, X)
    shifted = logits - logits.max(axis=1, keepdims=True)
    logsumexp = np.log(np.exp(shifted).sum(axis=1)) + logits.max(axis=1)
    ce = float(np.mean(logsumexp - logits[np.arange(len(y)), y]))
    return ce + 0.5 * model.l2 * float(np.sum(model.weights**2))


def logreg_gradients(model: LogRegModel, X: np.ndarray, y: np.ndarray) -> dict:
    probs = softmax(_scores(model, X))
    probs[np.arange(len(y)), y] -= 1.0
    probs /= len(y)
    return {
        "weights": probs.T @ X + model.l2 * model.weights,
        "bias": probs.sum(axis=0),
    }


def train_logreg(X, y, config: LogRegConfig | None = None) -> LogRegModel:
    """Seeded mini-batch gradient descent on the multiclass cross-entropy."""
    if config is None:
        config = LogRegConfig()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or len(X) != len(y):
        raise DataError("X must be 2-D with one row per label")
    n_classes = int(y.max()) + 1 if len(y) else 0
    if len(set(y.tolist())) < 2:
        raise DataError("training data must contain at least two classes")
    model = LogRegModel(
        weights=np.zeros((n_classes, X.shape[1]), dtype=np.float64),
        bias=np.zeros(n_classes, dtype=np.float64),
        l2=config.l2,
    )
    rng = RngState(config.seed, stream=3)
    n = len(y)
    for _ in range(config.epochs):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            batch = order[start : start + config.batch_size]
            grads = logreg_gradients(model, X[batch], y[batch])
            model.weights -= config.lr * grads["weights"]
            model.bias -= config.lr * grads["bias"]
    return model


def logreg_predict_proba(model: LogRegModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        if x.shape[0] != model.weights.shape[1]:
            raise DataError(
                f"input dimension {x.shape[0]} != model dimension {model.weights.shape[1]}"
            )
        return softmax(model.weights @ x + model.bias)
    return softmax(_scores(model, x))


# ---------------------------------------------------------------------------
# Kernel SVM via SMO
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KernelSpec:
    kind: str  # "linear" | "rbf"
    c: float = 1.0
    gamma: float | None = None

    def __post_init__(self):
        if self.kind not in ("linear", "rbf"):
            raise DataError(f"unknown kernel {self.kind!r}")
        if self.c <= 0:
            raise DataError("C must be positive")
        if self.kind == "rbf" and (self.gamma is None or self.gamma <= 0):
            raise DataError("rbf kernel needs a positive gamma")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "c": self.c, "gamma": self.gamma}

    @classmethod
    def from_dict(cls, raw: dict) -> "KernelSpec":
        return cls(kind=raw["kind"], c=raw["c"], gamma=raw.get("gamma"))


def kernel_matrix(spec: KernelSpec, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if spec.kind == "linear":
        return A @ B.T
    sq = (
        np.sum(A**2, axis=1)[:, None]
        + np.sum(B**2, axis=1)[None, :]
        - 2.0 * (A @ B.T)
    )
    return np.exp(-spec.gamma * np.maximum(sq, 0.0))


@dataclass
class SvmBinaryModel:
    support_idx: np.ndarray  # indices into the training set
    support_vectors: np.ndarray  # (S, D)
    support_labels: np.ndarray  # (S,) in {-1, +1}
    alphas: np.ndarray  # (S,), all in (0, C]
    bias: float
    kernel: KernelSpec

    def decision_values(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        gram = kernel_matrix(self.kernel, X, self.support_vectors)
        return gram @ (self.alphas * self.support_labels) + self.bias

    def decision_value(self, x) -> float:
        return float(self.decision_values(x)[0])


def _bias_from_kkt(alphas: np.ndarray, y: np.ndarray, gram: np.ndarray, box: float) -> float:
    """Bias consistent with the KKT conditions at the current dual point.

    Interior duals pin the bias exactly; otherwise the box constraints give
    an interval and its midpoint is used. Recomputing this each sweep avoids
    the single-threshold stall of the simplified scheme when every dual sits
    at a bound.
    """
    partial = gram @ (alphas * y)
    interior = (alphas > 1e-8) & (alphas < box - 1e-8)
    if interior.any():
        return float(np.mean(y[interior] - partial[interior]))
    lower, upper = -np.inf, np.inf
    for i in range(len(y)):
        bound = y[i] - partial[i]
        at_zero = alphas[i] <= 1e-8
        if (at_zero and y[i] > 0) or (not at_zero and y[i] < 0):
            lower = max(lower, bound)
        else:
            upper = min(upper, bound)
    if np.isinf(lower):
        return float(upper)
    if np.isinf(upper):
        return float(lower)
    return 0.5 * (lower + upper)


def smo_train_binary(
    X,
    y,
    kernel: KernelSpec,
    tol: float = 1e-3,
    max_passes: int = 20,
    seed: int = 0,
    max_sweeps: int = 2000,
) -> SvmBinaryModel:
    """Solve the soft-margin dual by pairwise coordinate ascent.

    Terminates after ``max_passes`` consecutive sweeps without an update
    (or at the hard sweep cap). At that point every point satisfies the
    KKT conditions within ``tol``.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or len(X) != len(y):
        raise DataError("X must be 2-D with one row per label")
    if not set(np.unique(y).tolist()) == {-1.0, 1.0}:
        raise DataError("labels must contain both -1 and +1")
    n = len(y)
    C = kernel.c
    gram = kernel_matrix(kernel, X, X)
    alphas = np.zeros(n, dtype=np.float64)
    b = 0.0
    rng = RngState(seed, stream=13)

    def error(i: int) -> float:
        return float(gram[i] @ (alphas * y) + b - y[i])

    def try_step(i: int, j: int, err_i: float) -> bool:
        nonlocal b
        if i == j:
            return False
        err_j = error(j)
        ai_old, aj_old = alphas[i], alphas[j]
        if y[i] == y[j]:
            low = max(0.0, ai_old + aj_old - C)
            high = min(C, ai_old + aj_old)
        else:
            low = max(0.0, aj_old - ai_old)
            high = min(C, C + aj_old - ai_old)
        if high - low < 1e-12:
            return False
        eta = 2.0 * gram[i, j] - gram[i, i] - gram[j, j]
        if eta >= 0.0:
            return False
        aj_new = aj_old - y[j] * (err_i - err_j) / eta
        aj_new = min(high, max(low, aj_new))
        if abs(aj_new - aj_old) < 1e-7:
            return False
        ai_new = ai_old + y[i] * y[j] * (aj_old - aj_new)
        alphas[j] = aj_new
        alphas[i] = ai_new
        b1 = (
            b
            - err_i
            - y[i] * (ai_new - ai_old) * gram[i, i]
            - y[j] * (aj_new - aj_old) * gram[i, j]
        )
        b2 = (
            b
            - err_j
            - y[i] * (ai_new - ai_old) * gram[i, j]
            - y[j] * (aj_new - aj_old) * gram[j, j]
        )
        if 0.0 < ai_new < C:
            b = b1
        elif 0.0 < aj_new < C:
            b = b2
        else:
            b = 0.5 * (b1 + b2)
        return True

    passes = 0
    sweeps = 0
    while passes < max_passes and sweeps < max_sweeps:
        changed = 0
        for i in range(n):
            err_i = error(i)
            r = y[i] * err_i
            # bound comparisons use a float cushion so duals parked at a
            # bound by exact-arithmetic fuzz do not read as interior
            if (r < -tol and alphas[i] < C - 1e-8) or (r > tol and alphas[i] > 1e-8):
                candidates = [j for j in range(n) if j != i]
                rng.shuffle(candidates)
                for j in candidates:
                    if try_step(i, j, err_i):
                        changed += 1
                        break
        b = _bias_from_kkt(alphas, y, gram, C)
        sweeps += 1
        passes = passes + 1 if changed == 0 else 0

    # Snap near-boundary duals to the exact bounds; pairwise updates keep
    # sum(alpha*y) at zero and the snaps move it by < n * 1e-8.
    alphas[alphas < 1e-8] = 0.0
    alphas[alphas > C - 1e-8] = C
    support = np.nonzero(alphas > 0.0)[0]
    return SvmBinaryModel(
        support_idx=support,
        support_vectors=X[support].copy(),
        support_labels=y[support].copy(),
        alphas=alphas[support].copy(),
        bias=b,
        kernel=kernel,
    )


def dual_objective(alphas: np.ndarray, y: np.ndarray, gram: np.ndarray) -> float:
    """Soft-margin dual value: sum(alpha) - 0.5 * (alpha*y)' K (alpha*y)."""
    ay = alphas * y
    return float(alphas.sum() - 0.5 * ay @ gram @ ay)


def kkt_residuals(X, y, alphas, bias, kernel: KernelSpec) -> np.ndarray:
    """Per-point violation of the KKT conditions at the given dual point.

    alpha=0 requires margin >= 1, interior alpha requires margin == 1,
    alpha=C requires margin <= 1; the residual is how far the margin is on
    the wrong side.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    alphas = np.asarray(alphas, dtype=np.float64)
    gram = kernel_matrix(kernel, X, X)
    margins = y * (gram @ (alphas * y) + bias)
    C = kernel.c
    res = np.zeros(len(y))
    at_zero = alphas <= 0.0
    at_c = alphas >= C
    interior = ~(at_zero | at_c)
    res[at_zero] = np.maximum(0.0, 1.0 - margins[at_zero])
    res[interior] = np.abs(margins[interior] - 1.0)
    res[at_c] = np.maximum(0.0, margins[at_c] - 1.0)
    return res


# ---------------------------------------------------------------------------
# One-vs-rest multiclass
# ---------------------------------------------------------------------------


@dataclass
class OvrModel:
    family: str  # "svm" | "logreg"
    models: list = field(default_factory=list)

    @property
    def n_classes(self) -> int:
        return len(self.models)


def ovr_train(
    X,
    y,
    family: str,
    kernel: KernelSpec | None = None,
    logreg_config: LogRegConfig | None = None,
    seed: int = 0,
) -> OvrModel:
    """Train one binary model per class on +-1 relabelings."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n_classes = int(y.max()) + 1
    if n_classes < 2:
        raise DataError("need at least two classes")
    models = []
    for k in range(n_classes):
        positives = int(np.sum(y == k))
        if positives == 0:
            raise DataError(f"class {k} absent from training data")
        if family == "svm":
            if kernel is None:
                raise DataError("svm family needs a KernelSpec")
            yk = np.where(y == k, 1.0, -1.0)
            models.append(
                smo_train_binary(X, yk, kernel, seed=RngState(seed).child(k).seed)
            )
        elif family == "logreg":
            cfg = logreg_config or LogRegConfig()
            cfg_k = LogRegConfig(
                lr=cfg.lr,
                epochs=cfg.epochs,
                batch_size=cfg.batch_size,
                l2=cfg.l2,
                seed=RngState(cfg.seed).child(k).seed % (2**32),
            )
            yk = (y == k).astype(np.int64)
            models.append(train_logreg(X, yk, cfg_k))
        else:
            raise DataError(f"unknown family {family!r}")
    return OvrModel(family=family, models=models)


def ovr_scores(model: OvrModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    scores = np.zeros(model.n_classes, dtype=np.float64)
    for k, sub in enumerate(model.models):
        if model.family == "svm":
            scores[k] = sub.decision_value(x)
        else:
            logits = sub.weights @ x + sub.bias
            scores[k] = float(logits[1] - logits[0])
    return scores


def ovr_predict(model: OvrModel, x) -> tuple[int, np.ndarray, np.ndarray]:
    """Predicted class (argmax score, ties to lowest index), scores, probabilities."""
    scores = ovr_scores(model, x)
    if model.family == "svm":
        probs = sigmoid(scores)
    else:
        probs = softmax(scores)
    return int(np.argmax(scores)), scores, probs

"""One-vs-rest soft-margin SVMs trained with SMO.

The binary solver minimises the dual

    f(a) = 0.5 a'Qa - sum(a),   Q_ij = y_i y_j K(x_i, x_j),
    subject to y'a = 0 and 0 <= a_i <= C,

by sequential minimal optimisation with second-order working-set selection
(Fan, Chen and Lin, JMLR 2005), the same rule LIBSVM uses. The kernel matrix
of the training set is computed once and shared by all one-vs-rest
sub-problems.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ConfigError, DataError

TAU = 1e-12
FORMAT_VERSION = 1


class ConvergenceWarning(UserWarning):
    pass


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "linear"
    gamma: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("linear", "rbf"):
            raise ConfigError(f"kernel must be 'linear' or 'rbf', got {self.kind!r}")
        if self.gamma is not None and not (np.isfinite(self.gamma) and self.gamma > 0):
            raise ConfigError(f"gamma must be finite and positive, got {self.gamma!r}")

    def resolved(self, x) -> "KernelSpec":
        """Fill in the default gamma, 1 / (n_features * var(x))."""
        if self.kind != "rbf" or self.gamma is not None:
            return self
        var = float(np.var(x))
        return KernelSpec("rbf", 1.0 / (x.shape[1] * var) if var > 0 else 1.0)

    def __call__(self, a, b) -> np.ndarray:
        k = a @ b.T
        if self.kind == "linear":
            return k
        if self.gamma is None:
            raise ConfigError("rbf kernel needs a gamma (call resolved() first)")
        sq = (a * a).sum(1)[:, None] + (b * b).sum(1)[None, :] - 2.0 * k
        return np.exp(-self.gamma * np.maximum(sq, 0.0))


@dataclass(frozen=True)
class BinarySolution:
    alpha: np.ndarray
    rho: float
    iterations: int
    converged: bool

    def objective(self, K, y) -> float:
        ay = self.alpha * y
        return float(0.5 * ay @ K @ ay - self.alpha.sum())


def smo(K, y, C: float, tol: float = 1e-3, max_iter: Optional[int] = None) -> BinarySolution:
    """Solve one binary dual problem given its kernel matrix and +-1 labels."""
    K = np.asarray(K, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = len(y)
    if C <= 0:
        raise ConfigError(f"C must be positive, got {C}")
    if not (np.any(y > 0) and np.any(y < 0)):
        raise DataError("both classes are needed for a binary problem")
    if max_iter is None:
        max_iter = max(10_000_000, 100 * n)
    diag = np.diag(K).copy()
    alpha = np.zeros(n)
    grad = -np.ones(n)
    pos = y > 0
    it = 0
    converged = False
    while it < max_iter:
        # i: maximal violator in I_up; j: second-order choice in I_low
        yg = -y * grad
        up = np.where(pos, alpha < C, alpha > 0)
        low = np.where(pos, alpha > 0, alpha < C)
        g_up = np.where(up, yg, -np.inf)
        i = int(np.argmax(g_up))
        gmax = g_up[i]
        g_low = np.where(low, yg, np.inf)
        if gmax - g_low.min() < tol:
            converged = True
            break
        b = gmax - g_low
        quad = diag[i] + diag - 2.0 * K[i]
        quad = np.where(quad > 0, quad, TAU)
        score = np.where(b > 0, -(b * b) / quad, np.inf)
        j = int(np.argmin(score))
        if not np.isfinite(score[j]):
            converged = True
            break

        ai, aj = alpha[i], alpha[j]
        Kij = K[i, j]
        if y[i] != y[j]:
            q = diag[i] + diag[j] - 2.0 * Kij
            delta = (-grad[i] - grad[j]) / (q if q > 0 else TAU)
            diff = ai - aj
            new_i, new_j = ai + delta, aj + delta
            if diff > 0:
                if new_j < 0:
                    new_j, new_i = 0.0, diff
            elif new_i < 0:
                new_i, new_j = 0.0, -diff
            if diff > 0:
                if new_i > C:
                    new_i, new_j = C, C - diff
            elif new_j > C:
                new_j, new_i = C, C + diff
        else:
            q = diag[i] + diag[j] - 2.0 * Kij
            delta = (grad[i] - grad[j]) / (q if q > 0 else TAU)
            total = ai + aj
            new_i, new_j = ai - delta, aj + delta
            if total > C:
                if new_i > C:
                    new_i, new_j = C, total - C
            elif new_j < 0:
                new_j, new_i = 0.0, total
            if total > C:
                if new_j > C:
                    new_j, new_i = C, total - C
            elif new_i < 0:
                new_i, new_j = 0.0, total
        d_i, d_j = new_i - ai, new_j - aj
        alpha[i], alpha[j] = new_i, new_j
        # dG = Q[:, i] d_i + Q[:, j] d_j with Q = yy' * K
        grad += y * (K[i] * (y[i] * d_i) + K[j] * (y[j] * d_j))
        it += 1
    if not converged:
        warnings.warn(f"SMO stopped after {max_iter} iterations without reaching tol={tol}",
                      ConvergenceWarning, stacklevel=2)
    return BinarySolution(alpha, _rho(alpha, grad, y, C), it, converged)


def _rho(alpha, grad, y, C) -> float:
    yg = y * grad
    free = (alpha > 0) & (alpha < C)
    if free.any():
        return float(yg[free].mean())
    at_up = np.where(y > 0, alpha >= C, alpha <= 0)
    ub = yg[~at_up].min() if (~at_up).any() else np.inf
    lb = yg[at_up].max() if at_up.any() else -np.inf
    if not np.isfinite(ub):
        ub = lb
    if not np.isfinite(lb):
        lb = ub
    return float((ub + lb) / 2.0)


@dataclass(frozen=True)
class TrainedModel:
    """One-vs-rest ensemble.

    ``coef[c, s]`` is ``alpha * y`` of support vector ``s`` in the problem for
    class ``classes[c]`` (zero when it is not a support vector there).
    """

    classes: np.ndarray
    kernel: KernelSpec
    C: float
    support_vectors: np.ndarray
    support_index: np.ndarray
    coef: np.ndarray
    rho: np.ndarray
    tol: float = 1e-3
    iterations: tuple = ()

    def decision_function(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.support_vectors.shape[1]:
            raise DataError(f"expected features of width {self.support_vectors.shape[1]}, got shape {x.shape}")
        if self.kernel.kind == "linear":
            w = self.coef @ self.support_vectors
            return x @ w.T - self.rho
        return self.kernel(x, self.support_vectors) @ self.coef.T - self.rho

    def predict(self, x) -> np.ndarray:
        return predict_from_scores(self.decision_function(x), self.classes)


def predict_from_scores(scores, classes) -> np.ndarray:
    """Arg-max over classes; ``np.argmax`` keeps the first (lowest id) on ties."""
    order = np.argsort(classes, kind="stable")
    scores = np.asarray(scores)[:, order]
    return np.asarray(classes)[order][np.argmax(scores, axis=1)]


def svm_train(features, labels, kernel: KernelSpec = KernelSpec(), C: float = 1.0,
              tol: float = 1e-3, max_iter: Optional[int] = None) -> TrainedModel:
    x = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels)
    if x.ndim != 2 or len(x) != len(labels):
        raise DataError(f"features {x.shape} and labels {labels.shape} do not line up")
    if not np.all(np.isfinite(x)):
        raise DataError("features contain non-finite values")
    classes = np.unique(labels)
    if len(classes) < 2:
        raise DataError("training data has a single class")
    kernel = kernel.resolved(x)
    K = kernel(x, x)
    solutions = []
    if len(classes) == 2:
        # one binary problem serves both classes, with opposite signs
        y = np.where(labels == classes[1], 1.0, -1.0)
        s = smo(K, y, C, tol, max_iter)
        solutions = [BinarySolution(s.alpha, -s.rho, s.iterations, s.converged), s]
        signs = [-1.0, 1.0]
    else:
        for c in classes:
            y = np.where(labels == c, 1.0, -1.0)
            solutions.append(smo(K, y, C, tol, max_iter))
        signs = [1.0] * len(classes)
    support = np.flatnonzero(np.any([s.alpha > 0 for s in solutions], axis=0))
    coef = np.zeros((len(classes), len(support)))
    for c, (s, sign) in enumerate(zip(solutions, signs)):
        y = np.where(labels == classes[c], 1.0, -1.0) * sign
        coef[c] = sign * s.alpha[support] * y[support]
    rho = np.array([s.rho for s in solutions])
    return TrainedModel(classes, kernel, float(C), x[support].copy(), support, coef, rho, tol,
                        tuple(s.iterations for s in solutions))


def svm_predict(model: TrainedModel, features) -> np.ndarray:
    return model.predict(features)


@dataclass(frozen=True)
class Metrics:
    error_pct: float
    confusion: np.ndarray
    classes: np.ndarray

    def to_dict(self) -> dict:
        return {"error_pct": self.error_pct, "classes": self.classes.tolist(),
                "confusion": self.confusion.tolist()}


def evaluate(predictions, labels, classes=None) -> Metrics:
    """Error rate in percent and a confusion matrix (rows: true, columns: predicted)."""
    predictions = np.asarray(predictions)
    labels = np.asarray(labels)
    if predictions.shape != labels.shape or labels.size == 0:
        raise DataError("predictions and labels must be equal-length and non-empty")
    classes = np.unique(np.concatenate([labels, predictions])) if classes is None else np.asarray(classes)
    index = {c: i for i, c in enumerate(classes.tolist())}
    conf = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for t, p in zip(labels.tolist(), predictions.tolist()):
        conf[index[t], index[p]] += 1
    return Metrics(100.0 * float(np.mean(predictions != labels)), conf, classes)


def save_model(path, model: TrainedModel, stats=None) -> Path:
    """Write the model (and optional standardisation stats) to an ``.npz`` file."""
    path = Path(path)
    header = {"format": "mdscat-ovr-svm", "version": FORMAT_VERSION, "kernel": model.kernel.kind,
              "gamma": model.kernel.gamma, "C": model.C, "tol": model.tol,
              "iterations": list(model.iterations)}
    arrays = {"header": np.array(json.dumps(header)), "classes": model.classes,
              "support_vectors": model.support_vectors, "support_index": model.support_index,
              "coef": model.coef, "rho": model.rho}
    if stats is not None:
        arrays["mean"], arrays["std"] = stats.mean, stats.std
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)
    return path


def load_model(path):
    """Inverse of :func:`save_model`; returns ``(model, stats or None)``."""
    from .datasets import StandardStats

    path = Path(path)
    if not path.exists():
        raise DataError(f"model file {path} not found")
    with np.load(path, allow_pickle=False) as d:
        header = json.loads(str(d["header"]))
        if header.get("format") != "mdscat-ovr-svm" or header.get("version") != FORMAT_VERSION:
            raise DataError(f"{path}: unsupported model format {header.get('format')!r} "
                            f"v{header.get('version')}")
        model = TrainedModel(d["classes"], KernelSpec(header["kernel"], header["gamma"]), header["C"],
                             d["support_vectors"], d["support_index"], d["coef"], d["rho"],
                             header["tol"], tuple(header["iterations"]))
        stats = StandardStats(d["mean"], d["std"]) if "mean" in d.files else None
    return model, stats

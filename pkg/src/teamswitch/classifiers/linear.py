"""Multinomial logistic regression by full-batch gradient descent.

Features are standardized internally (train-set mean/scale, stored on the
model). The bias row is appended after standardization and excluded from the
L2 penalty. Each step uses a backtracking line search satisfying the Armijo
condition, so the training loss is monotonically non-increasing; iteration
stops at the gradient-norm tolerance or the iteration cap.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_ARMIJO_C = 1e-4
_MAX_BACKTRACKS = 60


def softmax_loss_and_grad(
    W: np.ndarray, X: np.ndarray, Y: np.ndarray, l2: float
) -> tuple[float, np.ndarray]:
    """Mean cross-entropy of softmax(X @ W) against one-hot Y, plus an L2
    penalty on all but the last (bias) row. Returns (loss, gradient)."""
    n = len(X)
    logits = X @ W
    logits -= logits.max(axis=1, keepdims=True)
    e = np.exp(logits)
    P = e / e.sum(axis=1, keepdims=True)
    eps = np.finfo(float).tiny
    ce = -np.log(np.maximum((P * Y).sum(axis=1), eps)).mean()
    penalty = W.copy()
    penalty[-1, :] = 0.0
    loss = ce + 0.5 * l2 * float((penalty * penalty).sum())
    grad = X.T @ (P - Y) / n + l2 * penalty
    return float(loss), grad


@dataclass
class SoftmaxParams:
    W: np.ndarray  # (d + 1, K), last row is the bias
    mean: np.ndarray
    scale: np.ndarray
    loss_history: list[float] = field(default_factory=list)

    def to_jsonable(self) -> dict:
        return {"W": self.W.tolist(), "mean": self.mean.tolist(),
                "scale": self.scale.tolist()}

    @classmethod
    def from_jsonable(cls, payload: dict) -> "SoftmaxParams":
        return cls(np.asarray(payload["W"], dtype=np.float64),
                   np.asarray(payload["mean"], dtype=np.float64),
                   np.asarray(payload["scale"], dtype=np.float64))


def standardize(X: np.ndarray, mean: np.ndarray, scale: np.ndarray) -> np.ndarray:
    return (X - mean) / scale


def _augment(X: np.ndarray) -> np.ndarray:
    return np.hstack([X, np.ones((len(X), 1))])


def fit_softmax_regression(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    l2: float,
    max_iter: int,
    grad_tol: float,
) -> SoftmaxParams:
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale[scale == 0.0] = 1.0
    Xs = _augment(standardize(X, mean, scale))
    n, d1 = Xs.shape
    Y = np.zeros((n, n_classes))
    Y[np.arange(n), y] = 1.0

    W = np.zeros((d1, n_classes))
    loss, grad = softmax_loss_and_grad(W, Xs, Y, l2)
    history = [loss]
    step = 1.0
    for _ in range(max_iter):
        gnorm2 = float((grad * grad).sum())
        if np.sqrt(gnorm2) < grad_tol:
            break
        t = step
        for _ in range(_MAX_BACKTRACKS):
            candidate = W - t * grad
            new_loss, new_grad = softmax_loss_and_grad(candidate, Xs, Y, l2)
            if new_loss <= loss - _ARMIJO_C * t * gnorm2:
                break
            t *= 0.5
        else:
            break  # no step satisfies descent; numerically converged
        W, loss, grad = candidate, new_loss, new_grad
        history.append(loss)
        step = min(t * 2.0, 1e4)
    return SoftmaxParams(W, mean, scale, history)


def softmax_scores(params: SoftmaxParams, X: np.ndarray) -> np.ndarray:
    Xs = _augment(standardize(X, params.mean, params.scale))
    logits = Xs @ params.W
    logits -= logits.max(axis=1, keepdims=True)
    e = np.exp(logits)
    return e / e.sum(axis=1, keepdims=True)

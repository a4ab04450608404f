"""k-nearest neighbors on z-scored features with Euclidean distance.

Class scores are neighbor-label proportions. Distance ties resolve by
training-row order (stable sort), so predictions are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class KNNParams:
    X: np.ndarray  # standardized training rows
    y: np.ndarray
    mean: np.ndarray
    scale: np.ndarray
    k: int

    def to_jsonable(self) -> dict:
        return {"X": self.X.tolist(), "y": self.y.tolist(),
                "mean": self.mean.tolist(), "scale": self.scale.tolist(),
                "k": self.k}

    @classmethod
    def from_jsonable(cls, payload: dict) -> "KNNParams":
        return cls(np.asarray(payload["X"], dtype=np.float64),
                   np.asarray(payload["y"], dtype=np.int64),
                   np.asarray(payload["mean"], dtype=np.float64),
                   np.asarray(payload["scale"], dtype=np.float64),
                   int(payload["k"]))


def fit_knn(X: np.ndarray, y: np.ndarray, k: int) -> KNNParams:
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale[scale == 0.0] = 1.0
    return KNNParams((X - mean) / scale, y.copy(), mean, scale, k)


def knn_scores(params: KNNParams, X: np.ndarray, n_classes: int,
               batch: int = 512) -> np.ndarray:
    """Neighbor-label proportions per row."""
    Xs = (X - params.mean) / params.scale
    n_train = len(params.X)
    k = min(params.k, n_train)
    scores = np.empty((len(Xs), n_classes))
    train_sq = (params.X * params.X).sum(axis=1)
    for start in range(0, len(Xs), batch):
        chunk = Xs[start:start + batch]
        # squared Euclidean distances; monotone with the true distance
        d2 = (chunk * chunk).sum(axis=1)[:, None] + train_sq[None, :]
        d2 -= 2.0 * (chunk @ params.X.T)
        order = np.argsort(d2, axis=1, kind="stable")[:, :k]
        labels = params.y[order]
        for i, row in enumerate(labels):
            scores[start + i] = np.bincount(row, minlength=n_classes) / k
    return scores

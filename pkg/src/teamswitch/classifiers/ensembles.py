"""Bagged forests and extremely randomized trees over the flat-tree core.

Every tree gets an independent generator spawned from the master seed, so
results are reproducible regardless of training order. Ensemble probabilities
are vote shares: the fraction of trees whose leaf predicts each class.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .tree import FlatTree, build_classification_tree


@dataclass
class ForestParams:
    trees: list[FlatTree]

    def to_jsonable(self) -> dict:
        return {"trees": [t.to_jsonable() for t in self.trees]}

    @classmethod
    def from_jsonable(cls, payload: dict) -> "ForestParams":
        return cls([FlatTree.from_jsonable(t) for t in payload["trees"]])


def _feature_subset_size(d: int, max_features: int | None) -> int:
    if max_features is None:
        return max(1, math.isqrt(d - 1) + 1) if d > 1 else 1
    return min(max_features, d)


def fit_random_forest(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    n_trees: int,
    max_depth: int | None,
    max_features: int | None,
    bootstrap: bool,
    seed: int,
) -> ForestParams:
    n, d = X.shape
    subset = _feature_subset_size(d, max_features)
    trees: list[FlatTree] = []
    for child in np.random.SeedSequence(seed).spawn(n_trees):
        rng = np.random.default_rng(child)
        if bootstrap:
            rows = rng.integers(0, n, size=n)
            Xb, yb = X[rows], y[rows]
        else:
            Xb, yb = X, y
        trees.append(build_classification_tree(
            Xb, yb, n_classes,
            max_depth=max_depth,
            max_features=subset if subset < d else None,
            rng=rng,
        ))
    return ForestParams(trees)


def fit_extra_trees(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    n_trees: int,
    max_depth: int | None,
    max_features: int | None,
    seed: int,
) -> ForestParams:
    """Extremely randomized trees: uniform-random thresholds per candidate
    feature, best of those kept; the whole sample is used (no bagging)."""
    d = X.shape[1]
    subset = _feature_subset_size(d, max_features)
    trees: list[FlatTree] = []
    for child in np.random.SeedSequence(seed).spawn(n_trees):
        rng = np.random.default_rng(child)
        trees.append(build_classification_tree(
            X, y, n_classes,
            max_depth=max_depth,
            max_features=subset,
            rng=rng,
            random_thresholds=True,
        ))
    return ForestParams(trees)


def vote_scores(params: ForestParams, X: np.ndarray, n_classes: int) -> np.ndarray:
    """Fraction of trees voting for each class, per row."""
    votes = np.zeros((len(X), n_classes))
    rows = np.arange(len(X))
    for tree in params.trees:
        votes[rows, tree.predict_class(X)] += 1.0
    return votes / len(params.trees)

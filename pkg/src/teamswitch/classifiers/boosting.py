"""Boosted ensembles: multiclass adaptive boosting on stumps and additive
regression trees on the softmax loss.

Adaptive boosting follows the discrete multiclass recipe whose stage weight is
ln((1-eps)/eps) + ln(K-1); a stage with weighted error at or above the
K-class random level stops the run. The gradient booster fits one depth-
limited regression tree per class per round to the first/second-order
statistics of the softmax cross-entropy (g = p - y, h = p(1 - p)), with
shrinkage and an L2 leaf penalty.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .tree import FlatTree, build_classification_tree, build_regression_tree


def samme_stump_weight(error: float, n_classes: int) -> float:
    """Stage weight for weighted error ``error`` in a K-class problem."""
    return math.log((1.0 - error) / error) + math.log(n_classes - 1)


@dataclass
class AdaBoostParams:
    stumps: list[FlatTree]
    alphas: list[float]
    weight_history: list[np.ndarray] = field(default_factory=list)

    def to_jsonable(self) -> dict:
        return {"stumps": [s.to_jsonable() for s in self.stumps],
                "alphas": list(self.alphas)}

    @classmethod
    def from_jsonable(cls, payload: dict) -> "AdaBoostParams":
        return cls([FlatTree.from_jsonable(s) for s in payload["stumps"]],
                   [float(a) for a in payload["alphas"]])


def fit_adaboost(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    n_stumps: int,
    track_weights: bool = False,
) -> AdaBoostParams:
    n = len(y)
    k_eff = len(np.unique(y))
    w = np.full(n, 1.0 / n)
    stumps: list[FlatTree] = []
    alphas: list[float] = []
    history: list[np.ndarray] = []
    for _ in range(n_stumps):
        stump = build_classification_tree(X, y, n_classes, weights=w, max_depth=1)
        pred = stump.predict_class(X)
        miss = pred != y
        error = float(w[miss].sum())
        if error <= 0.0:
            # perfect stump dominates; no reweighting is possible or needed
            stumps.append(stump)
            alphas.append(1.0)
            break
        if error >= 1.0 - 1.0 / k_eff:
            break
        alpha = samme_stump_weight(error, k_eff)
        stumps.append(stump)
        alphas.append(alpha)
        w = w * np.exp(alpha * miss)
        w = w / w.sum()
        if track_weights:
            history.append(w.copy())
    if not stumps:
        stumps.append(build_classification_tree(X, y, n_classes,
                                                weights=w, max_depth=1))
        alphas.append(1.0)
    return AdaBoostParams(stumps, alphas, history)


def adaboost_scores(params: AdaBoostParams, X: np.ndarray, n_classes: int) -> np.ndarray:
    """Stage-weight vote shares per class."""
    scores = np.zeros((len(X), n_classes))
    rows = np.arange(len(X))
    for stump, alpha in zip(params.stumps, params.alphas):
        scores[rows, stump.predict_class(X)] += alpha
    return scores / sum(params.alphas)


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


@dataclass
class GradientBoostParams:
    rounds: list[list[FlatTree]]  # rounds x classes
    loss_history: list[float] = field(default_factory=list)

    def to_jsonable(self) -> dict:
        return {"rounds": [[t.to_jsonable() for t in row] for row in self.rounds]}

    @classmethod
    def from_jsonable(cls, payload: dict) -> "GradientBoostParams":
        return cls([[FlatTree.from_jsonable(t) for t in row]
                    for row in payload["rounds"]])


def fit_gradient_boost(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    n_rounds: int,
    learning_rate: float,
    l2_leaf: float,
    max_depth: int,
) -> GradientBoostParams:
    n = len(y)
    Y = np.zeros((n, n_classes))
    Y[np.arange(n), y] = 1.0
    F = np.zeros((n, n_classes))
    rounds: list[list[FlatTree]] = []
    losses: list[float] = []
    for _ in range(n_rounds):
        P = softmax(F)
        losses.append(float(-np.log(P[np.arange(n), y]).mean()))
        stage: list[FlatTree] = []
        for k in range(n_classes):
            g = P[:, k] - Y[:, k]
            h = P[:, k] * (1.0 - P[:, k])
            tree = build_regression_tree(X, g, h, l2_leaf, max_depth,
                                         leaf_scale=learning_rate)
            F[:, k] += tree.predict_value(X)
            stage.append(tree)
        rounds.append(stage)
    P = softmax(F)
    losses.append(float(-np.log(P[np.arange(n), y]).mean()))
    return GradientBoostParams(rounds, losses)


def gradient_boost_scores(
    params: GradientBoostParams, X: np.ndarray, n_classes: int
) -> np.ndarray:
    F = np.zeros((len(X), n_classes))
    for stage in params.rounds:
        for k, tree in enumerate(stage):
            F[:, k] += tree.predict_value(X)
    return softmax(F)

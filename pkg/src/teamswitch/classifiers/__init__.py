"""Uniform train/predict interface over the six classifier families, with
current-team masking.

Every model predicts a distribution over the full team label space; masking
zeroes the current team and renormalizes (uniform over the other 29 teams if
nothing else has support), so a switcher is never predicted to stay put.
Fits are deterministic given (algorithm, data, seed); tree ensembles derive
one independent child seed per tree from the master seed.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from ..errors import DegenerateLabels, ManifestMismatch, NonFiniteFeature
from .boosting import (
    AdaBoostParams,
    GradientBoostParams,
    adaboost_scores,
    fit_adaboost,
    fit_gradient_boost,
    gradient_boost_scores,
    samme_stump_weight,
)
from .ensembles import ForestParams, fit_extra_trees, fit_random_forest, vote_scores
from .linear import SoftmaxParams, fit_softmax_regression, softmax_scores
from .neighbors import KNNParams, fit_knn, knn_scores
from .tree import FlatTree, build_classification_tree, gini_split

MODEL_FORMAT = "teamswitch-model/1"


class AlgorithmKind(str, Enum):
    DECISION_TREE = "tree"
    RANDOM_FOREST = "forest"
    EXTRA_TREES = "extra"
    ADABOOST = "ada"
    GRADIENT_BOOST = "xgb-like"
    SOFTMAX = "softmax"
    KNN = "knn"


_ALIASES = {
    "tree": AlgorithmKind.DECISION_TREE,
    "cart": AlgorithmKind.DECISION_TREE,
    "decision-tree": AlgorithmKind.DECISION_TREE,
    "forest": AlgorithmKind.RANDOM_FOREST,
    "rf": AlgorithmKind.RANDOM_FOREST,
    "random-forest": AlgorithmKind.RANDOM_FOREST,
    "extra": AlgorithmKind.EXTRA_TREES,
    "extra-trees": AlgorithmKind.EXTRA_TREES,
    "extratrees": AlgorithmKind.EXTRA_TREES,
    "ada": AlgorithmKind.ADABOOST,
    "adaboost": AlgorithmKind.ADABOOST,
    "xgb-like": AlgorithmKind.GRADIENT_BOOST,
    "xgb": AlgorithmKind.GRADIENT_BOOST,
    "gbm": AlgorithmKind.GRADIENT_BOOST,
    "gradient-boost": AlgorithmKind.GRADIENT_BOOST,
    "softmax": AlgorithmKind.SOFTMAX,
    "logistic": AlgorithmKind.SOFTMAX,
    "logreg": AlgorithmKind.SOFTMAX,
    "knn": AlgorithmKind.KNN,
}


@dataclass(frozen=True)
class Algorithm:
    """Algorithm tag plus its hyperparameters (each family reads its own)."""

    kind: AlgorithmKind
    n_trees: int = 500
    max_depth: int | None = None
    max_features: int | None = None
    bootstrap: bool = True
    learning_rate: float = 0.1
    l2_leaf: float = 1.0
    n_rounds: int = 200
    n_stumps: int = 300
    l2_penalty: float = 1e-3
    max_iter: int = 2000
    grad_tol: float = 1e-6
    k: int = 5

    def __post_init__(self):
        checks = [
            (self.n_trees >= 1, "n_trees >= 1"),
            (self.max_depth is None or self.max_depth >= 1, "max_depth >= 1"),
            (self.max_features is None or self.max_features >= 1, "max_features >= 1"),
            (self.learning_rate > 0, "learning_rate > 0"),
            (self.l2_leaf >= 0, "l2_leaf >= 0"),
            (self.n_rounds >= 1, "n_rounds >= 1"),
            (self.n_stumps >= 1, "n_stumps >= 1"),
            (self.l2_penalty >= 0, "l2_penalty >= 0"),
            (self.max_iter >= 1, "max_iter >= 1"),
            (self.grad_tol > 0, "grad_tol > 0"),
            (self.k >= 1, "k >= 1"),
        ]
        for ok, rule in checks:
            if not ok:
                raise ValueError(f"hyperparameter out of range: requires {rule}")

    @classmethod
    def create(cls, kind: "AlgorithmKind | str", **overrides) -> "Algorithm":
        """Build with per-family defaults (gradient boosting depth defaults
        to 6 where trees otherwise grow unlimited)."""
        if isinstance(kind, str):
            try:
                kind = _ALIASES[kind.strip().lower()]
            except KeyError:
                valid = ", ".join(sorted({k.value for k in AlgorithmKind}))
                raise ValueError(f"unknown algorithm {kind!r}; expected one of {valid}") from None
        if kind is AlgorithmKind.GRADIENT_BOOST and "max_depth" not in overrides:
            overrides["max_depth"] = 6
        return cls(kind=kind, **overrides)

    @property
    def name(self) -> str:
        return self.kind.value

    def to_jsonable(self) -> dict:
        payload = {"kind": self.kind.value}
        for f in fields(self):
            if f.name != "kind":
                payload[f.name] = getattr(self, f.name)
        return payload

    @classmethod
    def from_jsonable(cls, payload: dict) -> "Algorithm":
        data = dict(payload)
        kind = AlgorithmKind(data.pop("kind"))
        return cls(kind=kind, **data)


def parse_algorithms(spec: str, **overrides) -> list[Algorithm]:
    """Parse a comma list of algorithm names like "xgb-like,forest"."""
    names = [token.strip() for token in spec.split(",") if token.strip()]
    if not names:
        raise ValueError("no algorithms given")
    return [Algorithm.create(name, **overrides) for name in names]


def manifest_fingerprint(manifest: Sequence[str]) -> str:
    joined = "".join(manifest)
    return hashlib.sha256(joined.encode("utf-8")).hexdigest()


@dataclass
class Model:
    algorithm: Algorithm
    classes: tuple[str, ...]
    seed: int
    fingerprint: str
    n_features: int
    params: object

    @property
    def n_classes(self) -> int:
        return len(self.classes)


def _validate_training(X: np.ndarray, y: np.ndarray) -> None:
    if len(X) == 0:
        raise DegenerateLabels("empty training set")
    if not np.isfinite(X).all():
        raise NonFiniteFeature("training matrix contains non-finite values")
    if len(np.unique(y)) < 2:
        raise DegenerateLabels("training labels must span at least two classes")


def fit(algorithm: Algorithm, data, seed: int, track_weights: bool = False) -> Model:
    """Train on a LabeledDataset. Deterministic given (algorithm, data, seed)."""
    X = np.ascontiguousarray(data.X, dtype=np.float64)
    y = np.asarray(data.y, dtype=np.int64)
    _validate_training(X, y)
    K = len(data.teams)
    alg = algorithm
    kind = alg.kind
    if kind is AlgorithmKind.DECISION_TREE:
        params = build_classification_tree(
            X, y, K, max_depth=alg.max_depth, store_counts=True)
    elif kind is AlgorithmKind.RANDOM_FOREST:
        params = fit_random_forest(
            X, y, K, alg.n_trees, alg.max_depth, alg.max_features,
            alg.bootstrap, seed)
    elif kind is AlgorithmKind.EXTRA_TREES:
        params = fit_extra_trees(
            X, y, K, alg.n_trees, alg.max_depth, alg.max_features, seed)
    elif kind is AlgorithmKind.ADABOOST:
        params = fit_adaboost(X, y, K, alg.n_stumps, track_weights=track_weights)
    elif kind is AlgorithmKind.GRADIENT_BOOST:
        depth = alg.max_depth if alg.max_depth is not None else 6
        params = fit_gradient_boost(
            X, y, K, alg.n_rounds, alg.learning_rate, alg.l2_leaf, depth)
    elif kind is AlgorithmKind.SOFTMAX:
        params = fit_softmax_regression(
            X, y, K, alg.l2_penalty, alg.max_iter, alg.grad_tol)
    else:
        params = fit_knn(X, y, alg.k)
    return Model(
        algorithm=alg,
        classes=tuple(data.teams),
        seed=seed,
        fingerprint=manifest_fingerprint(data.manifest),
        n_features=X.shape[1],
        params=params,
    )


def raw_scores(model: Model, X: np.ndarray) -> np.ndarray:
    kind = model.algorithm.kind
    K = model.n_classes
    if kind is AlgorithmKind.DECISION_TREE:
        counts = model.params.predict_counts(X)
        totals = counts.sum(axis=1, keepdims=True)
        return np.divide(counts, totals, out=np.zeros_like(counts), where=totals > 0)
    if kind in (AlgorithmKind.RANDOM_FOREST, AlgorithmKind.EXTRA_TREES):
        return vote_scores(model.params, X, K)
    if kind is AlgorithmKind.ADABOOST:
        return adaboost_scores(model.params, X, K)
    if kind is AlgorithmKind.GRADIENT_BOOST:
        return gradient_boost_scores(model.params, X, K)
    if kind is AlgorithmKind.SOFTMAX:
        return softmax_scores(model.params, X)
    return knn_scores(model.params, X, K)


def mask_distribution(scores: np.ndarray, mask_idx: np.ndarray) -> np.ndarray:
    """Zero the masked class per row and renormalize; rows with no remaining
    support become uniform over the unmasked classes."""
    P = np.array(scores, dtype=np.float64, copy=True)
    rows = np.arange(len(P))
    P[rows, mask_idx] = 0.0
    totals = P.sum(axis=1)
    dead = totals <= 0.0
    if dead.any():
        K = P.shape[1]
        P[dead] = 1.0 / (K - 1)
        P[rows[dead], mask_idx[dead]] = 0.0
        totals = P.sum(axis=1)
    return P / totals[:, None]


def _check_manifest(model: Model, X: np.ndarray, manifest) -> None:
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ManifestMismatch(
            f"expected {model.n_features} feature columns, got {X.shape}")
    if manifest is not None and manifest_fingerprint(manifest) != model.fingerprint:
        raise ManifestMismatch("feature manifest differs from the training manifest")


def predict_proba_batch(
    model: Model, X: np.ndarray, mask_idx: np.ndarray, manifest=None
) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    _check_manifest(model, X, manifest)
    return mask_distribution(raw_scores(model, X), np.asarray(mask_idx))


def predict_batch(
    model: Model, X: np.ndarray, mask_idx: np.ndarray, manifest=None
) -> np.ndarray:
    """Masked argmax per row. Classes are stored in ascending code order, so
    the first maximum is the lexicographically smallest tied team."""
    P = predict_proba_batch(model, X, mask_idx, manifest)
    return np.argmax(P, axis=1)


def _mask_index(model: Model, mask: str) -> int:
    try:
        return model.classes.index(mask)
    except ValueError:
        raise ManifestMismatch(f"mask team {mask!r} not in model classes") from None


def predict_proba(model: Model, row, mask: str, manifest=None) -> dict[str, float]:
    X = np.asarray(row, dtype=np.float64).reshape(1, -1)
    P = predict_proba_batch(model, X, np.array([_mask_index(model, mask)]), manifest)
    return {team: float(p) for team, p in zip(model.classes, P[0])}


def predict(model: Model, row, mask: str, manifest=None) -> str:
    X = np.asarray(row, dtype=np.float64).reshape(1, -1)
    code = predict_batch(model, X, np.array([_mask_index(model, mask)]), manifest)
    return model.classes[int(code[0])]


_PARAM_CODECS = {
    AlgorithmKind.DECISION_TREE: FlatTree,
    AlgorithmKind.RANDOM_FOREST: ForestParams,
    AlgorithmKind.EXTRA_TREES: ForestParams,
    AlgorithmKind.ADABOOST: AdaBoostParams,
    AlgorithmKind.GRADIENT_BOOST: GradientBoostParams,
    AlgorithmKind.SOFTMAX: SoftmaxParams,
    AlgorithmKind.KNN: KNNParams,
}


def save_model(model: Model, path) -> None:
    """Versioned JSON snapshot sufficient for exact re-prediction."""
    payload = {
        "format": MODEL_FORMAT,
        "algorithm": model.algorithm.to_jsonable(),
        "classes": list(model.classes),
        "seed": model.seed,
        "fingerprint": model.fingerprint,
        "n_features": model.n_features,
        "params": model.params.to_jsonable(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True)
        fh.write("\n")


def load_model(path) -> Model:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format") != MODEL_FORMAT:
        raise ValueError(f"unsupported model format {payload.get('format')!r}")
    algorithm = Algorithm.from_jsonable(payload["algorithm"])
    codec = _PARAM_CODECS[algorithm.kind]
    return Model(
        algorithm=algorithm,
        classes=tuple(payload["classes"]),
        seed=int(payload["seed"]),
        fingerprint=payload["fingerprint"],
        n_features=int(payload["n_features"]),
        params=codec.from_jsonable(payload["params"]),
    )


__all__ = [
    "Algorithm",
    "AlgorithmKind",
    "FlatTree",
    "Model",
    "build_classification_tree",
    "fit",
    "gini_split",
    "load_model",
    "manifest_fingerprint",
    "mask_distribution",
    "parse_algorithms",
    "predict",
    "predict_batch",
    "predict_proba",
    "predict_proba_batch",
    "raw_scores",
    "samme_stump_weight",
    "save_model",
]

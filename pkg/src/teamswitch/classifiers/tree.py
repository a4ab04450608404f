"""Flat-array decision trees: the shared core under every tree-based family.

Trees are stored as parallel arrays (feature, threshold, left, right, payload)
so batch prediction is a vectorized level walk instead of per-row recursion.
Classification trees split on weighted Gini impurity with candidate thresholds
at midpoints between consecutive distinct values (or uniform-random thresholds
for the extremely-randomized variant). Regression trees split on the
second-order gain used by gradient boosting, with an L2 leaf penalty.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_EPS = 1e-12


@dataclass
class FlatTree:
    feature: np.ndarray  # int32, -1 at leaves
    threshold: np.ndarray  # float64
    left: np.ndarray  # int32
    right: np.ndarray  # int32
    leaf_class: np.ndarray  # int32, majority class (classification trees)
    leaf_value: np.ndarray  # float64, leaf score (regression trees)
    leaf_counts: np.ndarray | None = None  # (nodes, K) class weights, optional

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index for every row, via a vectorized level-by-level walk."""
        idx = np.zeros(len(X), dtype=np.int32)
        while True:
            feat = self.feature[idx]
            active = np.nonzero(feat >= 0)[0]
            if active.size == 0:
                return idx
            node = idx[active]
            go_left = X[active, feat[active]] <= self.threshold[node]
            idx[active] = np.where(go_left, self.left[node], self.right[node])

    def predict_class(self, X: np.ndarray) -> np.ndarray:
        return self.leaf_class[self.apply(X)]

    def predict_value(self, X: np.ndarray) -> np.ndarray:
        return self.leaf_value[self.apply(X)]

    def predict_counts(self, X: np.ndarray) -> np.ndarray:
        if self.leaf_counts is None:
            raise ValueError("tree was built without per-leaf class counts")
        return self.leaf_counts[self.apply(X)]

    def to_jsonable(self) -> dict:
        payload = {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "leaf_class": self.leaf_class.tolist(),
            "leaf_value": self.leaf_value.tolist(),
        }
        if self.leaf_counts is not None:
            payload["leaf_counts"] = self.leaf_counts.tolist()
        return payload

    @classmethod
    def from_jsonable(cls, payload: dict) -> "FlatTree":
        counts = payload.get("leaf_counts")
        return cls(
            feature=np.asarray(payload["feature"], dtype=np.int32),
            threshold=np.asarray(payload["threshold"], dtype=np.float64),
            left=np.asarray(payload["left"], dtype=np.int32),
            right=np.asarray(payload["right"], dtype=np.int32),
            leaf_class=np.asarray(payload["leaf_class"], dtype=np.int32),
            leaf_value=np.asarray(payload["leaf_value"], dtype=np.float64),
            leaf_counts=None if counts is None else np.asarray(counts, dtype=np.float64),
        )


def gini_impurity(counts: np.ndarray) -> float:
    """1 - sum(p_k^2) from a vector of (possibly weighted) class counts."""
    total = counts.sum()
    if total <= 0:
        return 0.0
    p = counts / total
    return float(1.0 - (p * p).sum())


def gini_split(X: np.ndarray, y: np.ndarray, feature: int, threshold: float,
               weights: np.ndarray | None = None) -> float:
    """Impurity decrease of splitting the given rows at x[feature] <= threshold.
    A split leaving one side empty decreases nothing."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    w = np.ones(len(y)) if weights is None else np.asarray(weights, dtype=np.float64)
    K = int(y.max()) + 1 if len(y) else 1
    parent = np.bincount(y, weights=w, minlength=K)
    left = X[:, feature] <= threshold
    if not left.any() or left.all():
        return 0.0
    lc = np.bincount(y[left], weights=w[left], minlength=K)
    rc = parent - lc
    wl, wr, wt = lc.sum(), rc.sum(), parent.sum()
    child = (wl * gini_impurity(lc) + wr * gini_impurity(rc)) / wt
    return gini_impurity(parent) - child


def _scan_gini_midpoints(values, y_node, w_node, K):
    """Best midpoint threshold for one feature: returns (weighted child
    impurity, threshold) or None when the feature is constant."""
    order = np.argsort(values, kind="stable")
    vs = values[order]
    if vs[0] == vs[-1]:
        return None
    ys = y_node[order]
    ws = w_node[order]
    onehot = np.zeros((len(vs), K))
    onehot[np.arange(len(vs)), ys] = ws
    cum = np.cumsum(onehot, axis=0)
    total = cum[-1]
    w_total = total.sum()
    cuts = np.nonzero(vs[:-1] < vs[1:])[0]
    WL = cum[cuts]
    wl = WL.sum(axis=1)
    WR = total - WL
    wr = w_total - wl
    with np.errstate(divide="ignore", invalid="ignore"):
        sl = np.where(wl > 0, (WL * WL).sum(axis=1) / wl, 0.0)
        sr = np.where(wr > 0, (WR * WR).sum(axis=1) / wr, 0.0)
    child = (wl - sl + wr - sr) / w_total
    best = int(np.argmin(child))
    threshold = (vs[cuts[best]] + vs[cuts[best] + 1]) / 2.0
    return float(child[best]), threshold


def _scan_gini_random(values, y_node, w_node, K, rng):
    """One uniform-random threshold for this feature, or None if constant."""
    lo = values.min()
    hi = values.max()
    if lo == hi:
        return None
    threshold = rng.uniform(lo, hi)
    left = values <= threshold
    lc = np.bincount(y_node[left], weights=w_node[left], minlength=K)
    rc = np.bincount(y_node[~left], weights=w_node[~left], minlength=K)
    wl, wr = lc.sum(), rc.sum()
    w_total = wl + wr
    child = (wl * gini_impurity(lc) + wr * gini_impurity(rc)) / w_total
    return float(child), float(threshold)


def build_classification_tree(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    weights: np.ndarray | None = None,
    max_depth: int | None = None,
    max_features: int | None = None,
    rng: np.random.Generator | None = None,
    random_thresholds: bool = False,
    store_counts: bool = False,
) -> FlatTree:
    """Grow a CART tree on weighted Gini impurity. ``max_features`` draws that
    many candidate features per node (all when None); ``random_thresholds``
    switches the per-feature scan to a single uniform draw."""
    n, d = X.shape
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=np.float64)
    if (max_features is not None or random_thresholds) and rng is None:
        raise ValueError("per-node feature sampling needs an rng")

    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    leaf_class: list[int] = []
    counts_store: list[np.ndarray] = []

    def new_node() -> int:
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        leaf_class.append(0)
        if store_counts:
            counts_store.append(np.zeros(n_classes))
        return len(feature) - 1

    root = new_node()
    stack: list[tuple[int, np.ndarray, int]] = [(root, np.arange(n), 0)]
    while stack:
        node, rows, depth = stack.pop()
        y_node = y[rows]
        w_node = w[rows]
        counts = np.bincount(y_node, weights=w_node, minlength=n_classes)
        leaf_class[node] = int(np.argmax(counts))
        if store_counts:
            counts_store[node] = counts
        pure = counts.max() >= counts.sum() - _EPS
        if pure or len(rows) < 2 or (max_depth is not None and depth >= max_depth):
            continue

        if max_features is not None and max_features < d:
            candidates = np.sort(rng.choice(d, size=max_features, replace=False))
        else:
            candidates = np.arange(d)
        parent_impurity = gini_impurity(counts)
        best: tuple[float, int, float] | None = None  # (child impurity, feature, threshold)
        for f in candidates:
            values = X[rows, f]
            if random_thresholds:
                scan = _scan_gini_random(values, y_node, w_node, n_classes, rng)
            else:
                scan = _scan_gini_midpoints(values, y_node, w_node, n_classes)
            if scan is not None and (best is None or scan[0] < best[0] - _EPS):
                best = (scan[0], int(f), scan[1])
        if best is None or parent_impurity - best[0] <= _EPS:
            continue
        _, f, t = best
        go_left = X[rows, f] <= t
        left_id = new_node()
        right_id = new_node()
        feature[node] = f
        threshold[node] = t
        left[node] = left_id
        right[node] = right_id
        stack.append((right_id, rows[~go_left], depth + 1))
        stack.append((left_id, rows[go_left], depth + 1))

    return FlatTree(
        feature=np.asarray(feature, dtype=np.int32),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int32),
        right=np.asarray(right, dtype=np.int32),
        leaf_class=np.asarray(leaf_class, dtype=np.int32),
        leaf_value=np.zeros(len(feature)),
        leaf_counts=np.vstack(counts_store) if store_counts else None,
    )


def _scan_grad_midpoints(values, g_node, h_node, lam):
    """Best midpoint threshold by second-order gain for one feature."""
    order = np.argsort(values, kind="stable")
    vs = values[order]
    if vs[0] == vs[-1]:
        return None
    gs = np.cumsum(g_node[order])
    hs = np.cumsum(h_node[order])
    G, H = gs[-1], hs[-1]
    cuts = np.nonzero(vs[:-1] < vs[1:])[0]
    GL = gs[cuts]
    HL = hs[cuts]
    GR = G - GL
    HR = H - HL
    gain = 0.5 * (GL * GL / (HL + lam) + GR * GR / (HR + lam) - G * G / (H + lam))
    best = int(np.argmax(gain))
    thr = (vs[cuts[best]] + vs[cuts[best] + 1]) / 2.0
    return float(gain[best]), thr


def build_regression_tree(
    X: np.ndarray,
    g: np.ndarray,
    h: np.ndarray,
    lam: float,
    max_depth: int,
    leaf_scale: float = 1.0,
) -> FlatTree:
    """Second-order-gain regression tree used by gradient boosting. Leaves
    carry the regularized Newton value -G/(H + lam), scaled by ``leaf_scale``
    (the shrinkage)."""
    n, d = X.shape
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    leaf_value: list[float] = []

    def new_node() -> int:
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        leaf_value.append(0.0)
        return len(feature) - 1

    root = new_node()
    stack: list[tuple[int, np.ndarray, int]] = [(root, np.arange(n), 0)]
    while stack:
        node, rows, depth = stack.pop()
        G = g[rows].sum()
        H = h[rows].sum()
        leaf_value[node] = leaf_scale * (-G / (H + lam))
        if len(rows) < 2 or depth >= max_depth:
            continue
        best: tuple[float, int, float] | None = None  # (gain, feature, threshold)
        for f in range(d):
            scan = _scan_grad_midpoints(X[rows, f], g[rows], h[rows], lam)
            if scan is not None and (best is None or scan[0] > best[0] + _EPS):
                best = (scan[0], f, scan[1])
        if best is None or best[0] <= _EPS:
            continue
        _, f, t = best
        go_left = X[rows, f] <= t
        left_id = new_node()
        right_id = new_node()
        feature[node] = f
        threshold[node] = t
        left[node] = left_id
        right[node] = right_id
        stack.append((right_id, rows[~go_left], depth + 1))
        stack.append((left_id, rows[go_left], depth + 1))

    return FlatTree(
        feature=np.asarray(feature, dtype=np.int32),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int32),
        right=np.asarray(right, dtype=np.int32),
        leaf_class=np.zeros(len(feature), dtype=np.int32),
        leaf_value=np.asarray(leaf_value, dtype=np.float64),
    )

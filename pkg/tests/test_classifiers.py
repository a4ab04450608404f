"""The six classifier families: fit quality, masking, determinism, codecs."""

import math
from dataclasses import dataclass

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as npst

from teamswitch.classifiers import (
    Algorithm,
    AlgorithmKind,
    fit,
    load_model,
    manifest_fingerprint,
    mask_distribution,
    parse_algorithms,
    predict,
    predict_batch,
    predict_proba,
    predict_proba_batch,
    raw_scores,
    samme_stump_weight,
    save_model,
)
from teamswitch.classifiers.linear import softmax_loss_and_grad
from teamswitch.classifiers.tree import gini_impurity, gini_split
from teamswitch.errors import DegenerateLabels, ManifestMismatch, NonFiniteFeature


@dataclass
class Data:
    """Minimal stand-in for a labeled dataset: just what fit() reads."""

    X: np.ndarray
    y: np.ndarray
    teams: tuple
    manifest: tuple


def blobs(n_per=40, n_classes=4, d=3, noise=0.5, seed=0):
    rng = np.random.default_rng(seed)
    centers = 6.0 * rng.normal(size=(n_classes, d))
    X = np.vstack([centers[k] + noise * rng.normal(size=(n_per, d))
                   for k in range(n_classes)])
    y = np.repeat(np.arange(n_classes), n_per)
    perm = rng.permutation(len(y))
    return Data(X[perm], y[perm],
                tuple(f"T{i:02d}" for i in range(n_classes)),
                tuple(f"f{j}" for j in range(d)))


SMALL = [
    Algorithm.create("tree"),
    Algorithm.create("forest", n_trees=20),
    Algorithm.create("extra", n_trees=20),
    Algorithm.create("ada", n_stumps=60),
    Algorithm.create("xgb-like", n_rounds=15),
    Algorithm.create("softmax", max_iter=300),
    Algorithm.create("knn", k=3),
]

ids = [a.name for a in SMALL]


class TestAlgorithmConfig:
    def test_aliases_cover_all_families(self):
        algos = parse_algorithms("cart,rf,extratrees,adaboost,gbm,logistic,knn")
        assert [a.kind for a in algos] == list(AlgorithmKind)

    def test_unknown_name(self):
        with pytest.raises(ValueError, match="unknown algorithm"):
            parse_algorithms("tree,svm")
        with pytest.raises(ValueError, match="no algorithms"):
            parse_algorithms(" , ")

    @pytest.mark.parametrize("bad", [
        {"n_trees": 0}, {"k": 0}, {"learning_rate": 0.0}, {"max_depth": 0},
        {"n_rounds": -1}, {"grad_tol": 0.0}, {"l2_penalty": -0.1},
    ])
    def test_hyperparameter_validation(self, bad):
        with pytest.raises(ValueError, match="hyperparameter out of range"):
            Algorithm.create("forest", **bad)

    def test_gradient_boost_depth_default(self):
        assert Algorithm.create("xgb-like").max_depth == 6
        assert Algorithm.create("xgb-like", max_depth=2).max_depth == 2
        assert Algorithm.create("tree").max_depth is None

    def test_jsonable_round_trip(self):
        alg = Algorithm.create("knn", k=9)
        assert Algorithm.from_jsonable(alg.to_jsonable()) == alg


class TestFitPredict:
    @pytest.mark.parametrize("alg", [a for a in SMALL if a.name != "ada"],
                             ids=[i for i in ids if i != "ada"])
    def test_learns_separable_blobs(self, alg):
        data = blobs()
        model = fit(alg, data, seed=11)
        train_acc = float((raw_scores(model, data.X).argmax(axis=1) == data.y).mean())
        assert train_acc >= 0.9, f"{alg.name}: train accuracy {train_acc:.3f}"

    def test_boosting_lifts_weak_stumps(self):
        # positive class = middle third of the line: one cut cannot express
        # it, so the boost must combine stumps to get there
        rng = np.random.default_rng(0)
        x = rng.uniform(0, 3, size=240)
        y = ((x > 1) & (x < 2)).astype(np.int64)
        data = Data(x[:, None], y, ("T00", "T01"), ("f0",))
        one = fit(Algorithm.create("ada", n_stumps=1), data, seed=1)
        many = fit(Algorithm.create("ada", n_stumps=15), data, seed=1)
        acc = lambda m: float((raw_scores(m, data.X).argmax(axis=1) == data.y).mean())
        assert acc(one) < 1.0
        assert acc(many) == 1.0

    @pytest.mark.parametrize("alg", SMALL, ids=ids)
    def test_masking_the_truth_forces_another_answer(self, alg):
        data = blobs()
        model = fit(alg, data, seed=11)
        preds = predict_batch(model, data.X, mask_idx=data.y)
        assert np.all(preds != data.y)

    @pytest.mark.parametrize("alg", SMALL, ids=ids)
    def test_masked_distributions_are_proper(self, alg):
        data = blobs()
        model = fit(alg, data, seed=11)
        mask = np.zeros(len(data.X), dtype=np.int64)
        P = predict_proba_batch(model, data.X, mask)
        assert P.shape == (len(data.X), 4)
        assert np.all(P >= 0)
        assert np.allclose(P.sum(axis=1), 1.0, atol=1e-9)
        assert np.all(P[:, 0] == 0.0)

    @pytest.mark.parametrize("alg", SMALL, ids=ids)
    def test_same_seed_same_model(self, alg):
        data = blobs(noise=2.5, seed=3)
        probe = blobs(n_per=10, noise=2.5, seed=4).X
        a = raw_scores(fit(alg, data, seed=77), probe)
        b = raw_scores(fit(alg, data, seed=77), probe)
        assert np.array_equal(a, b)

    @pytest.mark.parametrize("name", ["forest", "extra"])
    def test_randomized_families_vary_with_seed(self, name):
        alg = Algorithm.create(name, n_trees=15)
        data = blobs(noise=3.0, seed=5)
        a = raw_scores(fit(alg, data, seed=1), data.X)
        b = raw_scores(fit(alg, data, seed=2), data.X)
        assert not np.array_equal(a, b)

    def test_degenerate_training_sets_raise(self):
        one_class = Data(np.zeros((5, 2)), np.zeros(5, dtype=np.int64),
                         ("A", "B"), ("f0", "f1"))
        with pytest.raises(DegenerateLabels):
            fit(Algorithm.create("tree"), one_class, seed=0)
        empty = Data(np.zeros((0, 2)), np.zeros(0, dtype=np.int64),
                     ("A", "B"), ("f0", "f1"))
        with pytest.raises(DegenerateLabels):
            fit(Algorithm.create("tree"), empty, seed=0)

    def test_non_finite_features_raise(self):
        data = blobs()
        data.X[3, 1] = np.nan
        with pytest.raises(NonFiniteFeature):
            fit(Algorithm.create("tree"), data, seed=0)

    def test_constant_features_fall_back_to_prior(self):
        data = Data(np.ones((6, 2)), np.array([0, 0, 0, 1, 1, 2]),
                    ("A", "B", "C"), ("f0", "f1"))
        model = fit(Algorithm.create("tree"), data, seed=0)
        scores = raw_scores(model, np.ones((2, 2)))
        assert np.allclose(scores, [[0.5, 1 / 3, 1 / 6]] * 2)


class TestMasking:
    def test_zero_and_renormalize(self):
        P = mask_distribution(np.array([[0.5, 0.3, 0.2]]), np.array([0]))
        assert np.allclose(P, [[0.0, 0.6, 0.4]])

    def test_dead_row_becomes_uniform_over_the_rest(self):
        P = mask_distribution(np.array([[1.0, 0.0, 0.0]]), np.array([0]))
        assert np.allclose(P, [[0.0, 0.5, 0.5]])

    @given(
        scores=npst.arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(2, 8)),
                           elements=st.floats(0, 1, allow_nan=False)),
        data=st.data(),
    )
    def test_masked_rows_are_distributions(self, scores, data):
        n, k = scores.shape
        mask = np.asarray(data.draw(
            st.lists(st.integers(0, k - 1), min_size=n, max_size=n)))
        P = mask_distribution(scores, mask)
        assert np.all(P[np.arange(n), mask] == 0.0)
        assert np.all(P >= 0)
        assert np.allclose(P.sum(axis=1), 1.0, atol=1e-9)


@pytest.fixture(scope="module")
def model():
    return fit(Algorithm.create("knn", k=3), blobs(), seed=0)


class TestPredictFrontend:
    def test_proba_dict(self, model):
        row = blobs().X[0]
        probs = predict_proba(model, row, mask="T00")
        assert set(probs) == set(model.classes)
        assert probs["T00"] == 0.0
        assert sum(probs.values()) == pytest.approx(1.0)

    def test_predict_returns_team_code(self, model):
        row = blobs().X[0]
        assert predict(model, row, mask="T01") in model.classes
        assert predict(model, row, mask="T01") != "T01"

    def test_manifest_checks(self, model):
        row = blobs().X[0]
        with pytest.raises(ManifestMismatch):
            predict(model, row[:2], mask="T01")
        with pytest.raises(ManifestMismatch):
            predict(model, row, mask="T01", manifest=("other", "columns", "here"))
        with pytest.raises(ManifestMismatch):
            predict(model, row, mask="NOPE")
        assert predict(model, row, mask="T01", manifest=("f0", "f1", "f2"))

    def test_tied_scores_pick_lowest_class_index(self):
        data = Data(np.array([[0.0], [1.0]]), np.array([0, 2]),
                    ("AAA", "BBB", "CCC"), ("f0",))
        model = fit(Algorithm.create("knn", k=2), data, seed=0)
        # query equidistant from both training rows: scores tie at 1/2
        scores = raw_scores(model, np.array([[0.5]]))
        assert np.allclose(scores, [[0.5, 0.0, 0.5]])
        assert predict(model, [0.5], mask="BBB") == "AAA"


class TestSerialization:
    @pytest.mark.parametrize("alg", SMALL, ids=ids)
    def test_round_trip_reproduces_scores(self, alg, tmp_path):
        data = blobs(seed=9)
        probe = blobs(n_per=7, seed=10).X
        model = fit(alg, data, seed=42)
        path = tmp_path / "model.json"
        save_model(model, path)
        loaded = load_model(path)
        assert loaded.algorithm == model.algorithm
        assert loaded.classes == model.classes
        assert loaded.seed == model.seed
        assert loaded.fingerprint == model.fingerprint == manifest_fingerprint(data.manifest)
        assert loaded.n_features == model.n_features
        assert np.array_equal(raw_scores(loaded, probe), raw_scores(model, probe))

    def test_unknown_format_rejected(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text('{"format": "something-else/9"}', encoding="utf-8")
        with pytest.raises(ValueError, match="unsupported model format"):
            load_model(path)


class TestComponentMath:
    def test_gini_impurity(self):
        assert gini_impurity(np.array([2.0, 2.0])) == pytest.approx(0.5)
        assert gini_impurity(np.array([4.0, 0.0])) == 0.0
        assert gini_impurity(np.array([0.0, 0.0])) == 0.0
        assert gini_impurity(np.array([1.0, 1.0, 1.0])) == pytest.approx(2 / 3)

    def test_gini_split_decrease(self):
        X = np.array([[1.0], [2.0], [3.0], [4.0]])
        y = np.array([0, 0, 1, 1])
        assert gini_split(X, y, 0, 2.5) == pytest.approx(0.5)
        assert gini_split(X, y, 0, 1.5) == pytest.approx(0.5 - 3 / 4 * (1 - 5 / 9))
        assert gini_split(X, y, 0, 0.5) == 0.0  # empty side
        assert gini_split(X, y, 0, 9.0) == 0.0

    def test_stage_weight_formula(self):
        assert samme_stump_weight(0.25, 29) == pytest.approx(math.log(84.0))
        assert samme_stump_weight(0.5, 2) == pytest.approx(0.0)

    def test_adaboost_weight_history_stays_a_distribution(self):
        data = blobs(noise=3.0)
        model = fit(Algorithm.create("ada", n_stumps=25), data, seed=0,
                    track_weights=True)
        history = model.params.weight_history
        assert history
        for w in history:
            assert np.all(w > 0)
            assert w.sum() == pytest.approx(1.0, abs=1e-12)

    def test_gradient_boost_loss_decreases(self):
        data = blobs(noise=1.5)
        model = fit(Algorithm.create("xgb-like", n_rounds=12, learning_rate=0.3),
                    data, seed=0)
        losses = model.params.loss_history
        assert len(losses) == 13
        assert all(b < a for a, b in zip(losses, losses[1:]))

    def test_softmax_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(12, 4))
        y = rng.integers(0, 3, size=12)
        Y = np.zeros((12, 3))
        Y[np.arange(12), y] = 1.0
        W = rng.normal(size=(4, 3))
        _, grad = softmax_loss_and_grad(W, X, Y, l2=0.1)
        eps = 1e-6
        for idx in [(0, 0), (1, 2), (3, 1), (2, 2)]:
            bumped = W.copy()
            bumped[idx] += eps
            up, _ = softmax_loss_and_grad(bumped, X, Y, l2=0.1)
            bumped[idx] -= 2 * eps
            down, _ = softmax_loss_and_grad(bumped, X, Y, l2=0.1)
            assert grad[idx] == pytest.approx((up - down) / (2 * eps), rel=1e-5)

    def test_softmax_fit_loss_monotone(self):
        data = blobs()
        model = fit(Algorithm.create("softmax", max_iter=200), data, seed=0)
        losses = model.params.loss_history
        assert losses and all(b <= a for a, b in zip(losses, losses[1:]))


class TestForestEquivalence:
    def test_single_unbagged_full_feature_tree_equals_cart(self):
        data = blobs(noise=2.0, seed=21)
        probe = blobs(n_per=15, noise=2.0, seed=22).X
        forest = fit(Algorithm.create("forest", n_trees=1, bootstrap=False,
                                      max_features=data.X.shape[1]), data, seed=5)
        cart = fit(Algorithm.create("tree"), data, seed=5)
        mask = np.zeros(len(probe), dtype=np.int64)
        assert np.array_equal(predict_batch(forest, probe, mask),
                              predict_batch(cart, probe, mask))

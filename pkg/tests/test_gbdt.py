import numpy as np
import pytest

from inds.gbdt import GbdtParams, load_model, predict_proba, save_model, train_gbdt
from inds.metrics import class_weights


def separable_toy(n=20, seed=0):
    rng = np.random.default_rng(seed)
    y = np.repeat([0, 1], n // 2)
    x = rng.standard_normal((n, 2)) * 0.2
    x[:, 0] += y * 2.0  # margin well above the noise
    return x, y


class TestTraining:
    def test_separable_training_accuracy(self):
        x, y = separable_toy()
        params = GbdtParams(num_trees=50, learning_rate=0.3, max_leaves=7, min_samples_leaf=1)
        model = train_gbdt(x, y, None, params, seed=0)
        pred = (predict_proba(model, x) >= 0.5).astype(int)
        assert (pred == y).mean() == 1.0

    def test_zero_trees_constant_prior(self):
        x, y = separable_toy()
        w = class_weights(y, m=1.0)
        model = train_gbdt(x, y, w, GbdtParams(num_trees=0), seed=0)
        proba = predict_proba(model, x)
        prior = (w * y).sum() / w.sum()
        assert np.allclose(proba, prior)

    def test_duplication_invariance(self):
        x, y = separable_toy(n=24, seed=3)
        params = GbdtParams(
            num_trees=20, learning_rate=0.2, max_leaves=7,
            min_samples_leaf=1, l2_reg=0.0,
        )
        a = train_gbdt(x, y, None, params, seed=5)
        b = train_gbdt(np.tile(x, (2, 1)), np.tile(y, 2), None, params, seed=5)
        assert np.allclose(predict_proba(a, x), predict_proba(b, x))

    def test_weight_scale_invariance(self):
        x, y = separable_toy(n=30, seed=4)
        w = class_weights(y, m=1.3)
        params = GbdtParams(num_trees=25, max_leaves=7, min_samples_leaf=2, l2_reg=0.5)
        a = train_gbdt(x, y, w, params, seed=2)
        b = train_gbdt(x, y, 1000.0 * w, params, seed=2)
        assert np.allclose(predict_proba(a, x), predict_proba(b, x))

    def test_deterministic_for_seed(self):
        rng = np.random.default_rng(7)
        x = rng.standard_normal((50, 6))
        y = (x[:, 0] + 0.2 * rng.standard_normal(50) > 0).astype(int)
        params = GbdtParams(num_trees=15, feature_fraction=0.7, bagging_fraction=0.8)
        a = train_gbdt(x, y, None, params, seed=9)
        b = train_gbdt(x, y, None, params, seed=9)
        assert np.array_equal(predict_proba(a, x), predict_proba(b, x))

    def test_empty_feature_set_rejected(self):
        with pytest.raises(ValueError):
            train_gbdt(np.zeros((10, 0)), np.repeat([0, 1], 5), None, GbdtParams())


class TestPrediction:
    def test_proba_bounds(self):
        x, y = separable_toy(n=40, seed=6)
        model = train_gbdt(x, y, None, GbdtParams(num_trees=30, learning_rate=0.5), seed=0)
        p = predict_proba(model, x)
        assert np.all(p >= 0) and np.all(p <= 1)

    def test_feature_count_mismatch(self):
        x, y = separable_toy()
        model = train_gbdt(x, y, None, GbdtParams(num_trees=2), seed=0)
        with pytest.raises(ValueError):
            predict_proba(model, np.zeros((3, 5)))

    def test_monotone_in_margin(self):
        x, y = separable_toy()
        model = train_gbdt(x, y, None, GbdtParams(num_trees=5), seed=0)
        before = predict_proba(model, x)
        # graft a tree with a single all-positive leaf
        from inds.gbdt import _Node

        model.trees.append([_Node(value=1.0)])
        after = predict_proba(model, x)
        assert np.all(after >= before)

    def test_save_load_roundtrip(self, tmp_path):
        x, y = separable_toy(n=30, seed=8)
        model = train_gbdt(x, y, None, GbdtParams(num_trees=10), seed=1,
                           feature_names=["a", "b"])
        p = tmp_path / "model.json"
        save_model(model, p)
        back = load_model(p)
        assert back.feature_names == ["a", "b"]
        assert np.allclose(predict_proba(back, x), predict_proba(model, x))

import numpy as np
import pytest

from clasmk.lssvm import (confidences, decision_scores, fit_lssvm, fit_lssvm_tuned,
                          predict, predict_labels, select_marginal)


class TestFit:
    def test_two_points_boundary_at_zero(self):
        F = np.array([[-1.0], [1.0]])
        y = np.array([0, 1])
        model = fit_lssvm(F, y, ridge=1e-10)
        scores = decision_scores(model, np.array([[0.0]]))[0]
        assert scores[0] == pytest.approx(scores[1], abs=1e-6)
        assert np.array_equal(predict_labels(model, F), y)

    def test_duplicate_columns_still_solvable(self):
        rng = np.random.default_rng(0)
        base = rng.normal(size=(30, 2))
        F = np.hstack([base, base])  # exactly collinear features
        y = (base[:, 0] > 0).astype(int)
        model = fit_lssvm(F, y, ridge=1e-3)
        assert np.all(np.isfinite(model.W))

    def test_constant_feature_with_bias(self):
        F = np.ones((10, 1))  # duplicates the bias column
        y = np.array([0, 1] * 5)
        model = fit_lssvm(F, y, ridge=1e-3)
        assert np.all(np.isfinite(model.W))

    def test_single_class_rejected(self):
        with pytest.raises(ValueError):
            fit_lssvm(np.zeros((5, 2)), np.zeros(5, dtype=int), ridge=1e-3)

    def test_nonpositive_ridge_rejected(self):
        with pytest.raises(ValueError):
            fit_lssvm(np.zeros((4, 2)), np.array([0, 1, 0, 1]), ridge=0.0)

    def test_separable_data_perfect_training_accuracy(self):
        rng = np.random.default_rng(1)
        F = np.vstack([rng.normal(loc=-3.0, size=(40, 2)), rng.normal(loc=3.0, size=(40, 2))])
        y = np.repeat([0, 1], 40)
        model = fit_lssvm(F, y, ridge=1e-6)
        assert np.mean(predict_labels(model, F) == y) == 1.0

    def test_normal_equation_residual(self):
        rng = np.random.default_rng(2)
        F = rng.normal(size=(50, 8))
        y = rng.integers(0, 3, size=50)
        model = fit_lssvm(F, y, ridge=1e-2)
        n, q = F.shape
        G = np.hstack([F, np.ones((n, 1))])
        Y = np.where(y[:, None] == np.arange(3)[None, :], 1.0, -1.0)
        M = G.T @ G + 1e-2 * np.diag([1.0] * q + [0.0])
        theta = np.vstack([model.W, model.b])
        resid = np.linalg.norm(M @ theta - G.T @ Y)
        assert resid <= 1e-8 * np.linalg.norm(G.T @ Y)


class TestPredict:
    def _model(self, W, b):
        from clasmk.lssvm import LinearModel

        return LinearModel(np.asarray(W, dtype=float), np.asarray(b, dtype=float), 1e-3)

    def test_scores_label_confidence(self):
        model = self._model(np.eye(3), [0.0, 0.0, 0.0])
        pred = predict(model, [2.0, -1.0, -3.0])
        assert pred.label == 0
        assert pred.confidence == pytest.approx(1.5)
        assert pred.scores == pytest.approx([2.0, -1.0, -3.0])

    def test_tie_gives_lowest_index_and_zero_confidence(self):
        model = self._model(np.zeros((2, 2)), [0.7, 0.7])
        pred = predict(model, [1.0, 1.0])
        assert pred.label == 0
        assert pred.confidence == 0.0

    def test_zero_weights_constant_class(self):
        model = self._model(np.zeros((2, 2)), [1.0, 0.0])
        rng = np.random.default_rng(3)
        for _ in range(5):
            assert predict(model, rng.normal(size=2)).label == 0

    def test_shift_invariance(self):
        model = self._model(np.eye(3), [0.0, 0.0, 0.0])
        x = np.array([0.3, -0.2, 0.9])
        p0 = predict(model, x)
        shifted = self._model(np.eye(3), [5.0, 5.0, 5.0])
        p1 = predict(shifted, x)
        assert p0.label == p1.label
        assert p0.confidence == pytest.approx(p1.confidence)

    def test_dimension_mismatch(self):
        model = self._model(np.eye(3), [0.0, 0.0, 0.0])
        with pytest.raises(ValueError):
            predict(model, [1.0, 2.0])


class TestMarginal:
    def test_all_zero_confidence_selected(self):
        assert select_marginal(np.zeros(4), 1.0).tolist() == [0, 1, 2, 3]

    def test_high_confidence_empty(self):
        assert select_marginal(np.full(3, 2.0), 1.0).tolist() == []

    def test_boundary_inclusive(self):
        assert select_marginal(np.array([0.5, 1.0, 1.5]), 1.0).tolist() == [0, 1]

    def test_threshold_domain(self):
        with pytest.raises(ValueError):
            select_marginal(np.zeros(2), 0.0)


class TestTuned:
    def test_picks_reasonable_ridge(self):
        rng = np.random.default_rng(4)
        F = np.vstack([rng.normal(loc=-1.0, size=(60, 3)), rng.normal(loc=1.0, size=(60, 3))])
        y = np.repeat([0, 1], 60)
        model = fit_lssvm_tuned(F, y, (1e-4, 1e-2, 1.0), seed=0)
        assert model.ridge in (1e-4, 1e-2, 1.0)
        assert np.mean(predict_labels(model, F) == y) > 0.9


def test_confidences_vectorized_matches_predict():
    rng = np.random.default_rng(5)
    scores = rng.normal(size=(20, 4))
    kappas = confidences(scores)
    for row, k in zip(scores, kappas):
        top2 = np.sort(row)[-2:]
        assert k == pytest.approx(0.5 * (top2[1] - top2[0]))

import numpy as np
import pytest

from clasmk.embedding import embed_points, embedding_dim
from clasmk.hierarchy import (HierarchyHyper, embed_full, embed_layer, train_hierarchy)
from clasmk.kernels import KernelSet, clasmk_eval
from clasmk.lssvm import predict_labels
from clasmk.synth import blobs, moons
from clasmk.weights import ClasmkHyper, OptimizeOptions, WeightMatrix, train_clasmk

KS2 = KernelSet.parse(["rbf:1", "poly:2"])


def small_problem(seed=0, n=40):
    return blobs([[1.5, 0.0], [-1.5, 0.0]], n, 0.5, seed)


class TestEmbedding:
    def test_one_hot_row_is_exact_projection(self):
        from clasmk.subspace import fit_bank, project_many

        X, y = small_problem(0)
        bank = fit_bank(X, y, KS2, seed=0)
        nu = np.array([[1.0, 0.0], [0.0, 1.0]])
        E = embed_points(bank, nu, X[:5])
        r0 = bank.get(0, 0).rank
        assert np.allclose(E[:, :r0], project_many(bank.get(0, 0), X[:5]))
        assert np.allclose(E[:, r0:], project_many(bank.get(1, 1), X[:5]))

    def test_far_point_embeds_to_zero(self):
        from clasmk.subspace import fit_bank

        X, y = small_problem(1)
        bank = fit_bank(X, y, KernelSet.parse(["rbf:0.01"]), seed=1)
        nu = np.ones((2, 1))
        E = embed_points(bank, nu, np.array([[500.0, 500.0]]))
        assert np.allclose(E, 0.0, atol=1e-12)

    def test_dot_product_matches_composite_kernel(self):
        from clasmk.subspace import fit_bank

        X, y = small_problem(2)
        bank = fit_bank(X, y, KS2, seed=2)
        rng = np.random.default_rng(3)
        nu = WeightMatrix(rng.dirichlet(np.ones(2), size=2)).nu
        a, b = rng.normal(size=2), rng.normal(size=2)
        ea = embed_points(bank, nu, a[None, :])[0]
        eb = embed_points(bank, nu, b[None, :])[0]
        assert clasmk_eval(a, b, bank, nu) == pytest.approx(float(ea @ eb), abs=1e-10)


class TestTrainHierarchy:
    def test_single_layer_equals_flat_training(self):
        X, y = small_problem(4, n=60)
        hyper = HierarchyHyper(L_max=1, clasmk=ClasmkHyper(split_seed=4))
        model = train_hierarchy(X, y, KS2, hyper)
        assert model.n_layers == 1
        # same weight matrix as a direct flat run with the layer-1 derived seed
        from clasmk.hierarchy import _layer_hyper

        flat = train_clasmk(X, y, KS2, _layer_hyper(hyper.clasmk, 1))
        assert np.array_equal(model.layers[0].weights.nu, flat.weights.nu)

    def test_empty_marginal_stops_after_first_layer(self):
        X, y = blobs([[5.0, 0.0], [-5.0, 0.0]], 40, 0.2, seed=5)  # trivially separated
        hyper = HierarchyHyper(L_max=5, T_kappa=1e-9, clasmk=ClasmkHyper(split_seed=5))
        model = train_hierarchy(X, y, KS2, hyper)
        assert model.n_layers == 1
        assert "marginal" in model.warning

    def test_marginal_subset_contains_uncertain_cluster(self):
        X, y = moons(400, seed=6, noise=0.25)
        hyper = HierarchyHyper(L_max=2, T_kappa=1.0, clasmk=ClasmkHyper(split_seed=6))
        model = train_hierarchy(X, y, KernelSet.parse(["rbf:1", "rbf:0.5"]), hyper)
        if model.n_layers == 2:
            assert 0 < model.marginal_sizes[0] < len(y)

    def test_dim_strictly_increases(self):
        X, y = moons(300, seed=7, noise=0.3)
        hyper = HierarchyHyper(L_max=3, epsilon=0.0, clasmk=ClasmkHyper(split_seed=7))
        model = train_hierarchy(X, y, KS2, hyper)
        dims = [model.dim_through(l) for l in range(1, model.n_layers + 1)]
        assert all(d2 > d1 for d1, d2 in zip(dims, dims[1:]))

    def test_embed_full_prefix_property(self):
        X, y = moons(300, seed=8, noise=0.3)
        hyper = HierarchyHyper(L_max=2, epsilon=0.0, clasmk=ClasmkHyper(split_seed=8))
        model = train_hierarchy(X, y, KS2, hyper)
        if model.n_layers == 2:
            full = embed_full(X[:10], model, 2)
            one = embed_full(X[:10], model, 1)
            d1 = model.layers[0].dim
            assert np.array_equal(full[:, :d1], one)
            assert full.shape[1] == d1 + model.layers[1].dim

    def test_embed_layer_matches_embed_points(self):
        X, y = small_problem(9)
        hyper = HierarchyHyper(L_max=1, clasmk=ClasmkHyper(split_seed=9))
        model = train_hierarchy(X, y, KS2, hyper)
        layer = model.layers[0]
        assert np.array_equal(embed_layer(X[:7], layer),
                              embed_points(layer.bank, layer.weights.nu, X[:7]))

    def test_reproducible_weight_traces(self):
        X, y = moons(240, seed=10, noise=0.3)
        hyper = HierarchyHyper(L_max=2, epsilon=0.0, clasmk=ClasmkHyper(split_seed=10))
        m1 = train_hierarchy(X, y, KS2, hyper)
        m2 = train_hierarchy(X, y, KS2, hyper)
        assert m1.n_layers == m2.n_layers
        for a, b in zip(m1.layers, m2.layers):
            assert np.array_equal(a.weights.nu, b.weights.nu)
        assert m1.marginal_sizes == m2.marginal_sizes

    def test_layer_budget_and_trace_length(self):
        X, y = moons(240, seed=11, noise=0.35)
        hyper = HierarchyHyper(L_max=3, epsilon=0.0, clasmk=ClasmkHyper(split_seed=11))
        model = train_hierarchy(X, y, KS2, hyper)
        assert model.n_layers <= 3
        assert len(model.d_nu_trace) == model.n_layers - 1

    def test_epsilon_stopping(self):
        X, y = moons(240, seed=12, noise=0.3)
        hyper = HierarchyHyper(L_max=6, epsilon=1e9, clasmk=ClasmkHyper(split_seed=12))
        model = train_hierarchy(X, y, KS2, hyper)
        # layer 1 always runs (d_nu forced infinite), layer 2 triggers the stop
        assert model.n_layers == 2

    def test_embedding_consistency_across_layers(self):
        X, y = moons(300, seed=13, noise=0.3)
        hyper = HierarchyHyper(L_max=2, epsilon=0.0, clasmk=ClasmkHyper(split_seed=13))
        model = train_hierarchy(X, y, KS2, hyper)
        rng = np.random.default_rng(14)
        a, b = rng.normal(size=2), rng.normal(size=2)
        full_dot = float(embed_full(a[None, :], model, model.n_layers)[0]
                         @ embed_full(b[None, :], model, model.n_layers)[0])
        per_layer = sum(clasmk_eval(a, b, l.bank, l.weights.nu) for l in model.layers)
        assert full_dot == pytest.approx(per_layer, abs=1e-9)

    def test_predict_shape_and_sanity(self):
        X, y = small_problem(15, n=60)
        hyper = HierarchyHyper(L_max=1, clasmk=ClasmkHyper(split_seed=15))
        model = train_hierarchy(X, y, KS2, hyper)
        pred = model.predict(X)
        assert pred.shape == y.shape
        assert np.mean(pred == y) > 0.9

import numpy as np
import pytest

from clasmk.data import Standardizer, split_stratified_indices
from clasmk.kernels import KernelSet
from clasmk.subspace import BasisBank, fit_bank, fit_class_basis, project_many
from clasmk.synth import blobs
from clasmk.weights import (ClasmkHyper, NonRepresentativeError, NoRepresentativeKernelError,
                            ObjectiveCache, OptimizeOptions, WeightMatrix, classwise_criterion,
                            empirical_objective, optimize_weights, select_best_kernels,
                            threshold_weights, train_clasmk, truncate_kernels)


def brute_force_objective(weights, bank, X, y):
    """Literal double-loop restatement of the separability objective."""
    nu = weights.nu
    C, K = nu.shape
    X = np.atleast_2d(X)

    def block(b, x):
        rmax = max(bank.get(b, k).rank for k in range(K) if nu[b, k] > 0)
        s = np.zeros(rmax)
        for k in range(K):
            if nu[b, k] > 0:
                p = project_many(bank.get(b, k), x[None, :])[0]
                s[: len(p)] += np.sqrt(nu[b, k]) * p
        return s

    h_w = 0.0
    for c in range(C):
        pts = X[y == c]
        acc = 0.0
        for x in pts:
            s = block(c, x)
            acc += float(s @ s)
        h_w += acc / len(pts)

    h_b = 0.0
    for c in range(C):
        pts = X[y == c]
        for b in range(C):
            if b == c:
                continue
            acc = 0.0
            for x in pts:
                s = block(b, x)
                acc += float(s @ s)
            h_b += acc / len(pts)
    if C > 1:
        h_b /= C - 1
    return h_b, h_w


def make_instance(seed, n_per_class=20, C=2, K=2, spread=2.0):
    rng = np.random.default_rng(seed)
    centers = rng.normal(scale=spread, size=(C, 2))
    X, y = blobs(centers, n_per_class, 0.6, seed)
    names = ["rbf:1", "poly:2", "rbf:0.5"][:K]
    ks = KernelSet.parse(names)
    bank = fit_bank(X, y, ks, tol=1e-4, seed=seed)
    nu = rng.dirichlet(np.ones(K), size=C)
    return bank, WeightMatrix(nu), X, y


class TestWeightMatrix:
    def test_feasibility_enforced(self):
        with pytest.raises(ValueError):
            WeightMatrix(np.array([[0.5, 0.6]]))
        with pytest.raises(ValueError):
            WeightMatrix(np.array([[-0.1, 1.1]]))

    def test_uniform_with_active_subset(self):
        wm = WeightMatrix.uniform(2, 4, active=[1, 3])
        assert np.allclose(wm.nu[:, [1, 3]], 0.5)
        assert np.all(wm.nu[:, [0, 2]] == 0.0)

    def test_one_hot(self):
        wm = WeightMatrix.uniform(2, 3).one_hot([2, 0])
        assert wm.nu[0, 2] == 1.0 and wm.nu[1, 0] == 1.0


class TestEmpiricalObjective:
    def test_single_class_has_zero_between(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(15, 2))
        y = np.zeros(15, dtype=np.int64)
        bank = fit_bank(X, y, KernelSet.parse(["rbf:1"]), seed=0)
        parts = empirical_objective(WeightMatrix(np.array([[1.0]])), bank, X, y)
        assert parts.h_b == 0.0
        assert parts.h == 0.0

    def test_orthogonal_classes_zero_between(self):
        # narrow kernel, far-apart classes: cross projections vanish
        X, y = blobs([[0.0, 0.0], [100.0, 100.0]], 10, 0.01, seed=1)
        bank = fit_bank(X, y, KernelSet.parse(["rbf:0.1"]), seed=1)
        parts = empirical_objective(WeightMatrix(np.ones((2, 1))), bank, X, y)
        assert parts.h_b == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_brute_force(self, seed):
        bank, wm, X, y = make_instance(seed, K=2)
        parts = empirical_objective(wm, bank, X, y)
        hb, hw = brute_force_objective(wm, bank, X, y)
        assert parts.h_b == pytest.approx(hb, abs=1e-10)
        assert parts.h_w == pytest.approx(hw, abs=1e-10)

    def test_cache_agrees_with_direct_evaluation(self):
        bank, wm, X, y = make_instance(11, K=3, C=2)
        cache = ObjectiveCache(bank, X, y, active=[0, 1, 2])
        direct = empirical_objective(wm, bank, X, y)
        cached = cache.parts(wm.nu)
        assert cached.h_b == pytest.approx(direct.h_b, abs=1e-10)
        assert cached.h_w == pytest.approx(direct.h_w, abs=1e-10)

    def test_non_representative_error(self):
        # basis landmarks far from every evaluated point under a narrow kernel
        spec = KernelSet.parse(["rbf:0.001"])
        bank = BasisBank()
        bank.add(fit_class_basis(np.array([[500.0, 500.0]]), spec[0], class_id=0, kernel_index=0))
        bank.add(fit_class_basis(np.array([[-500.0, -500.0]]), spec[0], class_id=1, kernel_index=0))
        X = np.array([[0.0, 0.0], [1.0, 1.0]])
        y = np.array([0, 1])
        with pytest.raises(NonRepresentativeError):
            empirical_objective(WeightMatrix(np.ones((2, 1))), bank, X, y)


class TestTruncation:
    def test_small_eta_keeps_everything(self):
        bank, _, X, y = make_instance(3, K=2)
        assert truncate_kernels(bank, X, y, eta=1e-9) == set()

    def test_dead_kernel_removed(self):
        X, y = blobs([[0.0, 0.0], [3.0, 3.0]], 15, 0.5, seed=4)
        ks = KernelSet.parse(["rbf:1", "rbf:0.0001"])
        ib, inu = split_stratified_indices(y, 0.5, 0)
        bank = fit_bank(X[ib], y[ib], ks, seed=4)
        removed = truncate_kernels(bank, X[inu], y[inu], eta=0.1)
        assert removed == {1}

    def test_all_removed_is_an_error(self):
        X, y = blobs([[0.0, 0.0], [3.0, 3.0]], 15, 0.5, seed=5)
        ks = KernelSet.parse(["rbf:0.0001"])
        ib, inu = split_stratified_indices(y, 0.5, 0)
        bank = fit_bank(X[ib], y[ib], ks, seed=5)
        with pytest.raises(NoRepresentativeKernelError):
            truncate_kernels(bank, X[inu], y[inu], eta=0.1)

    def test_eta_domain(self):
        bank, _, X, y = make_instance(6)
        with pytest.raises(ValueError):
            truncate_kernels(bank, X, y, eta=0.0)


class TestOptimizeWeights:
    def test_single_kernel_is_identity(self):
        bank, _, X, y = make_instance(7, K=1)
        init = WeightMatrix.uniform(2, 1)
        res = optimize_weights(bank, X, y, init)
        assert np.array_equal(res.weights.nu, init.nu)
        assert res.converged

    def test_monotone_trace_and_improvement(self):
        bank, _, X, y = make_instance(8, K=3)
        init = WeightMatrix.uniform(2, 3)
        res = optimize_weights(bank, X, y, init)
        trace = np.asarray(res.h_trace)
        assert np.all(np.diff(trace) <= 1e-12)
        h_init = empirical_objective(init, bank, X, y).h
        h_final = empirical_objective(res.weights, bank, X, y).h
        assert h_final <= h_init + 1e-12

    def test_final_weights_feasible(self):
        bank, _, X, y = make_instance(9, K=3)
        res = optimize_weights(bank, X, y, WeightMatrix.uniform(2, 3))
        nu = res.weights.nu
        assert np.all(nu >= 0.0)
        assert np.allclose(nu.sum(axis=1), 1.0, atol=1e-9)

    def test_planted_kernel_recovered(self):
        # kernel 0 separates the blobs; kernel 1 is a flat non-informative one
        X, y = blobs([[2.0, 0.0], [-2.0, 0.0]], 40, 0.4, seed=10)
        ks = KernelSet.parse(["rbf:1", "rbf:100"])
        bank = fit_bank(X, y, ks, seed=10)
        res = optimize_weights(bank, X, y, WeightMatrix.uniform(2, 2))
        assert np.all(res.weights.nu[:, 0] > 0.9)

    def test_deterministic(self):
        bank, _, X, y = make_instance(12, K=3)
        r1 = optimize_weights(bank, X, y, WeightMatrix.uniform(2, 3))
        r2 = optimize_weights(bank, X, y, WeightMatrix.uniform(2, 3))
        assert np.array_equal(r1.weights.nu, r2.weights.nu)

    def test_zero_columns_stay_zero(self):
        bank, _, X, y = make_instance(13, K=3)
        init = WeightMatrix.uniform(2, 3, active=[0, 2])
        res = optimize_weights(bank, X, y, init)
        assert np.all(res.weights.nu[:, 1] == 0.0)


class TestThreshold:
    def test_hand_example(self):
        wm = WeightMatrix(np.array([[0.7, 0.29, 0.01]]))
        out = threshold_weights(wm, 0.1)
        assert out.nu[0] == pytest.approx([0.7 / 0.99, 0.29 / 0.99, 0.0])

    def test_zero_threshold_is_identity(self):
        wm = WeightMatrix(np.array([[0.6, 0.4], [0.1, 0.9]]))
        assert np.array_equal(threshold_weights(wm, 0.0).nu, wm.nu)

    def test_one_hot_unchanged(self):
        wm = WeightMatrix(np.array([[1.0, 0.0, 0.0]]))
        assert np.array_equal(threshold_weights(wm, 0.9).nu, wm.nu)

    def test_idempotent(self):
        rng = np.random.default_rng(14)
        wm = WeightMatrix(rng.dirichlet(np.ones(5), size=3))
        once = threshold_weights(wm, 0.2)
        twice = threshold_weights(once, 0.2)
        assert np.allclose(once.nu, twice.nu, atol=1e-15)

    def test_domain(self):
        wm = WeightMatrix(np.array([[1.0]]))
        with pytest.raises(ValueError):
            threshold_weights(wm, 1.0)


class TestSelectBest:
    def test_argmax(self):
        wm = WeightMatrix(np.array([[0.2, 0.5, 0.3]]))
        assert select_best_kernels(wm).tolist() == [1]

    def test_tie_lowest_index(self):
        wm = WeightMatrix(np.array([[0.5, 0.5]]))
        assert select_best_kernels(wm).tolist() == [0]

    def test_uniform_row(self):
        wm = WeightMatrix.uniform(1, 4)
        assert select_best_kernels(wm).tolist() == [0]

    def test_rescale_invariance(self):
        rng = np.random.default_rng(15)
        row = rng.dirichlet(np.ones(4))
        wm = WeightMatrix(row[None, :])
        scaled = WeightMatrix((row * 7.0 / np.sum(row * 7.0))[None, :])
        assert select_best_kernels(wm).tolist() == select_best_kernels(scaled).tolist()


class TestClasswiseCriterion:
    def test_zero_cross_projection(self):
        X, y = blobs([[0.0, 0.0], [200.0, 200.0]], 10, 0.01, seed=16)
        bank = fit_bank(X, y, KernelSet.parse(["rbf:0.1"]), seed=16)
        assert classwise_criterion(bank, X, y, 0, 0) == pytest.approx(0.0, abs=1e-10)

    def test_single_kernel_is_trivially_best(self):
        bank, _, X, y = make_instance(17, K=1)
        v = classwise_criterion(bank, X, y, 0, 0)
        assert np.isfinite(v)

    def test_ratio_ordering(self):
        # kernel 0: wide RBF sees both classes (high cross energy);
        # kernel 1: narrow RBF separates them (low cross energy)
        X, y = blobs([[1.2, 0.0], [-1.2, 0.0]], 30, 0.3, seed=18)
        ks = KernelSet.parse(["rbf:25", "rbf:1"])
        bank = fit_bank(X, y, ks, seed=18)
        r_wide = classwise_criterion(bank, X, y, 0, 0)
        r_narrow = classwise_criterion(bank, X, y, 0, 1)
        assert r_narrow < r_wide

    def test_mean_collapse_error(self):
        spec = KernelSet.parse(["rbf:0.001"])
        bank = BasisBank()
        bank.add(fit_class_basis(np.array([[500.0, 500.0]]), spec[0], class_id=0, kernel_index=0))
        bank.add(fit_class_basis(np.array([[0.0, 0.0]]), spec[0], class_id=1, kernel_index=0))
        X = np.array([[0.0, 0.0], [1.0, 1.0]])
        y = np.array([0, 1])
        with pytest.raises(NonRepresentativeError):
            classwise_criterion(bank, X, y, 0, 0)


class TestTrainClasmk:
    def test_single_kernel_reduces_to_ones(self):
        X, y = blobs([[1.0, 0.0], [-1.0, 0.0]], 20, 0.4, seed=19)
        res = train_clasmk(X, y, KernelSet.parse(["rbf:1"]), ClasmkHyper(split_seed=19))
        assert np.array_equal(res.weights.nu, np.ones((2, 1)))

    def test_identical_classes_no_crash(self):
        rng = np.random.default_rng(20)
        X = rng.normal(size=(60, 2))
        y = np.repeat([0, 1], 30)  # labels carry no structure
        res = train_clasmk(X, y, KernelSet.parse(["rbf:1", "poly:2"]), ClasmkHyper(split_seed=20))
        nu = res.weights.nu
        assert np.all(nu >= 0) and np.allclose(nu.sum(axis=1), 1.0, atol=1e-9)

    def test_learned_weights_do_not_hurt_downstream(self):
        from clasmk.embedding import embed_points
        from clasmk.lssvm import fit_lssvm, predict_labels

        X, y = blobs([[2.0, 0.0], [-2.0, 0.0]], 60, 0.5, seed=21)
        Xt, yt = blobs([[2.0, 0.0], [-2.0, 0.0]], 60, 0.5, seed=22)
        std = Standardizer.fit(X)
        Z, Zt = std.transform(X), std.transform(Xt)
        ks = KernelSet.parse(["rbf:1", "rbf:100", "rbf:50", "rbf:200"])
        hyper = ClasmkHyper(split_seed=21)
        res = train_clasmk(Z, y, ks, hyper)

        def error(weights):
            F = embed_points(res.bank, weights.nu, Z)
            clf = fit_lssvm(F, y, 1e-3)
            Ft = embed_points(res.bank, weights.nu, Zt)
            return float(np.mean(predict_labels(clf, Ft) != yt))

        active = [k for k in range(4) if k not in res.removed]
        uniform = WeightMatrix.uniform(2, 4, active=active)
        assert error(res.weights) <= error(uniform) + 1e-12

    def test_requires_two_samples_per_class(self):
        X = np.zeros((3, 2))
        y = np.array([0, 0, 1])
        with pytest.raises(ValueError):
            train_clasmk(X, y, KernelSet.parse(["rbf:1"]))

    def test_deterministic_given_seed(self):
        X, y = blobs([[1.0, 0.0], [-1.0, 0.0]], 25, 0.5, seed=23)
        ks = KernelSet.parse(["rbf:1", "poly:2"])
        a = train_clasmk(X, y, ks, ClasmkHyper(split_seed=5))
        b = train_clasmk(X, y, ks, ClasmkHyper(split_seed=5))
        assert np.array_equal(a.weights.nu, b.weights.nu)

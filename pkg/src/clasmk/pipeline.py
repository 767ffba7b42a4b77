"""End-to-end training and evaluation on raw datasets.

A pipeline model owns the standardizer fitted on training data, the
kernel set and the trained layer stack.  Three modes exist:

* ``clasmk``  multiple-kernel weights learned per class (the default);
* ``clask``   same training, then each class keeps only its top kernel;
* ``single``  one fixed kernel, per-class subspace approximation only
  (no split, no truncation, weights pinned to 1).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import Standardizer, kfold_indices
from .hierarchy import HierarchicalModel, HierarchyHyper, LayerModel, train_hierarchy
from .lssvm import fit_lssvm, fit_lssvm_tuned
from .subspace import fit_bank
from .weights import WeightMatrix
from .embedding import embed_points

__all__ = ["PipelineModel", "train_pipeline", "evaluate", "kfold_errors"]

MODES = ("clasmk", "clask", "single")


@dataclass
class PipelineModel:
    standardizer: Standardizer
    kernel_set: object
    hmodel: HierarchicalModel
    label_values: np.ndarray
    mode: str = "clasmk"

    def predict(self, X) -> np.ndarray:
        """Predicted class indices (0-based, aligned with label_values)."""
        Z = self.standardizer.transform(X)
        return self.hmodel.predict(Z)

    def embed(self, X, through=None) -> np.ndarray:
        return self.hmodel.embed(self.standardizer.transform(X), through=through)


def _train_single_kernel(Z, y, kernel_set, hyper: HierarchyHyper) -> HierarchicalModel:
    """Per-class subspace approximation with one fixed kernel."""
    if len(kernel_set) != 1:
        raise ValueError("single mode requires exactly one kernel")
    C = len(np.unique(y))
    bank = fit_bank(Z, y, kernel_set, tol=hyper.clasmk.tol,
                    max_rank=hyper.clasmk.max_rank, seed=hyper.clasmk.split_seed)
    weights = WeightMatrix.uniform(C, 1)
    features = embed_points(bank, weights.nu, Z)
    if hyper.ridge_grid:
        clf = fit_lssvm_tuned(features, y, hyper.ridge_grid, seed=hyper.clasmk.split_seed)
    else:
        clf = fit_lssvm(features, y, hyper.ridge)
    return HierarchicalModel(layers=[LayerModel(1, weights, bank, clf)])


def train_pipeline(X, y, kernel_set, hyper: HierarchyHyper = HierarchyHyper(),
                   mode: str = "clasmk", label_values=None, verbose=None) -> PipelineModel:
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.int64)
    std = Standardizer.fit(X)
    Z = std.transform(X)
    if mode == "single":
        hmodel = _train_single_kernel(Z, y, kernel_set, hyper)
    else:
        if mode == "clask":
            hyper = HierarchyHyper(
                L_max=hyper.L_max, T_kappa=hyper.T_kappa, epsilon=hyper.epsilon,
                ridge=hyper.ridge, ridge_grid=hyper.ridge_grid, clasmk=hyper.clasmk,
                best_kernel_only=True,
            )
        hmodel = train_hierarchy(Z, y, kernel_set, hyper, verbose=verbose)
    if label_values is None:
        label_values = np.unique(y)
    return PipelineModel(std, kernel_set, hmodel, np.asarray(label_values), mode)


def evaluate(model: PipelineModel, X, y):
    """Error rate and confusion matrix (rows true, columns predicted)."""
    y = np.asarray(y, dtype=np.int64)
    pred = model.predict(X)
    C = max(model.hmodel.layers[-1].classifier.n_classes, int(y.max()) + 1)
    confusion = np.zeros((C, C), dtype=np.int64)
    for t, p in zip(y, pred):
        confusion[t, p] += 1
    return float(np.mean(pred != y)), confusion


def kfold_errors(X, y, kernel_set, hyper, mode, k, seed):
    """Retrain per fold; returns (per-fold error array, summed confusion)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.int64)
    errors, confusion = [], None
    for train_idx, test_idx in kfold_indices(y, k, seed):
        model = train_pipeline(X[train_idx], y[train_idx], kernel_set, hyper, mode=mode)
        err, conf = evaluate(model, X[test_idx], y[test_idx])
        errors.append(err)
        confusion = conf if confusion is None else confusion + conf
    return np.asarray(errors), confusion

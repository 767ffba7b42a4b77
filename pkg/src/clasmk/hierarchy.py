"""Multi-layer feature network.

Each layer runs the weight-learning pipeline on the current "marginal"
training subset, appends its embedding blocks to every training point's
feature vector and retrains the base classifier on the full training set.
Points the classifier is unsure about (confidence kappa <= T_kappa) form
the next layer's training subset.  The loop stops at the layer budget,
when the weight matrices stop moving, or when the marginal subset can no
longer support training.
"""

from __future__ import annotations

import numpy as np
from dataclasses import dataclass, field

from .embedding import embed_points, embedding_dim
from .lssvm import LinearModel, confidences, decision_scores, fit_lssvm, fit_lssvm_tuned
from .subspace import BasisBank
from .weights import ClasmkHyper, WeightMatrix, select_best_kernels, train_clasmk

__all__ = ["LayerModel", "HierarchicalModel", "HierarchyHyper", "embed_layer", "embed_full", "train_hierarchy"]


@dataclass
class LayerModel:
    layer_index: int
    weights: WeightMatrix
    bank: BasisBank
    classifier: LinearModel

    @property
    def dim(self) -> int:
        return embedding_dim(self.bank, self.weights.nu)


@dataclass
class HierarchicalModel:
    layers: list
    d_nu_trace: list = field(default_factory=list)
    marginal_sizes: list = field(default_factory=list)
    warning: str = ""
    train_infos: list = field(default_factory=list)

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    def dim_through(self, layer: int) -> int:
        return sum(l.dim for l in self.layers[:layer])

    def embed(self, X, through=None) -> np.ndarray:
        return embed_full(X, self, self.n_layers if through is None else through)

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.decision_scores(X), axis=1)

    def decision_scores(self, X) -> np.ndarray:
        return decision_scores(self.layers[-1].classifier, self.embed(X))


def embed_layer(X, layer: LayerModel) -> np.ndarray:
    """This layer's embedding blocks for each row of X."""
    return embed_points(layer.bank, layer.weights.nu, X)


def embed_full(X, model: HierarchicalModel, through_layer: int) -> np.ndarray:
    """Concatenated embeddings of layers 1..through_layer."""
    if not 1 <= through_layer <= model.n_layers:
        raise ValueError(f"through_layer must lie in [1, {model.n_layers}]")
    return np.hstack([embed_layer(X, l) for l in model.layers[:through_layer]])


@dataclass(frozen=True)
class HierarchyHyper:
    """Hyperparameters of the layer loop plus the per-layer learning step."""

    L_max: int = 10
    T_kappa: float = 1.0
    epsilon: float = 1e-3
    ridge: float = 1e-3
    ridge_grid: tuple = ()   # nonempty enables per-layer ridge tuning
    clasmk: ClasmkHyper = field(default_factory=ClasmkHyper)
    best_kernel_only: bool = False  # one-hot the learned weights per class


def _layer_hyper(base: ClasmkHyper, layer: int) -> ClasmkHyper:
    # fresh basis/weight split every layer, deterministically derived
    seed = int(np.random.SeedSequence((base.split_seed, layer)).generate_state(1)[0])
    return ClasmkHyper(eta=base.eta, t=base.t, split_fraction=base.split_fraction,
                       split_seed=seed, tol=base.tol, max_rank=base.max_rank, opt=base.opt)


def _fit_classifier(F, y, hyper: HierarchyHyper, layer: int):
    if hyper.ridge_grid:
        return fit_lssvm_tuned(F, y, hyper.ridge_grid, seed=layer)
    return fit_lssvm(F, y, hyper.ridge)


def train_hierarchy(X, y, kernel_set, hyper: HierarchyHyper = HierarchyHyper(),
                    verbose=None):
    """Train the layered model on (X, y); returns a HierarchicalModel.

    ``verbose`` may be a callable taking one line of progress text.
    Failures after the first layer truncate the model with a warning
    instead of raising.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.int64)
    if hyper.L_max < 1:
        raise ValueError("L_max must be >= 1")
    C = len(np.unique(y))
    K = len(kernel_set)

    model = HierarchicalModel(layers=[])
    member = np.arange(len(y))
    nu_prev = WeightMatrix.uniform(C, K).nu
    delta_minus = 0.0
    features = np.empty((len(y), 0))
    layer_infos = []

    for layer in range(1, hyper.L_max + 1):
        try:
            result = train_clasmk(X[member], y[member], kernel_set,
                                  _layer_hyper(hyper.clasmk, layer))
            weights = result.weights
            if hyper.best_kernel_only:
                weights = weights.one_hot(select_best_kernels(weights))
            features = np.hstack([features, embed_points(result.bank, weights.nu, X)])
            classifier = _fit_classifier(features, y, hyper, layer)
        except Exception as exc:
            if layer == 1:
                raise
            model.warning = f"layer {layer} failed ({exc}); model truncated at layer {layer - 1}"
            break

        layer_model = LayerModel(layer, weights, result.bank, classifier)
        model.layers.append(layer_model)
        layer_infos.append(result)

        scores = decision_scores(layer_model.classifier, features)
        kappa = confidences(scores)
        marginal = np.flatnonzero(kappa <= hyper.T_kappa)
        model.marginal_sizes.append(len(marginal))

        delta_plus = float(np.linalg.norm(weights.nu - nu_prev))
        d_nu = np.inf if layer == 1 else abs(delta_plus - delta_minus)
        if layer > 1:
            model.d_nu_trace.append(d_nu)
        delta_minus = delta_plus
        nu_prev = weights.nu

        if verbose is not None:
            verbose(f"layer {layer}: h {result.h_init:.5f} -> {result.h_final:.5f}, "
                    f"d_nu {'inf' if d_nu == np.inf else format(d_nu, '.3e')}, "
                    f"marginal {len(marginal)}, dim {features.shape[1]}")

        if layer == hyper.L_max or d_nu <= hyper.epsilon:
            break
        counts = np.bincount(y[marginal], minlength=C)
        if np.any(counts < 2):
            model.warning = (model.warning + "; " if model.warning else "") + \
                f"marginal subset too small after layer {layer}"
            break
        member = marginal

    model.train_infos = layer_infos
    return model

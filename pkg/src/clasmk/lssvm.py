"""Ridge-regularized one-vs-rest least-squares classifier.

Works on explicit embedded features (the embedding already linearizes the
kernel), solving the normal equations for +1/-1 targets per class over
[features; 1].  The bias column is not penalized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .data import split_stratified_indices

__all__ = [
    "LinearModel",
    "Prediction",
    "fit_lssvm",
    "fit_lssvm_tuned",
    "predict",
    "decision_scores",
    "predict_labels",
    "select_marginal",
]


@dataclass
class LinearModel:
    W: np.ndarray      # (q, C)
    b: np.ndarray      # (C,)
    ridge: float

    @property
    def n_features(self) -> int:
        return self.W.shape[0]

    @property
    def n_classes(self) -> int:
        return self.W.shape[1]


@dataclass
class Prediction:
    scores: np.ndarray
    label: int
    confidence: float


def fit_lssvm(features, y, ridge: float) -> LinearModel:
    """One-vs-rest regularized least squares on +1/-1 targets.

    The solve is checked: the relative residual of the normal equations
    must be below 1e-8.
    """
    F = np.atleast_2d(np.asarray(features, dtype=np.float64))
    y = np.asarray(y, dtype=np.int64)
    if ridge <= 0.0:
        raise ValueError("ridge must be positive")
    classes = np.unique(y)
    if len(classes) < 2:
        raise ValueError("need at least two classes")
    if not np.array_equal(classes, np.arange(len(classes))):
        raise ValueError("labels must be contiguous 0-based class indices")
    n, q = F.shape
    G = np.hstack([F, np.ones((n, 1))])
    Y = np.where(y[:, None] == classes[None, :], 1.0, -1.0)

    M = G.T @ G
    M[np.arange(q), np.arange(q)] += ridge  # bias stays unpenalized
    rhs = G.T @ Y
    try:
        theta = scipy.linalg.solve(M, rhs, assume_a="pos")
    except scipy.linalg.LinAlgError as exc:
        raise ValueError(f"singular system even with ridge={ridge}: {exc}") from None
    resid = np.linalg.norm(M @ theta - rhs)
    if resid > 1e-8 * max(np.linalg.norm(rhs), 1.0):
        raise ValueError("normal equations solved inaccurately")
    return LinearModel(W=theta[:q], b=theta[q], ridge=float(ridge))


def fit_lssvm_tuned(features, y, ridge_grid, seed=0, holdout=0.2) -> LinearModel:
    """Pick ridge from ``ridge_grid`` by a stratified holdout, refit on all data.

    The Gram blocks of the normal equations are formed once and shared
    across the grid; only the Cholesky solve is repeated per ridge.
    """
    F = np.atleast_2d(np.asarray(features, dtype=np.float64))
    y = np.asarray(y, dtype=np.int64)
    classes = np.unique(y)
    if len(classes) < 2:
        raise ValueError("need at least two classes")
    idx_tr, idx_va = split_stratified_indices(y, 1.0 - holdout, seed)
    n, q = F.shape
    G = np.hstack([F, np.ones((n, 1))])
    Y = np.where(y[:, None] == classes[None, :], 1.0, -1.0)
    M_tr = G[idx_tr].T @ G[idx_tr]
    R_tr = G[idx_tr].T @ Y[idx_tr]
    diag = np.arange(q)

    best, best_err = None, np.inf
    for ridge in ridge_grid:
        M = M_tr.copy()
        M[diag, diag] += ridge
        theta = scipy.linalg.solve(M, R_tr, assume_a="pos")
        pred = np.argmax(G[idx_va] @ theta, axis=1)
        err = float(np.mean(classes[pred] != y[idx_va]))
        if err < best_err - 1e-12:
            best, best_err = ridge, err

    M = M_tr + G[idx_va].T @ G[idx_va]
    M[diag, diag] += best
    theta = scipy.linalg.solve(M, R_tr + G[idx_va].T @ Y[idx_va], assume_a="pos")
    return LinearModel(W=theta[:q], b=theta[q], ridge=float(best))


def decision_scores(model: LinearModel, features) -> np.ndarray:
    F = np.atleast_2d(np.asarray(features, dtype=np.float64))
    if F.shape[1] != model.n_features:
        raise ValueError(f"dimension mismatch: {F.shape[1]} vs {model.n_features}")
    return F @ model.W + model.b


def confidences(scores: np.ndarray) -> np.ndarray:
    """kappa = (top score - runner-up score) / 2 per row."""
    part = np.sort(scores, axis=1)
    return 0.5 * (part[:, -1] - part[:, -2])


def predict_labels(model: LinearModel, features):
    return np.argmax(decision_scores(model, features), axis=1)


def predict(model: LinearModel, feature) -> Prediction:
    """Scores, argmax label (lowest index on ties) and confidence for one point."""
    scores = decision_scores(model, np.asarray(feature, dtype=np.float64)[None, :])[0]
    return Prediction(
        scores=scores,
        label=int(np.argmax(scores)),
        confidence=float(confidences(scores[None, :])[0]),
    )


def select_marginal(kappas, t_kappa: float) -> np.ndarray:
    """Indices with confidence kappa <= t_kappa (boundary inclusive)."""
    if t_kappa <= 0.0:
        raise ValueError("t_kappa must be positive")
    kappas = np.asarray(kappas, dtype=np.float64)
    return np.flatnonzero(kappas <= t_kappa)

"""Kernel-weight learning for class separability.

Learns a C x K matrix nu of kernel weights, one simplex row per class,
minimizing the ratio of between-class to within-class projection energy

    h(nu) = h_b / h_w

    h_w = sum_c  mean_{x in class c} || sum_k sqrt(nu[c,k]) P_{c,k}(x) ||^2
    h_b = 1/(C-1) sum_c sum_{b != c} mean_{x in class c}
                         || sum_k sqrt(nu[b,k]) P_{b,k}(x) ||^2

where P_{b,k}(x) is the projection of x through the class-b basis of
kernel k (zero-padded to the widest class-b rank before summing).  The
pipeline is: truncate non-representative kernels, minimize h by projected
gradient over the per-row simplices from a uniform start, then threshold
small weights for robustness.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .data import split_stratified_indices
from .subspace import BasisBank, fit_bank, project_many

__all__ = [
    "WeightMatrix",
    "ObjectiveParts",
    "ObjectiveCache",
    "NonRepresentativeError",
    "NoRepresentativeKernelError",
    "OptimizationError",
    "OptimizeOptions",
    "OptimizeResult",
    "empirical_objective",
    "truncate_kernels",
    "optimize_weights",
    "threshold_weights",
    "select_best_kernels",
    "classwise_criterion",
    "ClasmkHyper",
    "TrainResult",
    "train_clasmk",
]

_FEAS_TOL = 1e-9
_NU_FLOOR = 1e-12  # keeps the sqrt(nu) gradient finite at the boundary


class NonRepresentativeError(RuntimeError):
    """Within-class energy is ~0; the model cannot represent the data."""


class NoRepresentativeKernelError(RuntimeError):
    """Every kernel fell below the representativeness threshold."""


class OptimizationError(RuntimeError):
    """Non-finite objective during iteration; carries the last good iterate."""

    def __init__(self, message, last_weights=None):
        super().__init__(message)
        self.last_weights = last_weights


@dataclass(frozen=True)
class WeightMatrix:
    """C x K kernel weights; every row lives on the probability simplex."""

    nu: np.ndarray

    def __post_init__(self):
        nu = np.asarray(self.nu, dtype=np.float64)
        if nu.ndim != 2:
            raise ValueError("nu must be a C x K matrix")
        if np.any(nu < -_FEAS_TOL):
            raise ValueError("nu has negative entries")
        nu = np.maximum(nu, 0.0)
        sums = nu.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > _FEAS_TOL):
            raise ValueError(f"rows must sum to 1, got sums {sums}")
        object.__setattr__(self, "nu", nu)

    @property
    def n_classes(self) -> int:
        return self.nu.shape[0]

    @property
    def n_kernels(self) -> int:
        return self.nu.shape[1]

    @staticmethod
    def uniform(n_classes: int, n_kernels: int, active=None) -> "WeightMatrix":
        """Uniform rows; with ``active`` given, uniform over that kernel subset."""
        nu = np.zeros((n_classes, n_kernels))
        cols = list(range(n_kernels)) if active is None else sorted(active)
        nu[:, cols] = 1.0 / len(cols)
        return WeightMatrix(nu)

    def one_hot(self, choices) -> "WeightMatrix":
        nu = np.zeros_like(self.nu)
        for c, k in enumerate(choices):
            nu[c, k] = 1.0
        return WeightMatrix(nu)


@dataclass(frozen=True)
class ObjectiveParts:
    h_b: float
    h_w: float

    @property
    def h(self) -> float:
        return self.h_b / self.h_w


def _block_energy(bank, nu_row, class_id, X):
    """||sum_k sqrt(nu_row[k]) P_{class,k}(x)||^2 for each row of X."""
    active = [k for k in range(len(nu_row)) if nu_row[k] > 0.0]
    if not active:
        return np.zeros(X.shape[0])
    rmax = 0
    for k in active:
        if (class_id, k) not in bank:
            raise ValueError(f"no basis for class {class_id}, kernel {k} with nonzero weight")
        rmax = max(rmax, bank.get(class_id, k).rank)
    s = np.zeros((X.shape[0], rmax))
    for k in active:
        P = project_many(bank.get(class_id, k), X)
        s[:, : P.shape[1]] += np.sqrt(nu_row[k]) * P
    return np.einsum("ij,ij->i", s, s)


def empirical_objective(weights: WeightMatrix, bank: BasisBank, X, y) -> ObjectiveParts:
    """Evaluate h_b, h_w on labeled evaluation data.

    Raises NonRepresentativeError when h_w <= 1e-12 (all kernels should
    have been truncated first).
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.int64)
    nu = weights.nu
    C = nu.shape[0]
    classes = np.arange(C)
    for c in classes:
        if not np.any(y == c):
            raise ValueError(f"class {c} is empty in the evaluation set")

    w2 = np.stack([_block_energy(bank, nu[b], b, X) for b in range(C)])  # (C_basis, N)
    h_w = 0.0
    h_b = 0.0
    for c in range(C):
        mask = y == c
        h_w += float(np.mean(w2[c, mask]))
        for b in range(C):
            if b != c:
                h_b += float(np.mean(w2[b, mask]))
    if C > 1:
        h_b /= C - 1
    if h_w <= 1e-12:
        raise NonRepresentativeError("non-representative model: within-class energy is zero")
    return ObjectiveParts(h_b=h_b, h_w=h_w)


class ObjectiveCache:
    """Quadratic-form caches for fast repeated objective evaluation.

    For each basis class b and active kernels k, j the cache holds

        S[b][c][k, j] = mean over class-c points of <P_{b,k}(x), P_{b,j}(x)>

    (inner products over the overlapping padded coordinates).  With
    u_b = sqrt(nu_b) the objective becomes

        h_w = sum_b u_b' S[b][b] u_b
        h_b = sum_b u_b' T_b u_b,   T_b = 1/(C-1) sum_{c != b} S[b][c].
    """

    def __init__(self, bank: BasisBank, X, y, active):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        y = np.asarray(y, dtype=np.int64)
        self.active = list(active)
        self.classes = bank.class_ids
        C = len(self.classes)
        Ka = len(self.active)
        masks = [y == c for c in self.classes]
        for c, m in zip(self.classes, masks):
            if not np.any(m):
                raise ValueError(f"class {c} is empty in the evaluation set")

        self.S = np.zeros((C, C, Ka, Ka))
        for bi, b in enumerate(self.classes):
            P = [project_many(bank.get(b, k), X) for k in self.active]
            for ki in range(Ka):
                for kj in range(ki, Ka):
                    r = min(P[ki].shape[1], P[kj].shape[1])
                    rowdot = np.einsum("ij,ij->i", P[ki][:, :r], P[kj][:, :r])
                    for ci in range(C):
                        v = float(np.mean(rowdot[masks[ci]]))
                        self.S[bi, ci, ki, kj] = v
                        self.S[bi, ci, kj, ki] = v
        self.W = np.stack([self.S[b, b] for b in range(C)])
        if C > 1:
            self.T = np.stack([
                (self.S[b].sum(axis=0) - self.S[b, b]) / (C - 1) for b in range(C)
            ])
        else:
            self.T = np.zeros_like(self.W)

    def representativeness(self) -> np.ndarray:
        """Per active kernel: sum over classes of the mean own-projection energy."""
        return np.einsum("ckk->k", self.W)

    def parts(self, nu_active: np.ndarray) -> ObjectiveParts:
        u = np.sqrt(np.maximum(nu_active, 0.0))
        h_w = float(np.einsum("ck,ckj,cj->", u, self.W, u))
        h_b = float(np.einsum("ck,ckj,cj->", u, self.T, u))
        return ObjectiveParts(h_b=h_b, h_w=h_w)

    def value(self, nu_active: np.ndarray) -> float:
        p = self.parts(nu_active)
        if p.h_w <= 1e-12:
            raise NonRepresentativeError("non-representative model: within-class energy is zero")
        return p.h

    def gradient(self, nu_active: np.ndarray) -> np.ndarray:
        nu = np.maximum(nu_active, _NU_FLOOR)
        u = np.sqrt(nu)
        Tu = np.einsum("ckj,cj->ck", self.T, u)
        Wu = np.einsum("ckj,cj->ck", self.W, u)
        h_b = float(np.einsum("ck,ck->", u, Tu))
        h_w = float(np.einsum("ck,ck->", u, Wu))
        return (Tu * h_w - h_b * Wu) / (u * h_w * h_w)


def truncate_kernels(bank: BasisBank, X, y, eta: float) -> set:
    """Indices of non-representative kernels.

    Kernel i is removed when the summed per-class mean energy of its own
    projections on the evaluation set is <= eta.  Bases are fitted on the
    basis subset; the evaluation set here must be the disjoint weight
    subset.
    """
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"eta must lie in (0, 1], got {eta}")
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.int64)
    removed = set()
    for k in bank.kernel_indices:
        total = 0.0
        for c in bank.class_ids:
            P = project_many(bank.get(c, k), X[y == c])
            total += float(np.mean(np.einsum("ij,ij->i", P, P)))
        if total <= eta:
            removed.add(k)
    if len(removed) == len(bank.kernel_indices):
        raise NoRepresentativeKernelError("no representative kernel")
    return removed


def _project_rows_simplex(V: np.ndarray) -> np.ndarray:
    """Euclidean projection of each row onto the probability simplex."""
    out = np.empty_like(V)
    for i, v in enumerate(V):
        u = np.sort(v)[::-1]
        css = np.cumsum(u)
        idx = np.arange(1, len(v) + 1)
        cond = u - (css - 1.0) / idx > 0
        rho = idx[cond][-1]
        tau = (css[rho - 1] - 1.0) / rho
        out[i] = np.maximum(v - tau, 0.0)
    return out


@dataclass(frozen=True)
class OptimizeOptions:
    f_tol: float = 1e-8
    max_iters: int = 500
    armijo_c: float = 1e-4
    max_backtracks: int = 40
    initial_step: float = 1.0


@dataclass
class OptimizeResult:
    weights: WeightMatrix
    h_trace: list
    n_iters: int
    converged: bool
    seconds: float


def optimize_weights(bank: BasisBank, X, y, init: WeightMatrix,
                     opts: OptimizeOptions = OptimizeOptions(),
                     cache: ObjectiveCache = None) -> OptimizeResult:
    """Projected-gradient descent of h over the per-row simplices.

    Accepted iterates are monotone in h; columns that are identically zero
    in ``init`` (truncated kernels) stay zero.  Deterministic.
    """
    t0 = time.perf_counter()
    nu_full = init.nu.copy()
    active = [k for k in range(init.n_kernels) if np.any(nu_full[:, k] > 0.0)]
    if cache is None:
        cache = ObjectiveCache(bank, X, y, active)
    elif cache.active != active:
        raise ValueError("objective cache was built for a different active kernel set")

    nu = nu_full[:, active]
    if len(active) == 1:
        h0 = cache.value(nu)
        return OptimizeResult(init, [h0], 0, True, time.perf_counter() - t0)

    h = cache.value(nu)
    if not np.isfinite(h):
        raise OptimizationError("non-finite objective at the initial point", init)
    trace = [h]
    step = opts.initial_step
    converged = False
    it = 0
    nu_old = g_old = None
    for it in range(1, opts.max_iters + 1):
        g = cache.gradient(nu)
        if not np.all(np.isfinite(g)):
            raise OptimizationError("non-finite gradient during iteration",
                                    _scatter(nu, active, nu_full.shape))
        if nu_old is not None:
            # Barzilai-Borwein step seed; Armijo below keeps the sequence monotone
            dn, dg = nu - nu_old, g - g_old
            denom = float(np.sum(dn * dg))
            if denom > 0.0:
                step = min(max(float(np.sum(dn * dn)) / denom, 1e-10), 1e8)
        improved = False
        alpha = step
        for _ in range(opts.max_backtracks):
            cand = _project_rows_simplex(nu - alpha * g)
            move = float(np.sum((cand - nu) ** 2))
            if move == 0.0:
                break
            p = cache.parts(cand)
            h_cand = p.h_b / max(p.h_w, 1e-300)
            if not np.isfinite(h_cand):
                raise OptimizationError("non-finite objective during iteration",
                                        _scatter(nu, active, nu_full.shape))
            if h_cand <= h - opts.armijo_c * move / alpha:
                improved = True
                break
            alpha *= 0.5
        if not improved:
            converged = True
            break
        gain = h - h_cand
        nu_old, g_old = nu, g
        nu, h = cand, h_cand
        trace.append(h)
        if gain < opts.f_tol:
            converged = True
            break

    return OptimizeResult(
        WeightMatrix(_scatter(nu, active, nu_full.shape)),
        trace, it, converged, time.perf_counter() - t0,
    )


def _scatter(nu_active, active, shape):
    full = np.zeros(shape)
    full[:, active] = nu_active
    return full


def threshold_weights(weights: WeightMatrix, t: float) -> WeightMatrix:
    """Zero row entries below t * row maximum, then rescale rows to sum 1."""
    if not 0.0 <= t < 1.0:
        raise ValueError(f"threshold must lie in [0, 1), got {t}")
    nu = weights.nu.copy()
    cut = t * nu.max(axis=1, keepdims=True)
    nu[nu < cut] = 0.0
    nu /= nu.sum(axis=1, keepdims=True)
    return WeightMatrix(nu)


def select_best_kernels(weights: WeightMatrix) -> np.ndarray:
    """Per-class argmax kernel index; ties broken by the lowest index."""
    return np.argmax(weights.nu, axis=1)


def classwise_criterion(bank: BasisBank, X, y, class_id: int, kernel_index: int) -> float:
    """Per-class kernel score: cross-class energy over squared mean norm.

    The numerator averages, over the other classes, the mean energy of
    their points projected through the (class_id, kernel_index) basis; the
    denominator is the squared norm of the mean projection of class_id's
    own points.  Lower is better; the fixed-rule selector takes the argmin
    over kernels for each class.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.int64)
    basis = bank.get(class_id, kernel_index)
    classes = bank.class_ids
    own = project_many(basis, X[y == class_id])
    m_hat = own.mean(axis=0)
    denom = float(m_hat @ m_hat)
    if denom <= 1e-12:
        raise NonRepresentativeError("mean collapse: kernel should have been truncated")
    others = [c for c in classes if c != class_id]
    if not others:
        return 0.0
    num = 0.0
    for c in others:
        P = project_many(basis, X[y == c])
        num += float(np.mean(np.einsum("ij,ij->i", P, P)))
    return num / (len(others) * denom)


@dataclass(frozen=True)
class ClasmkHyper:
    """Hyperparameters for one weight-learning run."""

    eta: float = 0.1
    t: float = 0.1
    split_fraction: float = 0.5
    split_seed: int = 0
    tol: float = 1e-3
    max_rank: int = 256
    opt: OptimizeOptions = field(default_factory=OptimizeOptions)


@dataclass
class TrainResult:
    bank: BasisBank
    weights: WeightMatrix
    removed: set
    h_init: float
    h_final: float
    opt_seconds: float
    n_iters: int
    basis_size: int
    weight_size: int


def train_clasmk(X, y, kernel_set, hyper: ClasmkHyper = ClasmkHyper()) -> TrainResult:
    """Full weight-learning pipeline on one training set.

    Splits the data into disjoint basis/weight subsets, fits all class x
    kernel bases on the basis subset, truncates non-representative kernels
    on the weight subset, optimizes nu from a uniform start and applies the
    robustness threshold.  Deterministic given the seeds in ``hyper``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.int64)
    classes = np.unique(y)
    C, K = len(classes), len(kernel_set)
    counts = np.bincount(y, minlength=C)
    if np.any(counts[classes] < 2):
        raise ValueError("every class needs at least 2 samples")

    idx_b, idx_nu = split_stratified_indices(y, hyper.split_fraction, hyper.split_seed)
    bank = fit_bank(X[idx_b], y[idx_b], kernel_set, tol=hyper.tol,
                    max_rank=hyper.max_rank, seed=hyper.split_seed)

    X_nu, y_nu = X[idx_nu], y[idx_nu]
    removed = truncate_kernels(bank, X_nu, y_nu, hyper.eta)
    active = [k for k in range(K) if k not in removed]

    init = WeightMatrix.uniform(C, K, active=active)
    t0 = time.perf_counter()
    cache = ObjectiveCache(bank, X_nu, y_nu, active)
    result = optimize_weights(bank, X_nu, y_nu, init, opts=hyper.opt, cache=cache)
    opt_seconds = time.perf_counter() - t0
    final = threshold_weights(result.weights, hyper.t)

    return TrainResult(
        bank=bank, weights=final, removed=removed,
        h_init=result.h_trace[0], h_final=result.h_trace[-1],
        opt_seconds=opt_seconds, n_iters=result.n_iters,
        basis_size=len(idx_b), weight_size=len(idx_nu),
    )

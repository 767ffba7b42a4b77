"""Per-class, per-kernel subspace estimation.

A fitted basis is a pair (landmarks X_B, transform A) such that the map
x -> A^T k(X_B, x) gives the coordinates of the feature image phi(x) in an
orthonormal basis of the landmark span: A^T K_BB A = I.  Landmarks are
chosen by a greedy residual scan (see _greedy_py) and A comes from the
eigendecomposition of the landmark Gram matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._backend import FAMILY_POLY, FAMILY_RBF, greedy_select
from .kernels import KernelFamily, KernelSpec, gram

__all__ = [
    "ClassBasis",
    "BasisBank",
    "DegenerateGramError",
    "fit_class_basis",
    "project",
    "project_many",
    "approx_gram",
    "subspace_overlap",
    "fit_bank",
]

# Eigenvalues below RANK_EPS * lambda_max are treated as null directions
# when building A; keeps Lambda^{-1/2} well conditioned.
RANK_EPS = 1e-10


class DegenerateGramError(RuntimeError):
    """Raised when the landmark Gram matrix has no usable eigenvalue."""


@dataclass(frozen=True)
class ClassBasis:
    """Landmarks and orthonormalizing transform for one (class, kernel) pair."""

    class_id: int
    kernel_index: int
    spec: KernelSpec
    landmarks: np.ndarray  # (m, p) input-space points
    transform: np.ndarray  # (m, r) with A^T K_BB A = I_r

    @property
    def n_landmarks(self) -> int:
        return self.landmarks.shape[0]

    @property
    def rank(self) -> int:
        return self.transform.shape[1]


def _family_code(spec: KernelSpec) -> int:
    return FAMILY_RBF if spec.family is KernelFamily.RBF else FAMILY_POLY


def fit_class_basis(data, spec, tol=1e-3, max_rank=256, shuffle_seed=None,
                    class_id=0, kernel_index=0) -> ClassBasis:
    """Greedy landmark selection followed by orthonormalization.

    Points are scanned in data order, or in a seeded shuffled order when
    ``shuffle_seed`` is given.  A point is admitted as a landmark when its
    squared kernel-space residual against the current landmark span exceeds
    ``tol`` (tolerances below 1e-12 are floored for float stability).
    """
    data = np.ascontiguousarray(np.atleast_2d(np.asarray(data, dtype=np.float64)))
    if data.shape[0] < 1:
        raise ValueError("need at least one point to fit a basis")
    if not np.all(np.isfinite(data)):
        raise ValueError("data contains non-finite values")
    if not 0.0 <= tol < 1.0:
        raise ValueError(f"tol must lie in [0, 1), got {tol}")
    if max_rank < 1:
        raise ValueError("max_rank must be >= 1")

    if shuffle_seed is None:
        order = np.arange(data.shape[0])
    else:
        order = np.random.default_rng(shuffle_seed).permutation(data.shape[0])

    budget = min(max_rank, data.shape[0])
    local = greedy_select(data[order], _family_code(spec), float(spec.param), float(tol), int(budget))
    selected = order[local]
    landmarks = data[selected].copy()

    K_bb = gram(spec, landmarks)
    eigval, eigvec = np.linalg.eigh(K_bb)
    eigval, eigvec = eigval[::-1], eigvec[:, ::-1]  # leading directions first
    keep = eigval > RANK_EPS * eigval[0]
    if not np.any(keep) or eigval[0] <= 0:
        raise DegenerateGramError("degenerate landmark Gram")
    A = eigvec[:, keep] / np.sqrt(eigval[keep])
    return ClassBasis(class_id, kernel_index, spec, landmarks, A)


def project_many(basis: ClassBasis, X) -> np.ndarray:
    """Subspace coordinates A^T k(X_B, x) for each row x of X; shape (n, rank)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != basis.landmarks.shape[1]:
        raise ValueError(f"dimension mismatch: {X.shape[1]} vs {basis.landmarks.shape[1]}")
    return gram(basis.spec, X, basis.landmarks) @ basis.transform


def project(basis: ClassBasis, x) -> np.ndarray:
    """Coordinates of a single point; length equals basis.rank."""
    return project_many(basis, np.asarray(x, dtype=np.float64)[None, :])[0]


def approx_gram(basis: ClassBasis, X):
    """Low-rank Gram surrogate L = P^T P and the error ||K - L||_F.

    L is the Gram matrix of the projected feature images, so L <= K in the
    PSD order and diag(L) <= diag(K).
    """
    P = project_many(basis, X)
    L = P @ P.T
    K = gram(basis.spec, np.atleast_2d(np.asarray(X, dtype=np.float64)))
    err = float(np.linalg.norm(K - L))
    return L, err


def subspace_overlap(basis_a: ClassBasis, basis_b: ClassBasis) -> np.ndarray:
    """Estimated basis overlap Q = A_a^T k(X_a, X_b) A_b.

    Only defined for bases living in the same kernel feature space; all
    singular values are <= 1 up to numerical noise.
    """
    if basis_a.kernel_index != basis_b.kernel_index or basis_a.spec != basis_b.spec:
        raise ValueError("subspace overlap is undefined across different kernels")
    K_ab = gram(basis_a.spec, basis_a.landmarks, basis_b.landmarks)
    return basis_a.transform.T @ K_ab @ basis_b.transform


@dataclass
class BasisBank:
    """All fitted bases, keyed by (class_id, kernel_index)."""

    bases: dict = field(default_factory=dict)

    def add(self, basis: ClassBasis):
        self.bases[(basis.class_id, basis.kernel_index)] = basis

    def get(self, class_id: int, kernel_index: int) -> ClassBasis:
        return self.bases[(class_id, kernel_index)]

    def __contains__(self, key):
        return key in self.bases

    def items(self):
        return self.bases.items()

    @property
    def class_ids(self):
        return sorted({c for c, _ in self.bases})

    @property
    def kernel_indices(self):
        return sorted({k for _, k in self.bases})


def _fit_seed(seed, class_id, kernel_index):
    if seed is None:
        return None
    return np.random.SeedSequence((int(seed), int(class_id), int(kernel_index))).generate_state(1)[0]


def fit_bank(X, y, kernel_set, tol=1e-3, max_rank=256, seed=None,
             kernel_indices=None) -> BasisBank:
    """Fit one basis per class per kernel on (X, y).

    ``kernel_indices`` restricts fitting to a subset of the kernel set.
    Individual fits are independent; each gets a deterministic shuffle seed
    derived from ``seed`` and its (class, kernel) key.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.int64)
    bank = BasisBank()
    indices = range(len(kernel_set)) if kernel_indices is None else kernel_indices
    for c in np.unique(y):
        data_c = X[y == c]
        for k in indices:
            basis = fit_class_basis(
                data_c, kernel_set[k], tol=tol, max_rank=max_rank,
                shuffle_seed=_fit_seed(seed, c, k), class_id=int(c), kernel_index=int(k),
            )
            bank.add(basis)
    return bank

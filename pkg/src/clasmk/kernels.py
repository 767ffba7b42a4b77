"""Kernel functions, Gram blocks and kernel-induced distances.

Every kernel is used in cosine-normalized form, so k(x, x) = 1 and all
feature images lie on the unit sphere.  Two families are supported:

* ``rbf:<sigma>``   k(x, y) = exp(-||x - y||^2 / sigma^2), normalized already.
* ``poly:<degree>`` k(x, y) = ((1 + x.y) / sqrt((1 + x.x)(1 + y.y)))^degree,
  i.e. the polynomial kernel divided by sqrt(k(x,x) k(y,y)).  The ratio is
  taken before the power so large degrees cannot overflow.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "KernelFamily",
    "KernelSpec",
    "KernelSet",
    "eval_kernel",
    "gram",
    "feature_distance_sq",
    "clasmk_eval",
]


class KernelFamily(Enum):
    RBF = "rbf"
    POLY = "poly"


@dataclass(frozen=True)
class KernelSpec:
    """One parameterized kernel function.

    ``param`` is the width sigma for RBF and the (positive integer) degree
    for polynomial kernels.
    """

    family: KernelFamily
    param: float

    def __post_init__(self):
        if not np.isfinite(self.param) or self.param <= 0:
            raise ValueError(f"kernel parameter must be positive and finite, got {self.param}")
        if self.family is KernelFamily.POLY and self.param != int(self.param):
            raise ValueError(f"polynomial degree must be an integer, got {self.param}")

    @property
    def name(self) -> str:
        if self.family is KernelFamily.POLY:
            return f"poly:{int(self.param)}"
        return f"rbf:{self.param:g}"

    @staticmethod
    def parse(text: str) -> "KernelSpec":
        """Parse ``rbf:<sigma>`` or ``poly:<degree>``."""
        try:
            fam, _, par = text.strip().partition(":")
            family = KernelFamily(fam.strip().lower())
            param = float(par)
        except ValueError as exc:
            raise ValueError(f"cannot parse kernel spec {text!r}: {exc}") from None
        return KernelSpec(family, param)


@dataclass(frozen=True)
class KernelSet:
    """Ordered collection of kernels; the order indexes weight-matrix columns."""

    kernels: tuple

    def __post_init__(self):
        if len(self.kernels) < 1:
            raise ValueError("kernel set must contain at least one kernel")
        object.__setattr__(self, "kernels", tuple(self.kernels))

    def __len__(self):
        return len(self.kernels)

    def __getitem__(self, i) -> KernelSpec:
        return self.kernels[i]

    def __iter__(self):
        return iter(self.kernels)

    @property
    def names(self):
        return [k.name for k in self.kernels]

    @staticmethod
    def parse(texts) -> "KernelSet":
        return KernelSet(tuple(KernelSpec.parse(t) for t in texts))


def _as_points(X, name: str) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
        raise ValueError(f"{name} must be a nonempty 2-D point set, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite values")
    return X


def gram(spec: KernelSpec, X, Y=None) -> np.ndarray:
    """Normalized kernel matrix with entry (i, j) = k(X_i, Y_j).

    With ``Y=None`` (or Y identical to X) the result is symmetric PSD with
    unit diagonal.
    """
    X = _as_points(X, "X")
    symmetric = Y is None
    Y = X if symmetric else _as_points(Y, "Y")
    if X.shape[1] != Y.shape[1]:
        raise ValueError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")

    if spec.family is KernelFamily.RBF:
        nx = np.einsum("ij,ij->i", X, X)
        ny = nx if symmetric else np.einsum("ij,ij->i", Y, Y)
        d2 = nx[:, None] + ny[None, :] - 2.0 * (X @ Y.T)
        np.maximum(d2, 0.0, out=d2)
        K = np.exp(-d2 / (spec.param * spec.param))
    else:
        nx = 1.0 + np.einsum("ij,ij->i", X, X)
        ny = nx if symmetric else 1.0 + np.einsum("ij,ij->i", Y, Y)
        base = (1.0 + X @ Y.T) / np.sqrt(np.outer(nx, ny))
        K = base ** int(spec.param)

    if symmetric:
        K = 0.5 * (K + K.T)
        np.fill_diagonal(K, 1.0)
    return K


def eval_kernel(spec: KernelSpec, x, y) -> float:
    """Normalized kernel value k(x, y) / sqrt(k(x,x) k(y,y)) for one pair."""
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    return float(gram(spec, x[None, :], y[None, :])[0, 0])


def feature_distance_sq(kx: float, ky: float, kxy: float) -> float:
    """Squared feature-space distance ||phi(x) - phi(y)||^2 = kx + ky - 2 kxy.

    Tiny negative values from floating-point cancellation are clamped to 0.
    """
    d = kx + ky - 2.0 * kxy
    return d if d > 0.0 else 0.0


def clasmk_eval(x, y, bank, weights) -> float:
    """Composite class-specific multiple-kernel value h(x, y).

    Equals the inner product of the explicit embeddings of x and y built
    from the per-class, per-kernel bases weighted by sqrt(nu).  Symmetric
    and PSD on any finite sample by construction.
    """
    from .embedding import embed_points

    ex = embed_points(bank, weights, np.asarray(x, dtype=np.float64)[None, :])
    ey = embed_points(bank, weights, np.asarray(y, dtype=np.float64)[None, :])
    return float(ex[0] @ ey[0])

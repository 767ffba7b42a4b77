"""Explicit feature construction from per-class bases and kernel weights.

The embedding of a point stacks one block per class.  Block c is the
sqrt(nu)-weighted sum of that point's projections through the class-c
bases of every active kernel.  Kernel projections of different rank are
zero-padded to the widest active rank of the class before summing, which
preserves the inner products of the individual terms.
"""

from __future__ import annotations

import numpy as np

from .subspace import BasisBank, project_many

__all__ = ["block_ranks", "embed_points", "embedding_dim"]


def block_ranks(bank: BasisBank, nu: np.ndarray) -> list:
    """Per-class block width: the widest rank among active (nu > 0) kernels."""
    C, K = nu.shape
    ranks = []
    for c in range(C):
        r = 0
        for k in range(K):
            if nu[c, k] > 0.0:
                if (c, k) not in bank:
                    raise ValueError(f"no basis for class {c}, kernel {k} with nonzero weight")
                r = max(r, bank.get(c, k).rank)
        ranks.append(r)
    return ranks


def embedding_dim(bank: BasisBank, nu: np.ndarray) -> int:
    return int(sum(block_ranks(bank, nu)))


def embed_points(bank: BasisBank, nu: np.ndarray, X) -> np.ndarray:
    """Stacked per-class embedding blocks for each row of X; shape (n, dim)."""
    nu = np.asarray(nu, dtype=np.float64)
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    C, K = nu.shape
    ranks = block_ranks(bank, nu)
    out = np.zeros((X.shape[0], sum(ranks)))
    offset = 0
    for c in range(C):
        block = out[:, offset:offset + ranks[c]]
        for k in range(K):
            w = nu[c, k]
            if w > 0.0:
                P = project_many(bank.get(c, k), X)
                block[:, : P.shape[1]] += np.sqrt(w) * P
        offset += ranks[c]
    return out

"""Synthetic data generators.

Two kinds of generators live here:

* Feature-space generators (``subspace_model``, ``classwise_model``) that
  draw unit-norm vectors directly from the class-subspace model
  phi = U beta + e with controlled subspace overlap and noise level.
  They return the true bases, so estimator and bound behavior can be
  validated against known population values.
* Input-space toy datasets (``banana``, ``moons``, ``pen_strokes``,
  ``blobs``) used by the classification tests and the CLI ``synth``
  command.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SynthSubspace",
    "SynthClasswise",
    "subspace_model",
    "classwise_model",
    "banana",
    "moons",
    "pen_strokes",
    "blobs",
]


@dataclass
class SynthSubspace:
    features: np.ndarray      # (N, q) unit-norm rows
    y: np.ndarray
    bases: list               # per-class (q, rank) orthonormal U_c
    overlap_lambda: float     # population overlap ratio
    sigma_e_sq: float
    mean_norm_sq: float       # population ||E(beta)||^2, equal across classes


@dataclass
class SynthClasswise:
    features: np.ndarray      # (N, C * block_dim) stacked unit-norm blocks
    y: np.ndarray
    bases: list               # per-block (block_dim, rank) orthonormal U_i
    block_dim: int
    overlap_lambda: float
    sigma_e_sq: float


def _orthonormal_columns(rng, q, n_cols):
    M = rng.standard_normal((q, n_cols))
    Q, _ = np.linalg.qr(M)
    return Q[:, :n_cols]


def _unit_sphere(rng, n, dim):
    v = rng.standard_normal((n, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _cone_coords(rng, n, dim, radius, mean_cos):
    """Vectors of fixed norm ``radius`` whose mean is radius*mean_cos*e1.

    Drawn on the cone of half-angle arccos(mean_cos) around e1; for
    one-dimensional coordinates a two-point distribution with the same
    mean is used.
    """
    if dim == 1:
        p = 0.5 * (1.0 + mean_cos)
        signs = np.where(rng.random(n) < p, 1.0, -1.0)
        return radius * signs[:, None]
    sin = np.sqrt(max(1.0 - mean_cos * mean_cos, 0.0))
    out = np.zeros((n, dim))
    out[:, 0] = mean_cos
    out[:, 1:] = sin * _unit_sphere(rng, n, dim - 1)
    return radius * out


def subspace_model(n_classes, per_class_rank, ambient_dim, sigma_e_sq,
                   overlap_lambda, n_per_class, seed, mean_cos=np.sqrt(0.5)):
    """Unit-norm feature vectors from the class-subspace model.

    Class bases share a common tilt so that every cross-class overlap
    matrix is exactly lambda^(1/2) * I, giving a population overlap ratio
    equal to ``overlap_lambda``.  Coefficients have fixed norm
    sqrt(1 - sigma_e_sq) and mean norm sqrt(1 - sigma_e_sq) * mean_cos;
    noise has fixed norm sqrt(sigma_e_sq) and lives orthogonal to every
    class subspace, so output rows have exactly unit norm.
    """
    C, m, q = int(n_classes), int(per_class_rank), int(ambient_dim)
    if not 0.0 <= sigma_e_sq < 1.0:
        raise ValueError("sigma_e_sq must lie in [0, 1)")
    if not 0.0 <= overlap_lambda <= 1.0:
        raise ValueError("overlap_lambda must lie in [0, 1]")
    shared = m if overlap_lambda > 0.0 else 0
    used = shared + C * m
    n_noise = q - used
    if C * m > q or (sigma_e_sq > 0.0 and n_noise < 1):
        raise ValueError("infeasible rank/overlap combination for this ambient dimension")

    rng = np.random.default_rng(seed)
    frame = _orthonormal_columns(rng, q, used + max(n_noise, 0))
    S = frame[:, :shared]
    privates = [frame[:, shared + c * m: shared + (c + 1) * m] for c in range(C)]
    noise_basis = frame[:, used:]

    cos_t = overlap_lambda ** 0.25
    sin_t = np.sqrt(max(1.0 - cos_t * cos_t, 0.0))
    bases = []
    for c in range(C):
        U = sin_t * privates[c] + (cos_t * S if shared else 0.0)
        bases.append(U)

    radius = np.sqrt(1.0 - sigma_e_sq)
    rows, labels = [], []
    for c in range(C):
        beta = _cone_coords(rng, n_per_class, m, radius, mean_cos)
        phi = beta @ bases[c].T
        if sigma_e_sq > 0.0:
            e = np.sqrt(sigma_e_sq) * _unit_sphere(rng, n_per_class, n_noise)
            phi = phi + e @ noise_basis.T
        rows.append(phi)
        labels.append(np.full(n_per_class, c, dtype=np.int64))

    return SynthSubspace(
        features=np.vstack(rows), y=np.concatenate(labels), bases=bases,
        overlap_lambda=float(overlap_lambda), sigma_e_sq=float(sigma_e_sq),
        mean_norm_sq=float((1.0 - sigma_e_sq) * mean_cos * mean_cos),
    )


def classwise_model(n_classes, per_block_rank, block_dim, sigma_e_sq,
                    overlap_lambda, n_per_class, seed, mean_cos=np.sqrt(0.5)):
    """Stacked class-specific blocks with cross-energy ratio ``overlap_lambda``.

    Block i of a class-c sample decomposes over the block-i basis U_i with
    coefficient energy 1 - sigma_e_sq when i = c and
    overlap_lambda * (1 - sigma_e_sq) otherwise; the remaining block energy
    is off-basis residual so every block has exactly unit norm.
    """
    C, m, qb = int(n_classes), int(per_block_rank), int(block_dim)
    if not 0.0 <= sigma_e_sq < 1.0:
        raise ValueError("sigma_e_sq must lie in [0, 1)")
    cross_sq = overlap_lambda * (1.0 - sigma_e_sq)
    if qb < m + 2:
        raise ValueError("block_dim must exceed per_block_rank by at least 2")

    rng = np.random.default_rng(seed)
    bases, complements = [], []
    for _ in range(C):
        frame = _orthonormal_columns(rng, qb, qb)
        bases.append(frame[:, :m])
        complements.append(frame[:, m:])

    N = C * n_per_class
    out = np.zeros((N, C * qb))
    labels = np.concatenate([np.full(n_per_class, c, dtype=np.int64) for c in range(C)])
    row = 0
    for c in range(C):
        for i in range(C):
            if i == c:
                beta = _cone_coords(rng, n_per_class, m, np.sqrt(1.0 - sigma_e_sq), mean_cos)
                resid_norm = np.sqrt(sigma_e_sq)
            else:
                beta = np.sqrt(cross_sq) * _unit_sphere(rng, n_per_class, m)
                resid_norm = np.sqrt(max(1.0 - cross_sq, 0.0))
            block = beta @ bases[i].T
            if resid_norm > 0.0:
                e = resid_norm * _unit_sphere(rng, n_per_class, qb - m)
                block = block + e @ complements[i].T
            out[row: row + n_per_class, i * qb: (i + 1) * qb] = block
        row += n_per_class

    return SynthClasswise(
        features=out, y=labels, bases=bases, block_dim=qb,
        overlap_lambda=float(overlap_lambda), sigma_e_sq=float(sigma_e_sq),
    )


def _shuffled(X, y, rng):
    order = rng.permutation(len(y))
    return X[order], y[order]


def banana(n=5300, seed=0, clump_sigma=0.16, swap=0.10, anchors=60):
    """Two banana-shaped mixtures in 2-D with overlapping densities.

    Each class is a mixture of tight Gaussian clumps centered on anchor
    points along one of two opposing crescents.  A ``swap`` fraction of
    every class's samples is drawn from the other crescent, so the class
    densities genuinely overlap and the irreducible error is about the
    swap fraction.  The dense local clump structure mirrors the classic
    banana benchmark, where very narrow RBF kernels are competitive.
    """
    rng = np.random.default_rng(seed)
    t = np.linspace(0.0, np.pi, anchors)
    arcs = [
        np.column_stack([np.cos(t), np.sin(t)]),
        np.column_stack([1.0 - np.cos(t), 0.5 - np.sin(t)]),
    ]
    n0 = n // 2
    rows, labels = [], []
    for cls in (0, 1):
        n_cls = n0 if cls == 0 else n - n0
        own = rng.random(n_cls) >= swap
        arc_idx = np.where(own, cls, 1 - cls)
        centers = np.stack([arcs[a][rng.integers(0, anchors)] for a in arc_idx])
        rows.append(centers + rng.normal(0.0, clump_sigma, (n_cls, 2)))
        labels.append(np.full(n_cls, cls, dtype=np.int64))
    return _shuffled(np.vstack(rows), np.concatenate(labels), rng)


def moons(n=1000, seed=0, noise=0.2):
    """Standard two interleaved moons with Gaussian smear."""
    rng = np.random.default_rng(seed)
    n0 = n // 2
    n1 = n - n0
    t0 = rng.uniform(0.0, np.pi, n0)
    t1 = rng.uniform(0.0, np.pi, n1)
    c0 = np.column_stack([np.cos(t0), np.sin(t0)])
    c1 = np.column_stack([1.0 - np.cos(t1), 0.5 - np.sin(t1)])
    X = np.vstack([c0, c1]) + rng.normal(0.0, noise, (n, 2))
    y = np.concatenate([np.zeros(n0, dtype=np.int64), np.ones(n1, dtype=np.int64)])
    return _shuffled(X, y, rng)


# Eight-point pen trajectories for the ten digits, on a 0..100 canvas.
_DIGIT_STROKES = np.array([
    [(50, 95), (80, 75), (85, 40), (60, 5), (30, 8), (12, 40), (20, 75), (48, 93)],   # 0
    [(45, 95), (50, 85), (52, 70), (53, 55), (54, 40), (55, 25), (56, 12), (57, 2)],  # 1
    [(15, 75), (35, 95), (65, 92), (80, 70), (60, 45), (35, 25), (15, 5), (85, 5)],   # 2
    [(20, 90), (55, 97), (80, 80), (55, 60), (80, 40), (70, 15), (40, 2), (15, 12)],  # 3
    [(70, 5), (68, 30), (65, 55), (60, 95), (40, 70), (20, 45), (50, 45), (90, 45)],  # 4
    [(80, 95), (30, 95), (25, 65), (55, 65), (80, 45), (75, 18), (45, 3), (15, 12)],  # 5
    [(70, 95), (45, 75), (25, 48), (20, 20), (45, 4), (70, 15), (72, 38), (40, 42)],  # 6
    [(10, 90), (45, 92), (85, 95), (70, 65), (55, 40), (45, 22), (38, 10), (32, 2)],  # 7
    [(50, 95), (75, 80), (55, 55), (25, 35), (45, 8), (72, 20), (55, 50), (28, 78)],  # 8
    [(75, 70), (55, 90), (28, 80), (30, 55), (60, 50), (78, 72), (70, 35), (60, 5)],  # 9
], dtype=np.float64)


def pen_strokes(n=3498, seed=0, rotation_deg=5.0, scale_sigma=0.06,
                shear_sigma=0.05, jitter=2.5):
    """Pen-trajectory digit stand-in: 10 classes, 16 features.

    Each sample warps a digit stroke prototype with a small random
    rotation, anisotropic scaling, shear and pointwise jitter, then
    rescales the drawing to the 0..100 box the way pen-stroke benchmarks
    are normalized.
    """
    rng = np.random.default_rng(seed)
    reps = [n // 10 + (1 if c < n % 10 else 0) for c in range(10)]
    rows, labels = [], []
    for c, rep in enumerate(reps):
        proto = _DIGIT_STROKES[c] - 50.0
        for _ in range(rep):
            ang = np.deg2rad(rng.normal(0.0, rotation_deg))
            ca, sa = np.cos(ang), np.sin(ang)
            rot = np.array([[ca, -sa], [sa, ca]])
            scale = np.diag(np.exp(rng.normal(0.0, scale_sigma, 2)))
            shear = np.array([[1.0, rng.normal(0.0, shear_sigma)], [0.0, 1.0]])
            pts = proto @ (rot @ scale @ shear).T
            pts = pts + rng.normal(0.0, jitter, pts.shape)
            span = pts.max(axis=0) - pts.min(axis=0)
            pts = (pts - pts.min(axis=0)) * (100.0 / max(span.max(), 1e-9))
            rows.append(pts.ravel())
            labels.append(c)
    X = np.asarray(rows)
    y = np.asarray(labels, dtype=np.int64)
    return _shuffled(X, y, rng)


def blobs(centers, n_per_class, std, seed):
    """Isotropic Gaussian clusters, one class per center."""
    rng = np.random.default_rng(seed)
    centers = np.atleast_2d(np.asarray(centers, dtype=np.float64))
    rows, labels = [], []
    for c, mu in enumerate(centers):
        rows.append(mu + rng.normal(0.0, std, (n_per_class, centers.shape[1])))
        labels.append(np.full(n_per_class, c, dtype=np.int64))
    return _shuffled(np.vstack(rows), np.concatenate(labels), rng)

"""Separability statistics and Markov-type bounds.

Under the class-subspace model (unit-norm feature images phi = U_c beta_c
+ e_c), the probability that a within-class squared distance exceeds the
expected between-class squared distance is bounded by closed-form
expressions of three quantities: the subspace overlap ratio lambda, the
off-subspace noise energy sigma_e^2 and the squared mean coefficient norms
||m_c||^2.  This module provides plug-in estimators for those quantities,
the bound evaluations, and brute-force empirical counterparts for
validating them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ModelStats",
    "SeparationStats",
    "BoundValue",
    "SeparabilityReport",
    "estimate_model_stats",
    "projections_from_bases",
    "projections_from_bank",
    "bound_lemma1",
    "bound_theorem1",
    "bound_theorem2",
    "lemma3_lower_bound",
    "empirical_separation",
    "build_report",
]


@dataclass
class ModelStats:
    """Plug-in estimates of the model quantities.

    ``energy[c, b]`` is the mean squared projection norm of class-c points
    through the class-b basis; ``mean_norm_sq[c, b]`` is the squared norm
    of the mean projection.  ``lambda_energy`` uses the printed
    mean-energy denominator; ``lambda_mean_norm`` the mean-norm surrogate
    that upper-bounds it.
    """

    priors: np.ndarray
    energy: np.ndarray
    mean_norm_sq: np.ndarray
    sigma_e_sq: float
    per_class_sigma_e_sq: np.ndarray
    lambda_energy: float
    lambda_mean_norm: float
    lambda_classwise: float

    @property
    def own_mean_norms(self) -> np.ndarray:
        return np.diag(self.mean_norm_sq).copy()


def projections_from_bases(bases, features) -> dict:
    """Projection provider for known linear bases: b -> features @ U_b."""
    return {b: np.asarray(features) @ U for b, U in enumerate(bases)}


def projections_from_bank(bank, kernel_index, X) -> dict:
    """Projection provider for one kernel of a fitted bank."""
    from .subspace import project_many

    return {c: project_many(bank.get(c, kernel_index), X) for c in bank.class_ids}


def estimate_model_stats(projections: dict, y) -> ModelStats:
    """Plug-in model statistics from per-basis projection matrices.

    ``projections[b]`` holds the projections of all points through the
    class-b basis (rows aligned with ``y``).  Priors are estimated as
    class frequencies.
    """
    y = np.asarray(y, dtype=np.int64)
    classes = sorted(projections.keys())
    C = len(classes)
    for c in classes:
        if not np.any(y == c):
            raise ValueError(f"class {c} is empty")
    priors = np.array([np.mean(y == c) for c in classes])

    energy = np.zeros((C, C))
    mean_norm_sq = np.zeros((C, C))
    for bi, b in enumerate(classes):
        P = np.asarray(projections[b], dtype=np.float64)
        sq = np.einsum("ij,ij->i", P, P)
        for ci, c in enumerate(classes):
            mask = y == c
            energy[ci, bi] = float(np.mean(sq[mask]))
            m = P[mask].mean(axis=0)
            mean_norm_sq[ci, bi] = float(m @ m)

    own = np.diag(energy)
    per_class_sigma = np.clip(1.0 - own, 0.0, 1.0)
    sigma_e_sq = float(np.clip(1.0 - own.mean(), 0.0, 1.0))

    num = 0.0
    for c in range(C):
        for b in range(C):
            if b != c:
                num += priors[c] / (1.0 - priors[c]) * priors[b] * energy[c, b]
    den_energy = float(np.sum(priors * own))
    den_mean = float(np.sum(priors * np.diag(mean_norm_sq)))
    lambda_energy = num / den_energy if den_energy > 0 else np.inf
    lambda_mean_norm = num / den_mean if den_mean > 0 else np.inf

    if C > 1:
        cw_num = (energy.sum() - own.sum()) / (C - 1)
        cw_den = own.sum()
        lambda_classwise = cw_num / cw_den if cw_den > 0 else np.inf
    else:
        lambda_classwise = 0.0

    return ModelStats(
        priors=priors, energy=energy, mean_norm_sq=mean_norm_sq,
        sigma_e_sq=sigma_e_sq, per_class_sigma_e_sq=per_class_sigma,
        lambda_energy=float(lambda_energy), lambda_mean_norm=float(lambda_mean_norm),
        lambda_classwise=float(lambda_classwise),
    )


@dataclass(frozen=True)
class BoundValue:
    value: float

    @property
    def vacuous(self) -> bool:
        """Markov-type bounds above 1 are valid but uninformative."""
        return self.value >= 1.0


def bound_lemma1(lam: float, sigma_e_sq: float, mean_norm_sq: float) -> BoundValue:
    """Two-quantity separability bound (1 - ||m||^2) / (1 - sqrt(lam)(1 - sigma^2))."""
    if lam >= 1.0 or lam < 0.0:
        raise ValueError(f"hypothesis violated: lambda must lie in [0, 1), got {lam}")
    den = 1.0 - np.sqrt(lam) * (1.0 - sigma_e_sq)
    if den <= 0.0:
        raise ValueError("hypothesis violated: nonpositive denominator")
    return BoundValue((1.0 - mean_norm_sq) / den)


def bound_theorem1(lam: float, sigma_e_sq: float, priors, mean_norms) -> BoundValue:
    """Multiclass bound with prior-weighted numerator."""
    priors = np.asarray(priors, dtype=np.float64)
    mean_norms = np.asarray(mean_norms, dtype=np.float64)
    return bound_lemma1(lam, sigma_e_sq, float(np.sum(priors * mean_norms)))


def lemma3_lower_bound(lam: float, sigma_e_sq: float, C: int) -> float:
    """Lower bound on the expected between-class distance, 2C (1 - (C lam - lam + 1)(1 - sigma^2)/C)."""
    return 2.0 * C * (1.0 - (C * lam - lam + 1.0) * (1.0 - sigma_e_sq) / C)


def bound_theorem2(lam: float, sigma_e_sq: float, mean_norm_matrix, C: int):
    """Class-specific model bound (equal priors); returns (bound, lemma-3 lower bound)."""
    mean_norm_matrix = np.asarray(mean_norm_matrix, dtype=np.float64)
    den = 1.0 - (C * lam - lam + 1.0) * (1.0 - sigma_e_sq) / C
    if den <= 0.0:
        raise ValueError("hypothesis violated: nonpositive denominator")
    num = 1.0 - mean_norm_matrix.sum() / C
    return BoundValue(num / den), lemma3_lower_bound(lam, sigma_e_sq, C)


@dataclass
class SeparationStats:
    e_dw: float
    e_db: float
    empirical_prob: float

    @property
    def empirical_ratio(self) -> float:
        return self.e_dw / self.e_db


def empirical_separation(features, y, block=512) -> SeparationStats:
    """Brute-force within/between squared-distance statistics.

    E(D_w) mixes per-class mean within-class squared distances with the
    class priors; E(D_b) weights class pairs by p_c p_c' / (1 - p_c), the
    two-draws-without-replacement mixture.  The empirical probability is
    the prior-weighted fraction of within-class pairs whose squared
    distance exceeds E(D_b), so Markov's inequality holds exactly for the
    empirical measure.
    """
    F = np.atleast_2d(np.asarray(features, dtype=np.float64))
    y = np.asarray(y, dtype=np.int64)
    classes = np.unique(y)
    if len(classes) < 2:
        raise ValueError("need at least two classes for between-class pairs")
    priors = np.array([np.mean(y == c) for c in classes])

    means, sqs, counts = [], [], []
    for c in classes:
        Fc = F[y == c]
        means.append(Fc.mean(axis=0))
        sqs.append(float(np.mean(np.einsum("ij,ij->i", Fc, Fc))))
        counts.append(Fc.shape[0])

    # closed forms: cross pairs factorize, within pairs exclude the diagonal
    e_db = 0.0
    for i in range(len(classes)):
        for j in range(len(classes)):
            if i != j:
                w = priors[i] * priors[j] / (1.0 - priors[i])
                e_db += w * (sqs[i] + sqs[j] - 2.0 * float(means[i] @ means[j]))
    if e_db <= 0.0:
        raise ValueError("expected between-class distance is zero")

    e_dw = 0.0
    exceed_frac = np.zeros(len(classes))
    for ci, c in enumerate(classes):
        Fc = F[y == c]
        n = Fc.shape[0]
        if n < 2:
            continue
        sq = np.einsum("ij,ij->i", Fc, Fc)
        total = n * sq.sum() - float(Fc.sum(axis=0) @ Fc.sum(axis=0))
        e_dw += priors[ci] * 2.0 * total / (n * (n - 1))
        exceed = 0
        for start in range(0, n, block):
            stop = min(start + block, n)
            D = sq[start:stop, None] + sq[None, :] - 2.0 * Fc[start:stop] @ Fc.T
            rows = np.arange(start, stop)
            mask = np.arange(n)[None, :] > rows[:, None]  # each unordered pair once
            exceed += int(np.count_nonzero((D > e_db) & mask))
        exceed_frac[ci] = exceed / (n * (n - 1) / 2)

    prob = float(np.sum(priors * exceed_frac))
    return SeparationStats(e_dw=float(e_dw), e_db=float(e_db), empirical_prob=prob)


@dataclass
class SeparabilityReport:
    """Everything the bounds command emits for one kernel context."""

    context: str
    lambda_hat: float
    lambda_mean_norm: float
    sigma_e_sq_hat: float
    mean_norms: np.ndarray
    priors: np.ndarray
    bound_value: float
    vacuous: bool
    empirical_ratio: float
    empirical_prob: float

    def validate(self, eps=1e-6):
        if not 0.0 <= self.sigma_e_sq_hat <= 1.0:
            raise ValueError("sigma_e_sq estimate out of [0, 1]")
        if self.empirical_prob > self.empirical_ratio + 1e-12:
            raise ValueError("empirical Markov inequality violated")

    def lines(self):
        out = [
            f"context            : {self.context}",
            f"lambda (energy)    : {self.lambda_hat:.6f}",
            f"lambda (mean-norm) : {self.lambda_mean_norm:.6f}",
            f"sigma_e^2          : {self.sigma_e_sq_hat:.6f}",
            f"priors             : {np.array2string(self.priors, precision=4)}",
            f"||m_c||^2          : {np.array2string(self.mean_norms, precision=4)}",
            f"bound              : {self.bound_value:.6f}" + ("  (vacuous)" if self.vacuous else ""),
            f"empirical ratio    : {self.empirical_ratio:.6f}",
            f"empirical prob     : {self.empirical_prob:.6f}",
        ]
        return out


def build_report(context, stats: ModelStats, separation: SeparationStats) -> SeparabilityReport:
    """Assemble a report; the bound uses the mean-energy lambda estimate."""
    lam = stats.lambda_energy
    try:
        bound = bound_theorem1(lam, stats.sigma_e_sq, stats.priors, stats.own_mean_norms)
        value, vac = bound.value, bound.vacuous
    except ValueError:
        value, vac = float("inf"), True
    report = SeparabilityReport(
        context=context,
        lambda_hat=lam,
        lambda_mean_norm=stats.lambda_mean_norm,
        sigma_e_sq_hat=stats.sigma_e_sq,
        mean_norms=stats.own_mean_norms,
        priors=stats.priors,
        bound_value=value,
        vacuous=vac,
        empirical_ratio=separation.empirical_ratio,
        empirical_prob=separation.empirical_prob,
    )
    report.validate()
    return report

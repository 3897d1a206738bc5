"""Sufficient-condition predicates and empirical concentration checks.

Deterministic evaluations of the recovery conditions (random, balanced,
and adversarial variants) with explicit margins, plus a Monte-Carlo trial
for the centered column-count matrix used in the spectral argument.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .matrixio import format_sig
from .model import AdversarialBudget, PlantedModelSpec
from .rng import make_rng


def bernstein_radius(rho: float, k: int, t: float) -> float:
    """Deviation radius 6 max{sqrt(rho(1-rho) k log t), log t} for a
    Binomial(k, rho) sum."""
    if not (0 <= rho <= 1):
        raise InputError(f"rho must be a probability, got {rho}")
    if k < 0:
        raise InputError(f"k must be nonnegative, got {k}")
    if t <= 1:
        raise InputError(f"t must exceed 1, got {t}")
    logt = np.log(t)
    return 6.0 * max(np.sqrt(rho * (1.0 - rho) * k * logt), logt)


@dataclass
class RecoveryConditionReport:
    """Named condition outcomes with margins (value - threshold, pass when >= 0)."""

    conditions: dict = field(default_factory=dict)  # name -> (margin, ok)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(ok for _, ok in self.conditions.values())

    def lines(self) -> list[str]:
        out = [f"{k} = {format_sig(v)}" for k, v in self.details.items()]
        for name, (margin, ok) in self.conditions.items():
            out.append(f"{name} = {format_sig(margin)} {'pass' if ok else 'fail'}")
        out.append(f"overall = {'pass' if self.passed else 'fail'}")
        return out

    def __str__(self) -> str:
        return "\n".join(self.lines()) + "\n"


def _ratio_proxy(p: float) -> float:
    """min{(1-p)/p, p/(1-p)} with one-sided finite values at p in {0, 1}."""
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return min((1.0 - p) / p, p / (1.0 - p))


def _one_sided_ratio(p: float) -> float:
    """p/(1-p), clipped to 0 at the endpoints where a block is deterministic."""
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return p / (1.0 - p)


def check_random_conditions(spec: PlantedModelSpec, c1: float = 1.0) -> RecoveryConditionReport:
    """Recovery predicate for the random planted model.

    Requires the planted block to be no larger (in area) than any other
    block, the polylog size floor, and the density gap against every
    background block to clear the concentration threshold.
    """
    M, N = spec.M, spec.N
    m1 = len(spec.row_partition[0])
    n1 = len(spec.col_partition[0])
    Nstar = max(M, N)
    n1star = min(m1, n1)
    logN = np.log(Nstar)
    p11 = float(spec.probs[0, 0])
    sigma11_sq = p11 * (1.0 - p11)

    K_r, K_s = spec.probs.shape
    others = [(r, s) for r in range(K_r) for s in range(K_s) if (r, s) != (0, 0)]
    sigma_star_sq = max((_ratio_proxy(float(spec.probs[r, s])) for r, s in others), default=0.0)

    report = RecoveryConditionReport()
    report.details.update(
        {
            "M": M,
            "N": N,
            "m1": m1,
            "n1": n1,
            "p11": p11,
            "sigma11_sq": sigma11_sq,
            "sigma_star_sq": sigma_star_sq,
            "c1": c1,
        }
    )

    # Size condition: planted block area minimal among all blocks.
    min_area = min(
        (len(spec.row_partition[r]) * len(spec.col_partition[s]) for r, s in others),
        default=m1 * n1,
    )
    report.conditions["size_min_area"] = (float(min_area - m1 * n1), m1 * n1 <= min_area)

    # Polylog size floor: (log N)^3 <= min{m_r^2, n_s^2}.
    smallest = min(
        min(len(p) for p in spec.row_partition),
        min(len(p) for p in spec.col_partition),
    )
    report.conditions["size_polylog"] = (float(smallest**2 - logN**3), logN**3 <= smallest**2)

    threshold = c1 * max(
        np.sqrt(sigma_star_sq * Nstar * logN / (m1 * n1)),
        np.sqrt(sigma11_sq * logN / n1star),
        logN / n1star,
    )
    worst_gap = min((p11 - float(spec.probs[r, s]) for r, s in others), default=np.inf)
    report.details["gap_threshold"] = threshold
    report.details["worst_gap"] = worst_gap
    report.conditions["gap"] = (float(worst_gap - threshold), worst_gap >= threshold)
    return report


def check_balanced_conditions(spec: PlantedModelSpec, c: float = 1.0) -> RecoveryConditionReport:
    """Balanced-model specialization: one-sided variance proxy and the
    (log N)^3 <= m^2 size floor."""
    M, N = spec.M, spec.N
    m1 = len(spec.row_partition[0])
    n1 = len(spec.col_partition[0])
    Nstar = max(M, N)
    n1star = min(m1, n1)
    logN = np.log(Nstar)
    p11 = float(spec.probs[0, 0])
    sigma11_sq = p11 * (1.0 - p11)

    K_r, K_s = spec.probs.shape
    others = [(r, s) for r in range(K_r) for s in range(K_s) if (r, s) != (0, 0)]
    p_star_sq = max((_one_sided_ratio(float(spec.probs[r, s])) for r, s in others), default=0.0)

    report = RecoveryConditionReport()
    report.details.update(
        {"M": M, "N": N, "m1": m1, "n1": n1, "p11": p11, "sigma_star_sq": p_star_sq, "c": c}
    )
    report.conditions["size_polylog"] = (float(n1star**2 - logN**3), logN**3 <= n1star**2)
    threshold = c * max(
        np.sqrt(p_star_sq * Nstar * logN / (m1 * n1)),
        np.sqrt(sigma11_sq * logN / n1star),
        logN / n1star,
    )
    worst_gap = min((p11 - float(spec.probs[r, s]) for r, s in others), default=np.inf)
    report.details["gap_threshold"] = threshold
    report.details["worst_gap"] = worst_gap
    report.conditions["gap"] = (float(worst_gap - threshold), worst_gap >= threshold)
    return report


def check_adversarial_conditions(
    budget: AdversarialBudget, m1: int, n1: int, c: float = 1.0
) -> RecoveryConditionReport:
    """Adversarial predicate: deletion/addition margin 2 delta_tilde - delta > 1
    and all total caps at most c * m1 * n1."""
    report = RecoveryConditionReport()
    margin = 2.0 * budget.delta_tilde - budget.delta - 1.0
    caps = [budget.r1, budget.r2, budget.r3, budget.rbar11] + list(budget.r_diag)
    max_cap = max(caps) if caps else 0
    report.details.update(
        {
            "delta": budget.delta,
            "delta_tilde": budget.delta_tilde,
            "max_cap": max_cap,
            "m1": m1,
            "n1": n1,
            "c": c,
        }
    )
    report.conditions["gap"] = (margin, margin > 0)
    report.conditions["size_caps"] = (float(c * m1 * n1 - max_cap), max_cap <= c * m1 * n1)
    return report


def concentration_trial(n: int, partition, probs, c: float, seed: int = 0):
    """Sample the centered column matrix and compare its spectral norm to
    the concentration threshold.

    Theta has entries 1 with probability p_s (else -p_s/(1-p_s)); Theta-tilde
    replaces the negative value in column j by -n_j/(n-n_j) with n_j the
    observed count of ones.  Returns (norm, threshold, ok) where ok means
    norm <= threshold; a column with n_j = n is reported as degenerate by
    raising InputError after resampling is exhausted.
    """
    probs = [float(p) for p in probs]
    if any(p > 0.5 or p < 0 for p in probs):
        raise InputError("column probabilities must lie in [0, 1/2]")
    sizes = [int(s) for s in partition]
    if any(s < 1 for s in sizes):
        raise InputError("partition sizes must be >= 1")
    if len(sizes) != len(probs):
        raise InputError("partition and probability lists must have equal length")
    if n < 1:
        raise InputError("n must be >= 1")
    N = sum(sizes)
    rng = make_rng(seed)

    p_col = np.repeat(probs, sizes)
    for _attempt in range(20):
        ones = rng.random((n, N)) < p_col
        n_j = ones.sum(axis=0)
        if np.all(n_j < n):
            break
    else:
        raise InputError("degenerate trial: some column came up all ones in 20 resamples")

    with np.errstate(divide="ignore", invalid="ignore"):
        neg_theta = np.where(p_col < 1.0, -p_col / (1.0 - p_col), 0.0)
    neg_tilde = -n_j / (n - n_j)
    Theta = np.where(ones, 1.0, neg_theta)
    Theta_tilde = np.where(ones, 1.0, neg_tilde)

    norm = float(np.linalg.norm(Theta - Theta_tilde, 2))
    sigma_hat_sq = max((_one_sided_ratio(p) for p in probs), default=0.0)
    logN = np.log(max(N, 2))
    threshold = c * max(np.sqrt(sigma_hat_sq * N * logN), logN**1.5)
    return norm, float(threshold), norm <= threshold

"""Convex relaxation of the densest m x n submatrix problem.

Problem data, the density measure, the nuclear-norm + L1 objective, and the
rules used to pick the regularization weight gamma.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleRuleError, InputError
from .matrixio import binarize_entries


@dataclass
class ProblemInstance:
    """Binary matrix A plus target submatrix dimensions (m rows, n columns)."""

    A: np.ndarray
    m: int
    n: int
    omega: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.A = binarize_entries(self.A)
        if self.A.ndim != 2 or self.A.size == 0:
            raise InputError(f"A must be a nonempty 2-d matrix, got shape {self.A.shape}")
        M, N = self.A.shape
        if not (1 <= self.m <= M and 1 <= self.n <= N):
            raise InputError(f"target sizes ({self.m},{self.n}) out of range for a {M}x{N} matrix")
        # Omega = zero pattern of A, cached as a boolean mask.
        self.omega = self.A == 0

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape


def density(support_rows, support_cols, A: np.ndarray) -> float:
    """Fraction of ones in the submatrix A[support_rows, support_cols]."""
    rows = np.asarray(support_rows, dtype=int)
    cols = np.asarray(support_cols, dtype=int)
    if rows.size == 0 or cols.size == 0:
        raise InputError("support index sets must be nonempty")
    sub = binarize_entries(A)[np.ix_(rows, cols)]
    return float(sub.sum()) / (rows.size * cols.size)


def objective(X: np.ndarray, Y: np.ndarray, gamma: float) -> float:
    """Relaxed objective ||X||_* + gamma * sum(Y)."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.shape != Y.shape:
        raise InputError(f"X and Y must have the same shape, got {X.shape} vs {Y.shape}")
    nuclear = float(np.linalg.svd(X, compute_uv=False).sum())
    return nuclear + gamma * float(Y.sum())


@dataclass
class GammaRule:
    """Rule for choosing gamma.

    kinds:
      explicit             -- use ``value`` directly
      experiment-heuristic -- 6 / (m (q - p_ref))
      theorem-interval     -- geometric mean of (2, c2) / ((q - p_ref) sqrt(m n))
      adversarial          -- 1 / ((2 delta_tilde - delta - 1) sqrt(m n))
    """

    kind: str
    value: float | None = None
    q: float | None = None
    p_ref: float | None = None
    m: int | None = None
    n: int | None = None
    delta: float | None = None
    delta_tilde: float | None = None
    c2: float = 6.0


def gamma_select(rule: GammaRule) -> float:
    kind = rule.kind
    if kind == "explicit":
        if rule.value is None or rule.value <= 0:
            raise InputError(f"explicit gamma must be positive, got {rule.value}")
        return float(rule.value)
    if kind == "experiment-heuristic":
        _need(rule, "q", "p_ref", "m")
        if rule.q <= rule.p_ref:
            raise InfeasibleRuleError(f"heuristic gamma needs q > p_ref, got q={rule.q}, p_ref={rule.p_ref}")
        return 6.0 / (rule.m * (rule.q - rule.p_ref))
    if kind == "theorem-interval":
        _need(rule, "q", "p_ref", "m", "n")
        if rule.q <= rule.p_ref:
            raise InfeasibleRuleError(f"interval gamma needs q > p_ref, got q={rule.q}, p_ref={rule.p_ref}")
        scale = (rule.q - rule.p_ref) * np.sqrt(rule.m * rule.n)
        return float(np.sqrt(2.0 * rule.c2) / scale)
    if kind == "adversarial":
        _need(rule, "m", "n", "delta", "delta_tilde")
        margin = 2.0 * rule.delta_tilde - rule.delta - 1.0
        if margin <= 0:
            raise InfeasibleRuleError(
                f"adversarial gamma needs 2*delta_tilde - delta > 1, got margin {margin:g}"
            )
        return float(1.0 / (margin * np.sqrt(rule.m * rule.n)))
    raise InputError(f"unknown gamma rule kind {kind!r}")


def _need(rule: GammaRule, *names):
    missing = [nm for nm in names if getattr(rule, nm) is None]
    if missing:
        raise InputError(f"gamma rule {rule.kind!r} missing parameters: {', '.join(missing)}")

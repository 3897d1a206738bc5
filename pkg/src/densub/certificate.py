"""Dual certificates for the planted block.

Constructs the KKT multipliers (lambda, Lambda, Xi, W) certifying that the
rank-one solution supported on the candidate block is the unique optimum of
the relaxation, for both the random-model and adversarial-model
constructions, and verifies the full set of optimality conditions
numerically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleRuleError, InputError, NumericalFailureError
from .matrixio import binarize_entries, format_sig
from .model import AdversarialBudget, PlantedModelSpec

DEFAULT_TOL = 1e-6


@dataclass
class BlockCounts:
    """Ones counts of the candidate block, row-wise and column-wise."""

    mu: np.ndarray  # ones of row i (i in U1) within columns V1
    nu: np.ndarray  # ones of column j (j in V1) within rows U1

    @property
    def mu_bar(self) -> np.ndarray:
        return len(self.nu) - self.mu

    @property
    def nu_bar(self) -> np.ndarray:
        return len(self.mu) - self.nu


def block_counts(A: np.ndarray, U1, V1) -> BlockCounts:
    A = binarize_entries(A)
    U1 = np.asarray(U1, dtype=int)
    V1 = np.asarray(V1, dtype=int)
    block = A[np.ix_(U1, V1)]
    return BlockCounts(mu=block.sum(axis=1), nu=block.sum(axis=0))


@dataclass
class Certificate:
    lam: float
    lambda_bar: float
    Lambda: np.ndarray
    Xi: np.ndarray
    W: np.ndarray
    y: np.ndarray
    z: np.ndarray
    tau_used: float
    gamma_used: float
    U1: np.ndarray = None
    V1: np.ndarray = None


def yz_closed_form(mu_bar, nu_bar, gamma: float, lambda_bar: float):
    """Closed-form solution of the orthogonality system for y and z.

    y = (1/n1) (-g mu_bar + (g sum(mu_bar)/(m1+n1)) 1 + (n1^2/(m1+n1)) lb 1)
    and symmetrically for z.
    """
    mu_bar = np.asarray(mu_bar, dtype=float)
    nu_bar = np.asarray(nu_bar, dtype=float)
    m1, n1 = len(mu_bar), len(nu_bar)
    s = m1 + n1
    y = (-gamma * mu_bar + (gamma * mu_bar.sum() / s) + (n1**2 / s) * lambda_bar) / n1
    z = (-gamma * nu_bar + (gamma * nu_bar.sum() / s) + (m1**2 / s) * lambda_bar) / m1
    return y, z


def certificate_tau(p11: float, m1: int, n1: int, M: int, N: int, c_tau: float = 6.0) -> float:
    """Concentration margin added to lambda so Lambda stays nonnegative."""
    Nstar = max(M, N)
    n1star = min(m1, n1)
    sigma11_sq = p11 * (1.0 - p11)
    logN = np.log(Nstar)
    return c_tau * max(np.sqrt(sigma11_sq * logN / n1star), logN / n1star)


def _block_labels(partition, n):
    labels = np.empty(n, dtype=int)
    for b, idx in enumerate(partition):
        labels[idx] = b
    return labels


def build_random_certificate(
    A: np.ndarray,
    U1,
    V1,
    spec: PlantedModelSpec,
    gamma: float,
    c_tau: float = 6.0,
) -> Certificate:
    """Case-wise dual construction for the random planted model.

    Inside the block W is lambda_bar - Lambda (minus gamma on the zero
    pattern); in background blocks W is a centered +/- pattern scaled by
    psi_rs; in the row/column strips adjacent to the block W balances each
    column (row) exactly so that W annihilates the block indicators.
    Branches in the strips are probability-driven with a count-driven
    override at the degenerate boundaries (fully one / fully zero lines).
    """
    A = binarize_entries(A)
    M, N = A.shape
    U1 = np.asarray(U1, dtype=int)
    V1 = np.asarray(V1, dtype=int)
    m1, n1 = len(U1), len(V1)
    if gamma <= 0:
        raise InputError(f"gamma must be positive, got {gamma}")
    p11 = float(spec.probs[0, 0])
    tau = certificate_tau(p11, m1, n1, M, N, c_tau)
    root = np.sqrt(m1 * n1)
    lam = 1.0 / root + gamma * (1.0 - p11) + gamma * tau
    lambda_bar = lam - 1.0 / root

    counts = block_counts(A, U1, V1)
    y, z = yz_closed_form(counts.mu_bar, counts.nu_bar, gamma, lambda_bar)

    in_U1 = np.zeros(M, dtype=bool)
    in_U1[U1] = True
    in_V1 = np.zeros(N, dtype=bool)
    in_V1[V1] = True
    ones = A != 0

    Lambda = np.zeros((M, N))
    Lambda[np.ix_(U1, V1)] = y[:, None] + z[None, :]
    W = np.zeros((M, N))
    Xi = np.zeros((M, N))

    # Cases 1 and 2: inside the block.
    blk = np.ix_(U1, V1)
    blk_ones = ones[blk]
    W[blk] = np.where(blk_ones, lambda_bar - Lambda[blk], lambda_bar - gamma - Lambda[blk])
    Xi[blk] = np.where(blk_ones, gamma, 0.0)

    row_block = _block_labels(spec.row_partition, M)
    col_block = _block_labels(spec.col_partition, N)

    # Case 3: background blocks.
    for r in range(1, len(spec.row_partition)):
        for s in range(1, len(spec.col_partition)):
            rows = spec.row_partition[r]
            cols = spec.col_partition[s]
            p = float(spec.probs[r, s])
            psi = 1.0 if p <= 0.5 else -(1.0 - p) / p
            omega_val = 0.0 if p >= 1.0 else -p / (1.0 - p)
            sub = np.ix_(rows, cols)
            W[sub] = psi * lam * np.where(ones[sub], 1.0, omega_val)
            Xi[sub] = W[sub] - lam + gamma

    # Case 4: rows of U1, columns outside V1, handled column by column.
    nu_out = A[U1][:, ~in_V1].sum(axis=0).astype(float)  # ones per outside column within U1
    cols_out = np.flatnonzero(~in_V1)
    p_col = spec.probs[0, col_block[cols_out]].astype(float)
    low_branch = p_col <= 0.5
    # count-driven overrides at the degenerate boundaries
    low_branch = np.where(nu_out == m1, False, low_branch)
    low_branch = np.where(nu_out == 0, True, low_branch)
    ones_out = ones[np.ix_(U1, cols_out)]
    with np.errstate(divide="ignore", invalid="ignore"):
        w_low = np.where(ones_out, lam, -lam * _safe_div(nu_out, m1 - nu_out)[None, :])
        xi_low = np.where(ones_out, gamma, gamma - lam * _safe_div(m1, m1 - nu_out)[None, :])
        w_high = np.where(ones_out, lam * _safe_div(nu_out - m1, nu_out)[None, :], lam)
        xi_high = np.where(ones_out, gamma - lam * _safe_div(m1, nu_out)[None, :], gamma)
    W[np.ix_(U1, cols_out)] = np.where(low_branch[None, :], w_low, w_high)
    Xi[np.ix_(U1, cols_out)] = np.where(low_branch[None, :], xi_low, xi_high)

    # Case 5: rows outside U1, columns of V1, handled row by row.
    mu_out = A[~in_U1][:, V1].sum(axis=1).astype(float)
    rows_out = np.flatnonzero(~in_U1)
    p_row = spec.probs[row_block[rows_out], 0].astype(float)
    low_branch = p_row <= 0.5
    low_branch = np.where(mu_out == n1, False, low_branch)
    low_branch = np.where(mu_out == 0, True, low_branch)
    ones_out = ones[np.ix_(rows_out, V1)]
    with np.errstate(divide="ignore", invalid="ignore"):
        w_low = np.where(ones_out, lam, -lam * _safe_div(mu_out, n1 - mu_out)[:, None])
        xi_low = np.where(ones_out, gamma, gamma - lam * _safe_div(n1, n1 - mu_out)[:, None])
        w_high = np.where(ones_out, lam * _safe_div(mu_out - n1, mu_out)[:, None], lam)
        xi_high = np.where(ones_out, gamma - lam * _safe_div(n1, mu_out)[:, None], gamma)
    W[np.ix_(rows_out, V1)] = np.where(low_branch[:, None], w_low, w_high)
    Xi[np.ix_(rows_out, V1)] = np.where(low_branch[:, None], xi_low, xi_high)

    return Certificate(
        lam=float(lam),
        lambda_bar=float(lambda_bar),
        Lambda=Lambda,
        Xi=Xi,
        W=W,
        y=y,
        z=z,
        tau_used=float(tau),
        gamma_used=float(gamma),
        U1=U1,
        V1=V1,
    )


def _safe_div(num, den):
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    out = np.zeros(np.broadcast(num, den).shape)
    np.divide(num, den, out=out, where=den != 0)
    return out


def build_adversarial_certificate(A: np.ndarray, U1, V1, budget: AdversarialBudget) -> Certificate:
    """Dual construction for the adversarially edited model.

    gamma is pinned to 1/((2 delta_tilde - delta - 1) sqrt(m1 n1)) and
    lambda to 1/sqrt(m1 n1) + 2 (1 - delta_tilde) gamma, which keeps Lambda
    nonnegative whenever the edits respect the budget.
    """
    A = binarize_entries(A)
    M, N = A.shape
    U1 = np.asarray(U1, dtype=int)
    V1 = np.asarray(V1, dtype=int)
    m1, n1 = len(U1), len(V1)
    margin = 2.0 * budget.delta_tilde - budget.delta - 1.0
    if margin <= 0:
        raise InfeasibleRuleError(
            f"adversarial certificate needs 2*delta_tilde - delta > 1, got margin {margin:g}"
        )
    root = np.sqrt(m1 * n1)
    gamma = 1.0 / (margin * root)
    lam = 1.0 / root + 2.0 * (1.0 - budget.delta_tilde) * gamma
    lambda_bar = lam - 1.0 / root

    counts = block_counts(A, U1, V1)
    rbar11 = int(counts.mu_bar.sum())
    y = lambda_bar / 2.0 - gamma * (counts.mu_bar / n1 - rbar11 / (2.0 * m1 * n1))
    z = lambda_bar / 2.0 - gamma * (counts.nu_bar / m1 - rbar11 / (2.0 * m1 * n1))

    in_U1 = np.zeros(M, dtype=bool)
    in_U1[U1] = True
    in_V1 = np.zeros(N, dtype=bool)
    in_V1[V1] = True
    ones = A != 0

    Lambda = np.zeros((M, N))
    Lambda[np.ix_(U1, V1)] = y[:, None] + z[None, :]
    W = np.zeros((M, N))
    Xi = np.zeros((M, N))

    blk = np.ix_(U1, V1)
    blk_ones = ones[blk]
    W[blk] = np.where(blk_ones, lambda_bar - Lambda[blk], lambda_bar - gamma - Lambda[blk])
    Xi[blk] = np.where(blk_ones, gamma, 0.0)

    # Background: W carries lambda only on the ones.
    bg = np.ix_(~in_U1, ~in_V1)
    W[bg] = np.where(ones[bg], lam, 0.0)
    Xi[bg] = np.where(ones[bg], gamma, gamma - lam)

    # Column strip next to the block.
    nu_out = A[U1][:, ~in_V1].sum(axis=0).astype(float)
    cols_out = np.flatnonzero(~in_V1)
    ones_out = ones[np.ix_(U1, cols_out)]
    W[np.ix_(U1, cols_out)] = np.where(ones_out, lam, -lam * _safe_div(nu_out, m1 - nu_out)[None, :])
    Xi[np.ix_(U1, cols_out)] = np.where(
        ones_out, gamma, gamma - lam * _safe_div(m1, m1 - nu_out)[None, :]
    )

    # Row strip below the block.
    mu_out = A[~in_U1][:, V1].sum(axis=1).astype(float)
    rows_out = np.flatnonzero(~in_U1)
    ones_out = ones[np.ix_(rows_out, V1)]
    W[np.ix_(rows_out, V1)] = np.where(ones_out, lam, -lam * _safe_div(mu_out, n1 - mu_out)[:, None])
    Xi[np.ix_(rows_out, V1)] = np.where(
        ones_out, gamma, gamma - lam * _safe_div(n1, n1 - mu_out)[:, None]
    )

    return Certificate(
        lam=float(lam),
        lambda_bar=float(lambda_bar),
        Lambda=Lambda,
        Xi=Xi,
        W=W,
        y=y,
        z=z,
        tau_used=0.0,
        gamma_used=float(gamma),
        U1=U1,
        V1=V1,
    )


def spectral_norm(W: np.ndarray, rel_tol: float = 1e-8, maxiter: int = 500) -> float:
    """Largest singular value via power iteration, SVD fallback for small W."""
    W = np.asarray(W, dtype=float)
    if not np.all(np.isfinite(W)):
        raise NumericalFailureError("non-finite entries in spectral norm computation")
    if W.size == 0:
        return 0.0
    rng = np.random.default_rng(0)
    v = rng.standard_normal(W.shape[1])
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(maxiter):
        u = W @ v
        nu = np.linalg.norm(u)
        if nu == 0:
            return 0.0
        v = W.T @ (u / nu)
        new_sigma = np.linalg.norm(v)
        if new_sigma == 0:
            return 0.0
        v /= new_sigma
        if abs(new_sigma - sigma) <= rel_tol * max(new_sigma, 1e-300):
            return float(new_sigma)
        sigma = new_sigma
    if max(W.shape) <= 2000:
        return float(np.linalg.svd(W, compute_uv=False)[0])
    return float(sigma)


@dataclass
class VerificationReport:
    """Per-condition values with thresholds and flags; pass = all checks hold."""

    checks: dict = field(default_factory=dict)  # name -> (value, threshold, ok)

    @property
    def passed(self) -> bool:
        return all(ok for _, _, ok in self.checks.values())

    def lines(self) -> list[str]:
        out = []
        for name, (value, threshold, ok) in self.checks.items():
            out.append(f"{name} = {format_sig(value)} {format_sig(threshold)} {'pass' if ok else 'fail'}")
        out.append(f"overall = {'pass' if self.passed else 'fail'}")
        return out

    def __str__(self) -> str:
        return "\n".join(self.lines()) + "\n"


def verify_kkt(
    A: np.ndarray,
    X_bar: np.ndarray,
    Y_bar: np.ndarray,
    cert: Certificate,
    tol: float = DEFAULT_TOL,
) -> VerificationReport:
    """Check stationarity, complementary slackness, orthogonality,
    the spectral bound on W, and the sign constraints."""
    A = binarize_entries(A)
    M, N = A.shape
    X_bar = np.asarray(X_bar, dtype=float)
    Y_bar = np.asarray(Y_bar, dtype=float)
    for name, mat in (("X_bar", X_bar), ("Y_bar", Y_bar), ("Lambda", cert.Lambda), ("Xi", cert.Xi), ("W", cert.W)):
        if mat.shape != (M, N):
            raise InputError(f"{name} has shape {mat.shape}, expected {(M, N)}")

    u = (X_bar.max(axis=1) > 0.5).astype(float)
    v = (X_bar.max(axis=0) > 0.5).astype(float)
    m1, n1 = int(u.sum()), int(v.sum())
    root = np.sqrt(max(m1 * n1, 1))

    stat = np.outer(u, v) / root + cert.W - cert.lam + cert.gamma_used - cert.Xi + cert.Lambda
    slack_box = float(np.tensordot(cert.Lambda, X_bar - 1.0, axes=2))
    slack_y = float(np.tensordot(cert.Xi, Y_bar, axes=2))
    wtu = cert.W.T @ u
    wv = cert.W @ v
    norm_w = spectral_norm(cert.W)

    report = VerificationReport()
    report.checks["stationarity_max_abs"] = (float(np.abs(stat).max()), tol, bool(np.abs(stat).max() <= tol))
    report.checks["slackness_box"] = (abs(slack_box), tol, abs(slack_box) <= tol)
    report.checks["slackness_omega"] = (abs(slack_y), tol, abs(slack_y) <= tol)
    report.checks["orthogonality_rows"] = (float(np.abs(wtu).max()), tol, bool(np.abs(wtu).max() <= tol))
    report.checks["orthogonality_cols"] = (float(np.abs(wv).max()), tol, bool(np.abs(wv).max() <= tol))
    report.checks["spectral_norm_W"] = (norm_w, 1.0, norm_w < 1.0)
    report.checks["min_Lambda"] = (float(cert.Lambda.min()), -tol, bool(cert.Lambda.min() >= -tol))
    report.checks["min_Xi"] = (float(cert.Xi.min()), -tol, bool(cert.Xi.min() >= -tol))
    report.checks["lambda_nonneg"] = (cert.lam, 0.0, cert.lam >= 0.0)
    return report

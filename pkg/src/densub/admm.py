"""Multi-block ADMM solver for the nuclear-norm relaxation.

Five primal blocks (X, Y, Q, W, Z) updated Gauss-Seidel style with three
dual multipliers.  Q carries the off-support copy constraint X - Y = Q
(zero on the zero pattern of A), W enforces the total-mass constraint
sum(X) = m*n, and Z keeps the entries in [0, 1].
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, NumericalFailureError
from .relaxation import ProblemInstance

_NORM_FLOOR = 1e-12


@dataclass
class SolveConfig:
    m: int
    n: int
    gamma: float
    tau: float = 2.0
    epsilon: float = 1e-4
    maxiter: int = 2000
    time_limit: float | None = None

    def __post_init__(self):
        if self.tau <= 0:
            raise InputError(f"tau must be positive, got {self.tau}")
        if self.epsilon <= 0:
            raise InputError(f"epsilon must be positive, got {self.epsilon}")
        if self.maxiter < 1:
            raise InputError(f"maxiter must be >= 1, got {self.maxiter}")
        if self.gamma <= 0:
            raise InputError(f"gamma must be positive, got {self.gamma}")


@dataclass
class SolveResult:
    X: np.ndarray
    Y: np.ndarray
    Q: np.ndarray
    iterations: int
    primal_residuals: list = field(default_factory=list)
    dual_residuals: list = field(default_factory=list)
    converged: bool = False
    seconds: float = 0.0


def soft_threshold(x, phi: float):
    """Elementwise shrinkage toward zero by phi."""
    if phi < 0:
        raise InputError(f"threshold must be nonnegative, got {phi}")
    return np.sign(x) * np.maximum(np.abs(x) - phi, 0.0)


def matrix_shrink(Mt: np.ndarray, phi: float) -> np.ndarray:
    """Singular value soft-thresholding: shrink each singular value by phi."""
    if phi < 0:
        raise InputError(f"threshold must be nonnegative, got {phi}")
    try:
        U, sigma, Vt = np.linalg.svd(Mt, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(f"SVD failed in matrix_shrink: {exc}") from exc
    shrunk = np.maximum(sigma - phi, 0.0)
    return (U * shrunk) @ Vt


def update_Q(X, Y, LambdaQ, mu: float, A: np.ndarray) -> np.ndarray:
    """Copy step for the off-support constraint; zero pattern of A is masked out."""
    return (X - Y + mu * LambdaQ) * (np.asarray(A) != 0)


def update_W(X, LambdaW, mu: float, m: int, n: int) -> np.ndarray:
    """Uniform shift so the entry sum equals m*n exactly."""
    W = X + mu * LambdaW
    W = W + (m * n - W.sum()) / W.size
    return W


def update_Z(X, LambdaZ, mu: float) -> np.ndarray:
    """Clamp to the box [0, 1]."""
    return np.clip(X + mu * LambdaZ, 0.0, 1.0)


def solve(instance: ProblemInstance, config: SolveConfig) -> SolveResult:
    """Run the ADMM cycle until both residuals fall below epsilon.

    Residuals are normalized by max(||X||_F, 1e-12).  Raises
    NumericalFailureError if any iterate turns non-finite.
    """
    A = instance.A
    M, N = A.shape
    m, n, gamma = config.m, config.n, config.gamma
    tau = config.tau
    mu = 1.0 / tau
    mask = A != 0
    ones_shift = gamma * mu

    start = time.monotonic()
    init = m * n / (M * N)
    X = np.full((M, N), init)
    Y = np.full((M, N), init)
    Q = np.full((M, N), init)
    W = np.full((M, N), init)
    Z = np.full((M, N), init)
    LQ = np.zeros((M, N))
    LW = np.zeros((M, N))
    LZ = np.zeros((M, N))

    primal_hist: list[float] = []
    dual_hist: list[float] = []
    converged = False
    it = 0
    for it in range(1, config.maxiter + 1):
        Z_old, W_old, Q_old = Z, W, Q

        Q = (X - Y + mu * LQ) * mask
        X = matrix_shrink((Y + Q + Z + W - mu * (LQ + LW + LZ)) / 3.0, 1.0 / (3.0 * tau))
        Y = np.maximum(X - Q - ones_shift + mu * LQ, 0.0)
        W = X + mu * LW
        W = W + (m * n - W.sum()) / (M * N)
        Z = np.clip(X + mu * LZ, 0.0, 1.0)

        LQ = LQ + tau * (X - Y - Q)
        LW = LW + tau * (X - W)
        LZ = LZ + tau * (X - Z)

        norm = max(np.linalg.norm(X), _NORM_FLOOR)
        eps_p = max(
            np.linalg.norm(X - Z),
            np.linalg.norm(X - W),
            np.linalg.norm(X - Y - Q),
        ) / norm
        eps_d = max(
            np.linalg.norm(Z - Z_old),
            np.linalg.norm(W - W_old),
            np.linalg.norm(Q - Q_old),
        ) / norm
        primal_hist.append(float(eps_p))
        dual_hist.append(float(eps_d))

        if not np.isfinite(eps_p) or not np.isfinite(eps_d):
            raise NumericalFailureError(f"non-finite residuals at iteration {it}")
        if eps_p < config.epsilon and eps_d < config.epsilon:
            converged = True
            break
        if config.time_limit is not None and time.monotonic() - start > config.time_limit:
            break

    return SolveResult(
        X=X,
        Y=Y,
        Q=Q,
        iterations=it,
        primal_residuals=primal_hist,
        dual_residuals=dual_hist,
        converged=converged,
        seconds=time.monotonic() - start,
    )

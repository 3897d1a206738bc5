"""Request/response models for the HTTP API.

Matrices and config files travel as text blobs in the package's own file
formats, so the CLI and the service share one canonical serialization.
"""

from __future__ import annotations

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    version: str


class SampleRequest(BaseModel):
    spec: dict[str, str] = Field(description="flat key-value model spec entries")
    seed: int = 0


class SampleResponse(BaseModel):
    matrix: str
    truth: dict


class SolveRequest(BaseModel):
    matrix: str
    m: int
    n: int
    gamma: float | None = None
    gamma_rule: dict[str, str] | None = None
    tau: float = 2.0
    epsilon: float = 1e-4
    maxiter: int = 2000
    time_limit: float | None = None
    return_x: bool = False
    return_y: bool = False


class SolveResponse(BaseModel):
    iterations: int
    converged: bool
    seconds: float
    gamma: float
    primal_residual: float
    dual_residual: float
    objective: float
    nuclear_norm: float
    support_rows: list[int]
    support_cols: list[int]
    support_count: int
    X: str | None = None
    Y: str | None = None


class CertifyRequest(BaseModel):
    matrix: str
    rows: list[int] = Field(description="candidate block rows, 1-based")
    cols: list[int] = Field(description="candidate block columns, 1-based")
    mode: str = "random"
    spec: dict[str, str] | None = None
    gamma: float | None = None
    c_tau: float = 6.0
    budget: dict[str, str] | None = None
    tol: float = 1e-6


class CertifyResponse(BaseModel):
    passed: bool
    lam: float
    gamma: float
    tau: float
    report: list[str]
    checks: dict[str, list]


class OracleRequest(BaseModel):
    matrix: str
    m: int
    n: int
    tie_cap: int = 64


class OracleResponse(BaseModel):
    best_rows: list[int]
    best_cols: list[int]
    best_count: int
    ties: int
    ties_truncated: bool


class ConditionsRequest(BaseModel):
    variant: str = "random"
    spec: dict[str, str] | None = None
    budget: dict[str, str] | None = None
    m1: int | None = None
    n1: int | None = None
    constant: float = 1.0


class ConditionsResponse(BaseModel):
    passed: bool
    report: list[str]


class CliqueRequest(BaseModel):
    edges: str = Field(description="edge list file contents")
    m: int
    threshold: float = 0.0
    two_walk: bool = False
    gamma: float | None = None
    tau: float = 2.0
    epsilon: float = 1e-4
    maxiter: int = 2000
    return_x: bool = False


class CliqueResponse(BaseModel):
    members: list[str]
    verified: bool
    degenerate_rounding: bool
    iterations: int
    repairs: int
    X: str | None = None


class GridRequest(BaseModel):
    config: dict[str, str] = Field(description="flat key-value grid config entries")
    jobs: int = 1
    done: list[list[float]] = Field(default_factory=list, description="(q, m, trial) keys to skip")


class GridResponse(BaseModel):
    records: list[dict]
    counts: list[dict]

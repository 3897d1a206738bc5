"""FastAPI application exposing the solver pipeline.

Input errors surface as HTTP 422, numerical failures as HTTP 500 with a
``numerical-failure`` marker; the CLI maps these back onto its exit codes.
"""

from __future__ import annotations

import io

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import __version__
from ..admm import SolveConfig, solve
from ..bounds import (
    check_adversarial_conditions,
    check_balanced_conditions,
    check_random_conditions,
)
from ..certificate import build_adversarial_certificate, build_random_certificate, verify_kkt
from ..errors import InputError, NumericalFailureError
from ..experiments import grid_config_from_keyvalues, run_grid
from ..matrixio import loads_matrix
from ..model import budget_from_config, sample_psm, spec_from_config
from ..networks import binarize, find_max_clique_via_relaxation, loads_edge_list, two_walk_closure
from ..oracle import densest_submatrix_bruteforce
from ..relaxation import GammaRule, ProblemInstance, gamma_select, objective
from . import schemas

app = FastAPI(title="densub", version=__version__)


def _guard(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except InputError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    except NumericalFailureError as exc:
        raise HTTPException(status_code=500, detail=f"numerical-failure: {exc}") from exc


def _dense_text(A) -> str:
    M, N = A.shape
    lines = [f"{M} {N}"]
    lines.extend(" ".join(str(int(round(v))) for v in row) for row in np.asarray(A))
    return "\n".join(lines) + "\n"


def _real_text(X) -> str:
    buf = io.StringIO()
    M, N = X.shape
    buf.write(f"# real {M} {N}\n")
    for row in X:
        buf.write(" ".join(f"{v:.11e}" for v in row) + "\n")
    return buf.getvalue()


@app.get("/health", response_model=schemas.HealthResponse)
def health():
    return schemas.HealthResponse(status="ok", version=__version__)


@app.post("/sample", response_model=schemas.SampleResponse)
def sample(req: schemas.SampleRequest):
    def work():
        spec = spec_from_config(req.spec)
        A, truth = sample_psm(spec, req.seed)
        return schemas.SampleResponse(matrix=_dense_text(A), truth=truth.manifest({"seed": req.seed}))

    return _guard(work)


def _pick_gamma(req: schemas.SolveRequest) -> float:
    if req.gamma is not None:
        return gamma_select(GammaRule("explicit", value=req.gamma))
    if req.gamma_rule is None:
        raise InputError("either gamma or gamma_rule must be given")
    entries = dict(req.gamma_rule)
    kind = entries.pop("kind", "explicit")
    numeric = {}
    for key, value in entries.items():
        numeric[key] = int(value) if key in ("m", "n") else float(value)
    return gamma_select(GammaRule(kind, **numeric))


@app.post("/solve", response_model=schemas.SolveResponse)
def solve_endpoint(req: schemas.SolveRequest):
    def work():
        A = loads_matrix(req.matrix)
        gamma = _pick_gamma(req)
        instance = ProblemInstance(A, req.m, req.n)
        cfg = SolveConfig(
            m=req.m,
            n=req.n,
            gamma=gamma,
            tau=req.tau,
            epsilon=req.epsilon,
            maxiter=req.maxiter,
            time_limit=req.time_limit,
        )
        res = solve(instance, cfg)
        rounded = np.rint(res.X)
        rows = [int(i) + 1 for i in np.flatnonzero(rounded.sum(axis=1) > 0)]
        cols = [int(j) + 1 for j in np.flatnonzero(rounded.sum(axis=0) > 0)]
        count = int(A[np.ix_([r - 1 for r in rows], [c - 1 for c in cols])].sum()) if rows and cols else 0
        return schemas.SolveResponse(
            iterations=res.iterations,
            converged=res.converged,
            seconds=res.seconds,
            gamma=gamma,
            primal_residual=res.primal_residuals[-1],
            dual_residual=res.dual_residuals[-1],
            objective=objective(res.X, res.Y, gamma),
            nuclear_norm=float(np.linalg.svd(res.X, compute_uv=False).sum()),
            support_rows=rows,
            support_cols=cols,
            support_count=count,
            X=_real_text(res.X) if req.return_x else None,
            Y=_real_text(res.Y) if req.return_y else None,
        )

    return _guard(work)


@app.post("/certify", response_model=schemas.CertifyResponse)
def certify(req: schemas.CertifyRequest):
    def work():
        A = loads_matrix(req.matrix)
        U1 = np.asarray(req.rows, dtype=int) - 1
        V1 = np.asarray(req.cols, dtype=int) - 1
        if len(U1) == 0 or len(V1) == 0:
            raise InputError("candidate block must be nonempty")
        if req.mode == "random":
            if req.spec is None:
                raise InputError("random certification requires a model spec")
            spec = spec_from_config(req.spec)
            gamma = req.gamma
            if gamma is None:
                p11 = float(spec.probs[0, 0])
                p_star = float(
                    max(
                        spec.probs[r, s]
                        for r in range(spec.probs.shape[0])
                        for s in range(spec.probs.shape[1])
                        if (r, s) != (0, 0)
                    )
                )
                gamma = gamma_select(
                    GammaRule("theorem-interval", q=p11, p_ref=p_star, m=len(U1), n=len(V1))
                )
            cert = build_random_certificate(A, U1, V1, spec, gamma, req.c_tau)
        elif req.mode == "adversarial":
            if req.budget is None:
                raise InputError("adversarial certification requires a budget")
            cert = build_adversarial_certificate(A, U1, V1, budget_from_config(req.budget))
        else:
            raise InputError(f"unknown certification mode {req.mode!r}")
        X_bar = np.zeros(A.shape)
        X_bar[np.ix_(U1, V1)] = 1.0
        Y_bar = X_bar * (A == 0)
        report = verify_kkt(A, X_bar, Y_bar, cert, tol=req.tol)
        return schemas.CertifyResponse(
            passed=report.passed,
            lam=cert.lam,
            gamma=cert.gamma_used,
            tau=cert.tau_used,
            report=report.lines(),
            checks={k: [float(v[0]), float(v[1]), bool(v[2])] for k, v in report.checks.items()},
        )

    return _guard(work)


@app.post("/oracle", response_model=schemas.OracleResponse)
def oracle_endpoint(req: schemas.OracleRequest):
    def work():
        A = loads_matrix(req.matrix)
        res = densest_submatrix_bruteforce(A, req.m, req.n, tie_cap=req.tie_cap)
        return schemas.OracleResponse(
            best_rows=[int(i) + 1 for i in res.best_rows],
            best_cols=[int(j) + 1 for j in res.best_cols],
            best_count=res.best_count,
            ties=len(res.ties),
            ties_truncated=res.ties_truncated,
        )

    return _guard(work)


@app.post("/conditions", response_model=schemas.ConditionsResponse)
def conditions(req: schemas.ConditionsRequest):
    def work():
        if req.variant in ("random", "balanced"):
            if req.spec is None:
                raise InputError(f"{req.variant} conditions require a model spec")
            spec = spec_from_config(req.spec)
            check = check_random_conditions if req.variant == "random" else check_balanced_conditions
            report = check(spec, req.constant)
        elif req.variant == "adversarial":
            if req.budget is None or req.m1 is None or req.n1 is None:
                raise InputError("adversarial conditions require a budget and block sizes")
            report = check_adversarial_conditions(
                budget_from_config(req.budget), req.m1, req.n1, req.constant
            )
        else:
            raise InputError(f"unknown conditions variant {req.variant!r}")
        return schemas.ConditionsResponse(passed=report.passed, report=report.lines())

    return _guard(work)


@app.post("/clique", response_model=schemas.CliqueResponse)
def clique(req: schemas.CliqueRequest):
    def work():
        g = loads_edge_list(req.edges)
        g = binarize(g, req.threshold)
        if req.two_walk:
            g = two_walk_closure(g)
        result = find_max_clique_via_relaxation(
            g, req.m, gamma=req.gamma, tau=req.tau, epsilon=req.epsilon, maxiter=req.maxiter
        )
        return schemas.CliqueResponse(
            members=[str(v) for v in result.members],
            verified=result.verified,
            degenerate_rounding=result.degenerate_rounding,
            iterations=result.iterations,
            repairs=result.repairs,
            X=_real_text(result.X) if req.return_x else None,
        )

    return _guard(work)


@app.post("/grid", response_model=schemas.GridResponse)
def grid(req: schemas.GridRequest):
    def work():
        config = grid_config_from_keyvalues(req.config)
        done = {(float(q), int(m), int(t)) for q, m, t in req.done}
        result = run_grid(config, jobs=max(1, req.jobs), done=done)
        counts = [
            {"q": q, "m": m, "count": c} for (q, m), c in sorted(result.counts().items())
        ]
        return schemas.GridResponse(records=result.records, counts=counts)

    return _guard(work)

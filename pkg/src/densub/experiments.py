"""Phase-transition experiments and recovery bookkeeping.

Runs grids of (density q, block size m) cells, ten trials each by default,
and records per-trial recovery, iteration counts, and runtimes.  Output
formats: per-trial CSV, aggregate counts CSV, and a PGM heatmap.
"""

from __future__ import annotations

import csv
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .admm import SolveConfig, solve
from .errors import InputError, NumericalFailureError
from .model import experiment1_spec, experiment2_spec, sample_psm
from .relaxation import GammaRule, ProblemInstance, gamma_select
from .rng import derive_seed

CSV_HEADER = ["q", "m", "trial", "seed", "recovered", "iters", "seconds"]


def recovered(X: np.ndarray, X0: np.ndarray) -> bool:
    """Entrywise rounding followed by the relative Frobenius test at 1e-3."""
    X = np.asarray(X, dtype=float)
    X0 = np.asarray(X0, dtype=float)
    if X.shape != X0.shape:
        raise InputError(f"shape mismatch: {X.shape} vs {X0.shape}")
    denom = np.linalg.norm(X0)
    if denom == 0:
        raise InputError("ground truth X0 must be nonzero")
    return bool(np.linalg.norm(np.rint(X) - X0) / denom < 1e-3)


def round_topk_diagonal(X: np.ndarray, m: int):
    """Indices of the m largest diagonal entries (ties -> smallest index).

    Returns (indices, degenerate) where degenerate flags an all-zero
    diagonal, in which case the first m indices are returned.
    """
    X = np.asarray(X, dtype=float)
    d = np.diag(X)
    if m < 1 or m > len(d):
        raise InputError(f"m={m} out of range for a diagonal of length {len(d)}")
    if np.all(d == 0):
        return np.arange(m), True
    order = np.argsort(-d, kind="stable")  # stable sort keeps smaller indices first on ties
    return np.sort(order[:m]), False


@dataclass
class GridConfig:
    q_values: list
    m_values: list
    M: int = 200
    trials: int = 10
    experiment: int = 1
    tau: float = 2.0
    epsilon: float = 1e-4
    maxiter: int = 2000
    gamma_rule: str = "experiment-heuristic"
    gamma_value: float | None = None
    master_seed: int = 0
    time_limit: float = 300.0

    def __post_init__(self):
        if self.trials < 1:
            raise InputError(f"trials must be >= 1, got {self.trials}")
        if any(not (0 < q <= 1) for q in self.q_values):
            raise InputError("all q values must lie in (0, 1]")
        if self.experiment not in (1, 2):
            raise InputError(f"experiment must be 1 or 2, got {self.experiment}")


@dataclass
class RecoveryGrid:
    config: GridConfig
    records: list = field(default_factory=list)

    def counts(self) -> dict:
        table: dict[tuple, int] = {}
        for rec in self.records:
            key = (rec["q"], rec["m"])
            table[key] = table.get(key, 0) + int(rec["recovered"])
        return table

    def cell_stats(self) -> dict:
        """Per-cell mean iteration count and runtime."""
        sums: dict[tuple, list] = {}
        for rec in self.records:
            key = (rec["q"], rec["m"])
            agg = sums.setdefault(key, [0, 0.0, 0.0])
            agg[0] += 1
            agg[1] += rec["iters"]
            agg[2] += rec["seconds"]
        return {k: (v[1] / v[0], v[2] / v[0]) for k, v in sums.items()}


def trial_seed(master_seed: int, q: float, m: int, trial: int) -> int:
    """Order-insensitive per-trial seed: cells hash the same regardless of
    execution schedule."""
    return derive_seed(master_seed, int(round(q * 1e9)), m, trial)


def _grid_gamma(config: GridConfig, spec, q: float, m: int) -> float:
    if config.gamma_rule == "explicit":
        return gamma_select(GammaRule("explicit", value=config.gamma_value))
    probs = spec.probs
    p_ref = float(min(probs[r, s] for r in range(probs.shape[0]) for s in range(probs.shape[1]) if (r, s) != (0, 0)))
    if config.experiment == 2:
        p_ref = 0.25
    rule = GammaRule(config.gamma_rule, q=q, p_ref=p_ref, m=m, n=m)
    return gamma_select(rule)


def run_trial(config: GridConfig, q: float, m: int, trial: int) -> dict:
    """One sampled instance: solve and record the recovery outcome.

    Solver failures and wall-clock timeouts are recorded as non-recovery.
    """
    seed = trial_seed(config.master_seed, q, m, trial)
    maker = experiment1_spec if config.experiment == 1 else experiment2_spec
    spec = maker(q, m, config.M)
    A, truth = sample_psm(spec, seed)
    gamma = _grid_gamma(config, spec, q, m)
    solve_cfg = SolveConfig(
        m=m,
        n=m,
        gamma=gamma,
        tau=config.tau,
        epsilon=config.epsilon,
        maxiter=config.maxiter,
        time_limit=config.time_limit,
    )
    record = {
        "q": float(q),
        "m": int(m),
        "trial": int(trial),
        "seed": int(seed),
        "recovered": False,
        "iters": 0,
        "seconds": 0.0,
        "gamma": gamma,
        "nuclear_rounded": 0.0,
        "objective_truth": 0.0,
        "objective_analytic": 0.0,
    }
    try:
        res = solve(ProblemInstance(A, m, m), solve_cfg)
    except NumericalFailureError:
        return record
    record["iters"] = res.iterations
    record["seconds"] = res.seconds
    timed_out = (
        config.time_limit is not None and not res.converged and res.seconds >= config.time_limit
    )
    X0 = truth.X0
    record["recovered"] = (not timed_out) and recovered(res.X, X0)
    if record["recovered"]:
        record["nuclear_rounded"] = float(np.linalg.svd(np.rint(res.X), compute_uv=False).sum())
        block_zeros = int((A[np.ix_(truth.planted_rows, truth.planted_cols)] == 0).sum())
        Y_bar = X0 * (A == 0)
        nuclear_truth = float(np.linalg.svd(X0, compute_uv=False).sum())
        record["objective_truth"] = nuclear_truth + gamma * float(Y_bar.sum())
        record["objective_analytic"] = float(np.sqrt(m * m)) + gamma * block_zeros
    return record


def _worker(args):
    config, q, m, trial = args
    return run_trial(config, q, m, trial)


def run_grid(config: GridConfig, jobs: int = 1, done: set | None = None) -> RecoveryGrid:
    """Run all grid cells, optionally skipping (q, m, trial) keys in ``done``.

    Results are accumulated in deterministic (q, m, trial) order regardless
    of how many workers executed them.
    """
    done = done or set()
    tasks = [
        (config, float(q), int(m), t)
        for q in config.q_values
        for m in config.m_values
        for t in range(config.trials)
        if (float(q), int(m), t) not in done
    ]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_worker, tasks))
    else:
        results = [_worker(t) for t in tasks]
    records = sorted(results, key=lambda r: (r["q"], r["m"], r["trial"]))
    return RecoveryGrid(config=config, records=records)


def write_records_csv(path, records, append: bool = False) -> None:
    mode = "a" if append and os.path.exists(path) else "w"
    with open(path, mode, newline="") as fh:
        writer = csv.writer(fh)
        if mode == "w":
            writer.writerow(CSV_HEADER)
        for rec in records:
            writer.writerow(
                [
                    repr(rec["q"]),
                    rec["m"],
                    rec["trial"],
                    rec["seed"],
                    int(rec["recovered"]),
                    rec["iters"],
                    f"{rec['seconds']:.6f}",
                ]
            )


def read_records_csv(path) -> list[dict]:
    records = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CSV_HEADER:
            raise InputError(f"unexpected CSV header in {path}: {header}")
        for row in reader:
            if not row:
                continue
            if len(row) != len(CSV_HEADER):
                raise InputError(f"malformed CSV row in {path}: {row}")
            records.append(
                {
                    "q": float(row[0]),
                    "m": int(row[1]),
                    "trial": int(row[2]),
                    "seed": int(row[3]),
                    "recovered": bool(int(row[4])),
                    "iters": int(row[5]),
                    "seconds": float(row[6]),
                }
            )
    return records


def write_counts_csv(path, grid: RecoveryGrid) -> None:
    counts = grid.counts()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["q", "m", "count"])
        for q in grid.config.q_values:
            for m in grid.config.m_values:
                writer.writerow([repr(float(q)), int(m), counts.get((float(q), int(m)), 0)])


def write_pgm(path, grid: RecoveryGrid) -> None:
    """One pixel per cell; 0 = no recoveries, 255 = all trials recovered."""
    counts = grid.counts()
    qs = [float(q) for q in grid.config.q_values]
    ms = [int(m) for m in grid.config.m_values]
    trials = grid.config.trials
    with open(path, "w") as fh:
        fh.write("P2\n")
        fh.write(f"{len(ms)} {len(qs)}\n255\n")
        for q in qs:
            row = [str(round(255 * counts.get((q, m), 0) / trials)) for m in ms]
            fh.write(" ".join(row) + "\n")


def grid_config_from_keyvalues(entries: dict) -> GridConfig:
    """Build a GridConfig from a flat key-value config file."""
    try:
        cfg = GridConfig(
            q_values=[float(v) for v in entries["q_values"].split()],
            m_values=[int(v) for v in entries["m_values"].split()],
            M=int(entries.get("M", 200)),
            trials=int(entries.get("trials", 10)),
            experiment=int(entries.get("experiment", 1)),
            tau=float(entries.get("tau", 2.0)),
            epsilon=float(entries.get("epsilon", 1e-4)),
            maxiter=int(entries.get("maxiter", 2000)),
            gamma_rule=entries.get("gamma_rule", "experiment-heuristic"),
            gamma_value=float(entries["gamma_value"]) if "gamma_value" in entries else None,
            master_seed=int(entries.get("master_seed", 0)),
            time_limit=float(entries.get("time_limit", 300.0)),
        )
    except KeyError as exc:
        raise InputError(f"grid config missing key {exc}") from exc
    except ValueError as exc:
        raise InputError(f"bad grid config value: {exc}") from exc
    return cfg


def with_master_seed(config: GridConfig, seed: int) -> GridConfig:
    return replace(config, master_seed=seed)

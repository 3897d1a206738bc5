"""Real-network ingestion and the max-clique pipeline.

Weighted edge lists are binarized at a threshold, optionally closed under
length-2 walks, and fed to the relaxation solver with the diagonal set to
one so a k-clique appears as a dense k x k block.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .admm import SolveConfig, solve
from .errors import InputError
from .experiments import round_topk_diagonal
from .relaxation import ProblemInstance


@dataclass
class Graph:
    """Undirected weighted graph with stable node labels."""

    labels: list
    weights: np.ndarray  # symmetric, nonnegative

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        n = len(self.labels)
        if self.weights.shape != (n, n):
            raise InputError(f"weight matrix shape {self.weights.shape} does not match {n} labels")
        if not np.array_equal(self.weights, self.weights.T):
            raise InputError("weight matrix must be symmetric")
        if np.any(self.weights < 0):
            raise InputError("edge weights must be nonnegative")

    @property
    def n(self) -> int:
        return len(self.labels)

    def adjacency(self) -> np.ndarray:
        return (self.weights != 0).astype(np.int8)


def load_edge_list(path) -> Graph:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot open edge list {path}: {exc}") from exc
    return loads_edge_list(text, source=str(path))


def loads_edge_list(text: str, source: str = "<edges>") -> Graph:
    """Parse "u v" / "u v w" lines (whitespace or comma separated).

    '#' comments are skipped; duplicate edges keep the maximum weight;
    node order follows first appearance.
    """
    labels: list = []
    index: dict = {}
    edges: list[tuple[int, int, float]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        if len(parts) not in (2, 3):
            raise InputError(f"{source}:{lineno}: expected 'u v' or 'u v w', got {raw.strip()!r}")
        u, v = parts[0], parts[1]
        if len(parts) == 3:
            try:
                w = float(parts[2])
            except ValueError as exc:
                raise InputError(f"{source}:{lineno}: bad weight {parts[2]!r}") from exc
        else:
            w = 1.0
        if w < 0:
            raise InputError(f"{source}:{lineno}: negative weight {w}")
        for node in (u, v):
            if node not in index:
                index[node] = len(labels)
                labels.append(node)
        edges.append((index[u], index[v], w))
    n = len(labels)
    weights = np.zeros((n, n))
    for i, j, w in edges:
        if i == j:
            continue
        weights[i, j] = max(weights[i, j], w)
        weights[j, i] = weights[i, j]
    return Graph(labels=labels, weights=weights)


def binarize(g: Graph, t: float = 0.0) -> Graph:
    """Keep edges with weight strictly greater than t."""
    return Graph(labels=list(g.labels), weights=(g.weights > t).astype(float))


def two_walk_closure(g: Graph) -> Graph:
    """Connect u and v when they are adjacent or joined by a length-2 walk.

    The diagonal of the result is zeroed: u~u walks through any neighbor
    are not edges.
    """
    A = g.adjacency().astype(int)
    closed = ((A + A @ A) >= 1).astype(float)
    np.fill_diagonal(closed, 0.0)
    return Graph(labels=list(g.labels), weights=closed)


@dataclass
class CliqueResult:
    members: list
    indices: np.ndarray
    verified: bool
    degenerate_rounding: bool
    X: np.ndarray
    iterations: int
    repairs: int = 0


def _is_clique(A: np.ndarray, idx: np.ndarray) -> bool:
    sub = A[np.ix_(idx, idx)]
    off = sub.sum() - np.trace(sub)
    k = len(idx)
    return bool(off == k * (k - 1))


def find_max_clique_via_relaxation(
    g: Graph,
    m: int,
    gamma: float | None = None,
    tau: float = 2.0,
    epsilon: float = 1e-4,
    maxiter: int = 2000,
) -> CliqueResult:
    """Solve the relaxation on the adjacency with unit diagonal and round.

    gamma defaults to 12/m.  The m largest diagonal entries of X give the
    candidate; if it fails the cliqueness check, lowest-scoring members are
    greedily swapped for the best outside candidates (at most m swaps).
    """
    if m < 2:
        raise InputError(f"clique size must be >= 2, got {m}")
    if m > g.n:
        raise InputError(f"clique size {m} exceeds the graph's {g.n} nodes")
    if gamma is None:
        gamma = 12.0 / m
    A = g.adjacency().astype(np.int8)
    A_solver = A.copy()
    np.fill_diagonal(A_solver, 1)
    instance = ProblemInstance(A_solver, m, m)
    res = solve(instance, SolveConfig(m=m, n=m, gamma=gamma, tau=tau, epsilon=epsilon, maxiter=maxiter))
    idx, degenerate = round_topk_diagonal(res.X, m)
    verified = _is_clique(A, idx)

    repairs = 0
    if not verified:
        idx, verified, repairs = _greedy_repair(A, res.X, idx, m)

    return CliqueResult(
        members=[g.labels[i] for i in idx],
        indices=np.asarray(idx),
        verified=verified,
        degenerate_rounding=degenerate,
        X=res.X,
        iterations=res.iterations,
        repairs=repairs,
    )


def _greedy_repair(A: np.ndarray, X: np.ndarray, idx: np.ndarray, m: int):
    """Swap the weakest members for the highest-scoring outside nodes until
    the set is a clique or the swap budget (m) is exhausted."""
    current = list(idx)
    diag = np.diag(X)
    repairs = 0
    for _ in range(m):
        if _is_clique(A, np.asarray(current)):
            return np.asarray(sorted(current)), True, repairs
        sub = A[np.ix_(current, current)]
        internal_degree = sub.sum(axis=1) - np.diag(sub)
        worst_pos = int(np.argmin(internal_degree + 1e-9 * diag[current]))
        worst = current[worst_pos]
        outside = [v for v in range(A.shape[0]) if v not in current]
        # prefer outside nodes adjacent to all remaining members
        remaining = [v for v in current if v != worst]
        best, best_score = None, (-1, -np.inf)
        for v in outside:
            adj = int(A[v, remaining].sum())
            score = (adj, diag[v])
            if score > best_score:
                best, best_score = v, score
        if best is None:
            break
        current[worst_pos] = best
        repairs += 1
    return np.asarray(sorted(current)), _is_clique(A, np.asarray(current)), repairs

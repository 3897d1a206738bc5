"""Exact reference computations for small instances.

Brute-force densest m x n submatrix search and maximal clique enumeration
(Bron-Kerbosch with pivoting over a degeneracy ordering).  Both are meant
as ground truth for tests and small CLI runs, not for large inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb

import numpy as np

from .errors import InputError, TooLargeError
from .matrixio import binarize_entries

BRUTEFORCE_GUARD = 10**8


@dataclass
class OracleResult:
    best_rows: tuple
    best_cols: tuple
    best_count: int
    ties: list = field(default_factory=list)
    ties_truncated: bool = False


def densest_submatrix_bruteforce(A: np.ndarray, m: int, n: int, tie_cap: int = 64) -> OracleResult:
    """Exhaustive search over all m-row / n-column supports.

    For each row subset the best columns are the n with the largest ones
    count over those rows, which makes the search exact at C(M, m) x N cost.
    Co-optimal supports are enumerated (including column-count ties) up to
    ``tie_cap``.
    """
    A = binarize_entries(A)
    M, N = A.shape
    if not (1 <= m <= M and 1 <= n <= N):
        raise InputError(f"target sizes ({m},{n}) out of range for a {M}x{N} matrix")
    if comb(M, m) * comb(N, n) > BRUTEFORCE_GUARD:
        raise TooLargeError(
            f"C({M},{m})*C({N},{n}) exceeds the brute-force guard of {BRUTEFORCE_GUARD:g}"
        )

    best_count = -1
    optima: list[tuple[tuple, np.ndarray]] = []  # (row subset, per-column counts)
    for rows in combinations(range(M), m):
        counts = A[list(rows)].sum(axis=0)
        top = np.sort(counts)[::-1][:n]
        total = int(top.sum())
        if total > best_count:
            best_count = total
            optima = [(rows, counts)]
        elif total == best_count:
            optima.append((rows, counts))

    ties: list[tuple[tuple, tuple]] = []
    truncated = False
    for rows, counts in optima:
        for cols in _optimal_column_subsets(counts, n, tie_cap + 1 - len(ties)):
            if len(ties) > tie_cap:
                truncated = True
                break
            ties.append((rows, cols))
        if truncated or len(ties) > tie_cap:
            truncated = truncated or len(ties) > tie_cap
            ties = ties[:tie_cap]
            break

    best_rows, best_cols = ties[0]
    return OracleResult(
        best_rows=best_rows,
        best_cols=best_cols,
        best_count=best_count,
        ties=ties,
        ties_truncated=truncated,
    )


def _optimal_column_subsets(counts: np.ndarray, n: int, limit: int):
    """All size-n column subsets maximizing the count sum, up to ``limit``."""
    if limit <= 0:
        return
    order = np.argsort(-counts, kind="stable")
    cutoff = counts[order[n - 1]]
    above = [int(j) for j in order if counts[j] > cutoff]
    at = sorted(int(j) for j in np.flatnonzero(counts == cutoff))
    need = n - len(above)
    emitted = 0
    for chosen in combinations(at, need):
        yield tuple(sorted(above + list(chosen)))
        emitted += 1
        if emitted >= limit:
            return


def _check_adjacency(adjacency: np.ndarray) -> np.ndarray:
    A = binarize_entries(adjacency)
    if A.shape[0] != A.shape[1]:
        raise InputError(f"adjacency matrix must be square, got {A.shape}")
    if not np.array_equal(A, A.T):
        raise InputError("adjacency matrix must be symmetric")
    A = A.copy()
    np.fill_diagonal(A, 0)
    return A


def maximal_cliques(adjacency: np.ndarray) -> list[frozenset]:
    """All maximal cliques via Bron-Kerbosch with pivoting.

    Vertices are processed in a degeneracy ordering at the outer level,
    which keeps the recursion shallow on sparse graphs.
    """
    A = _check_adjacency(adjacency)
    n = A.shape[0]
    neighbors = [frozenset(np.flatnonzero(A[v]).tolist()) for v in range(n)]

    cliques: list[frozenset] = []

    def expand(R: set, P: set, X: set):
        if not P and not X:
            cliques.append(frozenset(R))
            return
        pivot = max(P | X, key=lambda u: len(P & neighbors[u]))
        for v in list(P - neighbors[pivot]):
            expand(R | {v}, P & neighbors[v], X & neighbors[v])
            P.remove(v)
            X.add(v)

    order = _degeneracy_ordering(neighbors)
    P_all = set(range(n))
    X_all: set = set()
    for v in order:
        expand({v}, P_all & neighbors[v], X_all & neighbors[v])
        P_all.remove(v)
        X_all.add(v)
    return cliques


def _degeneracy_ordering(neighbors) -> list[int]:
    n = len(neighbors)
    degree = [len(nb) for nb in neighbors]
    buckets: dict[int, set] = {}
    for v, d in enumerate(degree):
        buckets.setdefault(d, set()).add(v)
    removed = [False] * n
    order = []
    for _ in range(n):
        d = min(k for k, b in buckets.items() if b)
        v = buckets[d].pop()
        order.append(v)
        removed[v] = True
        for u in neighbors[v]:
            if not removed[u]:
                buckets[degree[u]].discard(u)
                degree[u] -= 1
                buckets.setdefault(degree[u], set()).add(u)
    return order


def maximum_cliques(adjacency: np.ndarray) -> list[frozenset]:
    """The largest-cardinality cliques (all ties)."""
    cliques = maximal_cliques(adjacency)
    if not cliques:
        return []
    best = max(len(c) for c in cliques)
    return [c for c in cliques if len(c) == best]

"""Problem-instance generation.

Random planted-submatrix matrices (block-structured Bernoulli sampling,
optionally symmetric), the two experiment-grid constructions, and
adversarially edited matrices with explicit edit scripts checked against
per-row/column budgets.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetExceededError, InputError
from .matrixio import validate_binary
from .rng import make_rng


def contiguous_partition(sizes) -> list[np.ndarray]:
    """Split [0, sum(sizes)) into consecutive index blocks."""
    sizes = [int(s) for s in sizes]
    if any(s < 1 for s in sizes):
        raise InputError(f"partition sizes must be >= 1, got {sizes}")
    offsets = np.cumsum([0] + sizes)
    return [np.arange(offsets[i], offsets[i + 1]) for i in range(len(sizes))]


def _check_partition(partition, n, what):
    seen = np.concatenate([np.asarray(p, dtype=int) for p in partition]) if partition else np.array([], dtype=int)
    if len(seen) != n or len(np.unique(seen)) != n or seen.min(initial=0) < 0 or seen.max(initial=-1) >= n:
        raise InputError(f"{what} partition must be disjoint and cover all {n} indices")


@dataclass
class PlantedModelSpec:
    """Block partition plus Bernoulli probability table.

    ``probs[r][s]`` is the probability of a 1 in block (row block r, column
    block s).  Block (0, 0) is the planted block of interest.  When
    ``symmetric`` is set, only the upper triangle is sampled and mirrored;
    this requires a square matrix with identical row/column partitions.
    """

    row_partition: list
    col_partition: list
    probs: np.ndarray
    symmetric: bool = False
    planted_diagonal_one: bool = True

    def __post_init__(self):
        self.row_partition = [np.asarray(p, dtype=int) for p in self.row_partition]
        self.col_partition = [np.asarray(p, dtype=int) for p in self.col_partition]
        self.probs = np.asarray(self.probs, dtype=float)
        if self.probs.shape != (len(self.row_partition), len(self.col_partition)):
            raise InputError(
                f"probs table shape {self.probs.shape} does not match partition sizes "
                f"({len(self.row_partition)}, {len(self.col_partition)})"
            )
        if np.any(self.probs < 0) or np.any(self.probs > 1):
            raise InputError("block probabilities must lie in [0, 1]")
        _check_partition(self.row_partition, self.M, "row")
        _check_partition(self.col_partition, self.N, "column")
        if self.symmetric:
            if self.M != self.N:
                raise InputError("symmetric sampling requires a square matrix")
            same = len(self.row_partition) == len(self.col_partition) and all(
                np.array_equal(r, c) for r, c in zip(self.row_partition, self.col_partition)
            )
            if not same:
                raise InputError("symmetric sampling requires identical row/column partitions")

    @property
    def M(self) -> int:
        return sum(len(p) for p in self.row_partition)

    @property
    def N(self) -> int:
        return sum(len(p) for p in self.col_partition)

    def probability_matrix(self) -> np.ndarray:
        """Entry-wise Bernoulli probability table, expanded to M x N."""
        P = np.zeros((self.M, self.N))
        for r, rows in enumerate(self.row_partition):
            for s, cols in enumerate(self.col_partition):
                P[np.ix_(rows, cols)] = self.probs[r, s]
        return P


@dataclass
class GroundTruth:
    """Planted block (U1, V1) and its rank-one support matrix."""

    planted_rows: np.ndarray
    planted_cols: np.ndarray
    M: int
    N: int

    def __post_init__(self):
        self.planted_rows = np.asarray(self.planted_rows, dtype=int)
        self.planted_cols = np.asarray(self.planted_cols, dtype=int)

    @property
    def X0(self) -> np.ndarray:
        u = np.zeros(self.M)
        v = np.zeros(self.N)
        u[self.planted_rows] = 1.0
        v[self.planted_cols] = 1.0
        return np.outer(u, v)

    def manifest(self, extra: dict | None = None) -> dict:
        entries = {
            "M": int(self.M),
            "N": int(self.N),
            "planted_rows": " ".join(str(int(i) + 1) for i in self.planted_rows),
            "planted_cols": " ".join(str(int(j) + 1) for j in self.planted_cols),
        }
        if extra:
            entries.update(extra)
        return entries


def sample_psm(spec: PlantedModelSpec, seed: int) -> tuple[np.ndarray, GroundTruth]:
    """Sample a matrix from the planted submatrix model.

    Entry (i, j) in block (r, s) is 1 with probability ``probs[r][s]``,
    independently.  Symmetric specs sample only the upper triangle and
    mirror it; the diagonal inside the planted block is forced to 1 when
    ``planted_diagonal_one`` is set.
    """
    P = spec.probability_matrix()
    rng = make_rng(seed)
    U = rng.random(P.shape)
    A = (U < P).astype(np.int8)
    if spec.symmetric:
        upper = np.triu(A)
        A = upper + np.triu(A, 1).T
        if spec.planted_diagonal_one:
            planted = spec.row_partition[0]
            A[planted, planted] = 1
    truth = GroundTruth(
        planted_rows=spec.row_partition[0],
        planted_cols=spec.col_partition[0],
        M=spec.M,
        N=spec.N,
    )
    return A, truth


def experiment1_spec(q: float, m: int, M: int) -> PlantedModelSpec:
    """Block structure of the first phase-transition experiment.

    floor(M/m) blocks: the first k-1 of size m, the last holding the
    remainder.  Densities: p_11 = q, p_jj = 1/(4(j-1)) for j >= 2, and
    p_ij = p_ii * p_jj off the diagonal.  Sampled symmetrically.
    """
    if not (0 < q <= 1):
        raise InputError(f"q must lie in (0, 1], got {q}")
    if not (1 <= m <= M):
        raise InputError(f"block size m={m} must satisfy 1 <= m <= M={M}")
    k = M // m
    sizes = [m] * (k - 1) + [M - (k - 1) * m]
    diag = np.array([q] + [1.0 / (4.0 * j) for j in range(1, k)])
    probs = np.outer(diag, diag)
    np.fill_diagonal(probs, diag)
    part = contiguous_partition(sizes)
    return PlantedModelSpec(part, [p.copy() for p in part], probs, symmetric=True)


def experiment2_spec(q: float, m: int, M: int) -> PlantedModelSpec:
    """Two-block structure of the second experiment: p_11 = p_22 = q, p_12 = 0.25."""
    if not (0 < q <= 1):
        raise InputError(f"q must lie in (0, 1], got {q}")
    if not (1 <= m < M):
        raise InputError(f"block size m={m} must satisfy 1 <= m < M={M}")
    probs = np.array([[q, 0.25], [0.25, q]])
    part = contiguous_partition([m, M - m])
    return PlantedModelSpec(part, [p.copy() for p in part], probs, symmetric=True)


@dataclass
class AdversarialBudget:
    """Edit allowances for the adversarial planted submatrix model.

    ``delta_tilde`` bounds deletions inside the planted block (every row
    and column must retain a delta_tilde fraction of its ones);  ``delta``
    bounds per-column/per-row additions adjacent to the planted block;
    the ``r`` caps bound total additions per region and total deletions.
    """

    delta: float
    delta_tilde: float
    r1: int
    r2: int
    r3: int
    r_diag: list = field(default_factory=list)
    rbar11: int = 0

    def __post_init__(self):
        if not (0 <= self.delta < 1):
            raise InputError(f"delta must lie in [0, 1), got {self.delta}")
        if not (0 < self.delta_tilde <= 1):
            raise InputError(f"delta_tilde must lie in (0, 1], got {self.delta_tilde}")
        for name in ("r1", "r2", "r3", "rbar11"):
            if getattr(self, name) < 0:
                raise InputError(f"{name} must be nonnegative")
        self.r_diag = [int(r) for r in self.r_diag]


@dataclass
class EditScript:
    """Explicit adversarial edits: deletions inside the planted block,
    additions outside it."""

    deletions: list = field(default_factory=list)
    additions: list = field(default_factory=list)


def _region_of(i, j, row_block, col_block):
    q, s = row_block[i], col_block[j]
    if q == 0 and s == 0:
        return "block11"
    if q == 0:
        return "right"  # U1 x (V - V1)
    if s == 0:
        return "below"  # (U - U1) x V1
    if q == s:
        return ("diag", q)
    return "offdiag"


def _block_labels(partition, n):
    labels = np.empty(n, dtype=int)
    for b, idx in enumerate(partition):
        labels[idx] = b
    return labels


def apply_adversary(
    A: np.ndarray,
    truth: GroundTruth,
    budget: AdversarialBudget,
    edits: EditScript,
    row_partition=None,
    col_partition=None,
) -> np.ndarray:
    """Apply an explicit edit script, enforcing every budget cap.

    The planted block of ``A`` must be all ones before editing.  Raises
    :class:`BudgetExceededError` naming the first violated cap.  When the
    partitions are omitted, everything outside the planted rows/columns is
    treated as a single second diagonal block.
    """
    A = validate_binary(A).copy()
    M, N = A.shape
    U1, V1 = truth.planted_rows, truth.planted_cols
    m1, n1 = len(U1), len(V1)
    if not np.all(A[np.ix_(U1, V1)] == 1):
        raise InputError("planted block must be all ones before adversarial edits")
    if row_partition is None or col_partition is None:
        rest_rows = np.setdiff1d(np.arange(M), U1)
        rest_cols = np.setdiff1d(np.arange(N), V1)
        row_partition = [U1, rest_rows] if len(rest_rows) else [U1]
        col_partition = [V1, rest_cols] if len(rest_cols) else [V1]
    row_block = _block_labels(row_partition, M)
    col_block = _block_labels(col_partition, N)

    in_block = np.zeros((M, N), dtype=bool)
    in_block[np.ix_(U1, V1)] = True

    del_per_row = np.zeros(M, dtype=int)
    del_per_col = np.zeros(N, dtype=int)
    seen = set()
    for i, j in edits.deletions:
        if not in_block[i, j]:
            raise InputError(f"deletion ({i},{j}) lies outside the planted block")
        if (i, j) in seen:
            raise InputError(f"duplicate edit at ({i},{j})")
        seen.add((i, j))
        del_per_row[i] += 1
        del_per_col[j] += 1
    if len(edits.deletions) > budget.rbar11:
        raise BudgetExceededError("rbar11", f"{len(edits.deletions)} deletions exceed cap rbar11={budget.rbar11}")
    if np.any(m1 - del_per_col[V1] < budget.delta_tilde * m1 - 1e-12):
        j = V1[np.argmax(del_per_col[V1])]
        raise BudgetExceededError(
            "delta_tilde",
            f"column {j} of the planted block would retain {m1 - del_per_col[j]} < "
            f"delta_tilde*m1 = {budget.delta_tilde * m1:g} ones",
        )
    if np.any(n1 - del_per_row[U1] < budget.delta_tilde * n1 - 1e-12):
        i = U1[np.argmax(del_per_row[U1])]
        raise BudgetExceededError(
            "delta_tilde",
            f"row {i} of the planted block would retain {n1 - del_per_row[i]} < "
            f"delta_tilde*n1 = {budget.delta_tilde * n1:g} ones",
        )

    add_right_col = np.zeros(N, dtype=int)
    add_below_row = np.zeros(M, dtype=int)
    totals = {"right": 0, "below": 0, "offdiag": 0}
    diag_totals: dict[int, int] = {}
    for i, j in edits.additions:
        if (i, j) in seen:
            raise InputError(f"duplicate edit at ({i},{j})")
        seen.add((i, j))
        if in_block[i, j]:
            raise InputError(f"addition ({i},{j}) lies inside the planted block")
        if A[i, j] != 0:
            raise InputError(f"addition ({i},{j}) targets an entry that is already 1")
        region = _region_of(i, j, row_block, col_block)
        if region == "right":
            totals["right"] += 1
            add_right_col[j] += 1
        elif region == "below":
            totals["below"] += 1
            add_below_row[i] += 1
        elif region == "offdiag":
            totals["offdiag"] += 1
        else:
            q = region[1]
            diag_totals[q] = diag_totals.get(q, 0) + 1
    if totals["right"] > budget.r1:
        raise BudgetExceededError("r1", f"{totals['right']} additions in the planted-row strip exceed r1={budget.r1}")
    if totals["below"] > budget.r2:
        raise BudgetExceededError("r2", f"{totals['below']} additions in the planted-column strip exceed r2={budget.r2}")
    if totals["offdiag"] > budget.r3:
        raise BudgetExceededError("r3", f"{totals['offdiag']} off-diagonal additions exceed r3={budget.r3}")
    if np.any(add_right_col > budget.delta * m1 + 1e-12):
        j = int(np.argmax(add_right_col))
        raise BudgetExceededError(
            "delta", f"column {j} receives {add_right_col[j]} additions > delta*m1 = {budget.delta * m1:g}"
        )
    if np.any(add_below_row > budget.delta * n1 + 1e-12):
        i = int(np.argmax(add_below_row))
        raise BudgetExceededError(
            "delta", f"row {i} receives {add_below_row[i]} additions > delta*n1 = {budget.delta * n1:g}"
        )
    for q, count in diag_totals.items():
        cap_idx = q - 1
        cap = budget.r_diag[cap_idx] if cap_idx < len(budget.r_diag) else 0
        if count > cap:
            raise BudgetExceededError("r_diag", f"{count} additions in diagonal block {q + 1} exceed cap {cap}")

    for i, j in edits.deletions:
        A[i, j] = 0
    for i, j in edits.additions:
        A[i, j] = 1
    return A


def random_edit_script(
    A: np.ndarray,
    truth: GroundTruth,
    budget: AdversarialBudget,
    row_partition,
    col_partition,
    fill: float = 1.0,
    seed: int = 0,
) -> EditScript:
    """Fill a ``fill`` fraction of every budget cap with uniformly placed edits.

    Greedy placement over shuffled candidate positions; per-row/column caps
    are respected, so the resulting script always passes
    :func:`apply_adversary`.
    """
    A = validate_binary(A)
    M, N = A.shape
    U1, V1 = truth.planted_rows, truth.planted_cols
    m1, n1 = len(U1), len(V1)
    rng = make_rng(seed)
    row_block = _block_labels(row_partition, M)
    col_block = _block_labels(col_partition, N)

    deletions: list[tuple[int, int]] = []
    target = int(fill * budget.rbar11)
    col_cap = int(np.floor((1 - budget.delta_tilde) * m1 + 1e-12))
    row_cap = int(np.floor((1 - budget.delta_tilde) * n1 + 1e-12))
    del_r = np.zeros(M, dtype=int)
    del_c = np.zeros(N, dtype=int)
    cands = [(int(i), int(j)) for i in U1 for j in V1]
    rng.shuffle(cands)
    for i, j in cands:
        if len(deletions) >= target:
            break
        if del_r[i] < row_cap and del_c[j] < col_cap:
            deletions.append((i, j))
            del_r[i] += 1
            del_c[j] += 1

    additions: list[tuple[int, int]] = []

    def fill_region(cands, target, per_col_cap=None, per_row_cap=None):
        rng.shuffle(cands)
        taken = 0
        col_used = np.zeros(N, dtype=int)
        row_used = np.zeros(M, dtype=int)
        for i, j in cands:
            if taken >= target:
                break
            if A[i, j] != 0:
                continue
            if per_col_cap is not None and col_used[j] >= per_col_cap:
                continue
            if per_row_cap is not None and row_used[i] >= per_row_cap:
                continue
            additions.append((i, j))
            col_used[j] += 1
            row_used[i] += 1
            taken += 1

    right = [(int(i), int(j)) for i in U1 for j in range(N) if col_block[j] != 0]
    fill_region(right, int(fill * budget.r1), per_col_cap=int(np.floor(budget.delta * m1 + 1e-12)))
    below = [(int(i), int(j)) for i in range(M) if row_block[i] != 0 for j in V1]
    fill_region(below, int(fill * budget.r2), per_row_cap=int(np.floor(budget.delta * n1 + 1e-12)))
    for q in range(1, len(row_partition)):
        cap_idx = q - 1
        cap = budget.r_diag[cap_idx] if cap_idx < len(budget.r_diag) else 0
        diag = [(int(i), int(j)) for i in row_partition[q] for j in col_partition[q]]
        fill_region(diag, int(fill * cap))
    offdiag = [
        (int(i), int(j))
        for i in range(M)
        for j in range(N)
        if row_block[i] >= 1 and col_block[j] >= 1 and row_block[i] != col_block[j]
    ]
    fill_region(offdiag, int(fill * budget.r3))
    return EditScript(deletions=deletions, additions=additions)


def budget_from_config(entries: dict) -> AdversarialBudget:
    """Build an adversarial budget from flat key-value entries."""
    try:
        return AdversarialBudget(
            delta=float(entries.get("delta", 0.0)),
            delta_tilde=float(entries.get("delta_tilde", 1.0)),
            r1=int(entries.get("r1", 0)),
            r2=int(entries.get("r2", 0)),
            r3=int(entries.get("r3", 0)),
            r_diag=[int(v) for v in str(entries.get("r_diag", "")).split()],
            rbar11=int(entries.get("rbar11", 0)),
        )
    except ValueError as exc:
        raise InputError(f"bad budget value: {exc}") from exc


def spec_from_config(entries: dict) -> PlantedModelSpec:
    """Build a model spec from a flat key-value config.

    Either ``kind = experiment1`` / ``experiment2`` with ``q``, ``m``, ``M``,
    or explicit ``row_sizes``, ``col_sizes`` (contiguous blocks) plus a
    ``probs`` table with rows separated by ';'.
    """
    kind = entries.get("kind", "explicit")
    if kind == "experiment1":
        return experiment1_spec(float(entries["q"]), int(entries["m"]), int(entries["M"]))
    if kind == "experiment2":
        return experiment2_spec(float(entries["q"]), int(entries["m"]), int(entries["M"]))
    if kind != "explicit":
        raise InputError(f"unknown spec kind {kind!r}")
    try:
        row_sizes = [int(v) for v in entries["row_sizes"].split()]
        col_sizes = [int(v) for v in entries["col_sizes"].split()]
        probs = [[float(v) for v in row.split()] for row in entries["probs"].split(";")]
    except KeyError as exc:
        raise InputError(f"spec config missing key {exc}") from exc
    return PlantedModelSpec(
        contiguous_partition(row_sizes),
        contiguous_partition(col_sizes),
        np.asarray(probs),
        symmetric=entries.get("symmetric", "0").strip() in ("1", "true", "yes"),
        planted_diagonal_one=entries.get("planted_diagonal_one", "1").strip() in ("1", "true", "yes"),
    )

"""Text file formats for binary matrices, manifests, and reports.

Two matrix formats are supported:

* dense  -- first line ``M N``, then M lines of N space-separated 0/1 digits
* sparse -- first line ``M N nnz``, then nnz lines ``i j`` (1-based, listing
  the positions of the ones)

The format is detected from the number of tokens on the header line.
"""

from __future__ import annotations

import hashlib
import os

import numpy as np

from .errors import InputError


def format_sig(x, digits: int = 12) -> str:
    """Format a number with a fixed number of significant digits.

    Used for all numeric CLI/report output so replayed runs are diffable.
    """
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.{digits - 1}e}"


def validate_binary(entries: np.ndarray) -> np.ndarray:
    """Check entries are exactly 0/1 and return them as an int8 array."""
    arr = np.asarray(entries)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InputError(f"matrix must be 2-d and nonempty, got shape {arr.shape}")
    if not np.isin(arr, (0, 1)).all():
        raise InputError("matrix entries must be exactly 0 or 1")
    return arr.astype(np.int8)


def binarize_entries(entries: np.ndarray) -> np.ndarray:
    """Map any nonzero entry to 1; used when a caller supplies a weighted matrix."""
    return (np.asarray(entries) != 0).astype(np.int8)


def save_dense(path, A: np.ndarray) -> None:
    A = validate_binary(A)
    M, N = A.shape
    with open(path, "w") as fh:
        fh.write(f"{M} {N}\n")
        for row in A:
            fh.write(" ".join(str(int(v)) for v in row) + "\n")


def save_sparse(path, A: np.ndarray) -> None:
    A = validate_binary(A)
    M, N = A.shape
    ii, jj = np.nonzero(A)
    with open(path, "w") as fh:
        fh.write(f"{M} {N} {len(ii)}\n")
        for i, j in zip(ii, jj):
            fh.write(f"{i + 1} {j + 1}\n")


def loads_matrix(text: str) -> np.ndarray:
    """Parse a matrix from dense or sparse text format."""
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise InputError("empty matrix file")
    header = lines[0].split()
    if len(header) == 2:
        return _parse_dense(lines, header)
    if len(header) == 3:
        return _parse_sparse(lines, header)
    raise InputError(f"bad matrix header {lines[0]!r}: expected 'M N' or 'M N nnz'")


def _parse_dense(lines, header) -> np.ndarray:
    try:
        M, N = int(header[0]), int(header[1])
    except ValueError as exc:
        raise InputError(f"bad dense header {header!r}") from exc
    if len(lines) != M + 1:
        raise InputError(f"dense matrix: expected {M} rows, found {len(lines) - 1}")
    A = np.zeros((M, N), dtype=np.int8)
    for i, ln in enumerate(lines[1:]):
        vals = ln.split()
        if len(vals) != N:
            raise InputError(f"dense matrix row {i + 1}: expected {N} entries, found {len(vals)}")
        try:
            A[i] = [int(v) for v in vals]
        except ValueError as exc:
            raise InputError(f"dense matrix row {i + 1}: non-integer entry") from exc
    return validate_binary(A)


def _parse_sparse(lines, header) -> np.ndarray:
    try:
        M, N, nnz = (int(v) for v in header)
    except ValueError as exc:
        raise InputError(f"bad sparse header {header!r}") from exc
    if len(lines) != nnz + 1:
        raise InputError(f"sparse matrix: expected {nnz} triplet lines, found {len(lines) - 1}")
    A = np.zeros((M, N), dtype=np.int8)
    for k, ln in enumerate(lines[1:]):
        vals = ln.split()
        if len(vals) != 2:
            raise InputError(f"sparse matrix line {k + 2}: expected 'i j'")
        i, j = int(vals[0]) - 1, int(vals[1]) - 1
        if not (0 <= i < M and 0 <= j < N):
            raise InputError(f"sparse matrix line {k + 2}: index ({i + 1},{j + 1}) out of range")
        A[i, j] = 1
    return A


def load_matrix(path) -> np.ndarray:
    if not os.path.exists(path):
        raise InputError(f"no such file: {path}")
    with open(path) as fh:
        return loads_matrix(fh.read())


def save_manifest(path, entries: dict) -> None:
    """Write a flat key-value manifest, one ``key = value`` line per entry."""
    with open(path, "w") as fh:
        fh.write(dumps_keyvalues(entries))


def dumps_keyvalues(entries: dict) -> str:
    out = []
    for key, value in entries.items():
        if isinstance(value, (list, tuple, np.ndarray)):
            value = " ".join(str(v) for v in value)
        out.append(f"{key} = {value}")
    return "\n".join(out) + "\n"


def load_keyvalues(path) -> dict:
    """Parse a flat key-value file (``key = value``; '#' comments allowed)."""
    if not os.path.exists(path):
        raise InputError(f"no such file: {path}")
    entries = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InputError(f"{path}:{lineno}: expected 'key = value'")
            key, value = line.split("=", 1)
            entries[key.strip()] = value.strip()
    return entries


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()

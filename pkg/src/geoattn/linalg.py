"""Dense float64 matrix helpers shared by every other module.

All functions are pure and operate on 2-D numpy arrays of float64.
``matmul`` accumulates over the inner index in ascending order, so results
are bit-identical to a naive triple loop and reproducible across runs.
Sizes here are desk-scale (n <= 4096); no blocking or BLAS tricks.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "as_matrix",
    "as_vector",
    "matmul",
    "col_norms",
    "softmax_rows",
    "save_csv",
    "load_csv",
]


def as_matrix(data, name: str = "matrix") -> np.ndarray:
    """Validate user input as a finite 2-D float64 array."""
    m = np.asarray(data, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise ValueError(f"{name} contains NaN or Inf entries")
    return m


def as_vector(data, name: str = "vector") -> np.ndarray:
    """Validate user input as a finite 1-D float64 array."""
    v = np.asarray(data, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {v.shape}")
    if not np.isfinite(v).all():
        raise ValueError(f"{name} contains NaN or Inf entries")
    return v


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product with a fixed accumulation order.

    Accumulates rank-1 updates over the inner index k = 0, 1, ..., so each
    output entry sums its terms in exactly the same order as the scalar
    triple loop.  This keeps results bit-reproducible and lets oracle tests
    demand exact equality.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ValueError(
            f"matmul size mismatch: {a.shape} x {b.shape}"
        )
    out = np.zeros((a.shape[0], b.shape[1]))
    for k in range(a.shape[1]):
        out += np.outer(a[:, k], b[k, :])
    return out


def col_norms(m: np.ndarray) -> np.ndarray:
    """Euclidean norm of each column."""
    m = np.asarray(m, dtype=np.float64)
    return np.sqrt((m * m).sum(axis=0))


def softmax_rows(m: np.ndarray) -> np.ndarray:
    """Row-wise softmax, shifted by the row max for stability.

    Each output row sums to 1; entries lie in (0, 1].  Shift invariance
    (adding a constant to a row) holds to rounding error.
    """
    m = np.asarray(m, dtype=np.float64)
    shifted = m - m.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def save_csv(m: np.ndarray, path) -> None:
    """Write a matrix as CSV: first line ``rows,cols``, then one row per line.

    Values are written with 17 significant digits so a read-back round-trips
    exactly.
    """
    m = as_matrix(m)
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"{m.shape[0]},{m.shape[1]}\n")
        for row in m:
            f.write(",".join(f"{x:.17g}" for x in row) + "\n")


def load_csv(path) -> np.ndarray:
    """Read a matrix written by :func:`save_csv`."""
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().strip()
        try:
            rows, cols = (int(t) for t in header.split(","))
        except ValueError as exc:
            raise ValueError(f"bad matrix CSV header {header!r} in {path}") from exc
        data = [[float(t) for t in line.strip().split(",")] for line in f if line.strip()]
    m = as_matrix(data, name=f"matrix from {path}")
    if m.shape != (rows, cols):
        raise ValueError(
            f"matrix CSV {path}: header says {rows}x{cols}, body is {m.shape[0]}x{m.shape[1]}"
        )
    return m

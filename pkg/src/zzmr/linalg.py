"""Exact dense linear algebra modulo a prime, plus scaled-permutation matrices.

Matrices are NumPy int64 arrays with entries kept in [0, q).  The one hot
routine -- Gauss-Jordan row reduction -- lives in a compiled Cython core
(`zzmr._gfcore`) with a pure-NumPy twin (`zzmr._kernels`); whichever is
available is selected at import time, and setting ``ZZMR_PURE=1`` in the
environment forces the fallback.  Everything else (solve, rank, det,
inverse, block assembly) is a thin layer over that kernel.

Scaled permutation matrices -- exactly one nonzero per row -- are the
natural form of every parity map in this code family; ``GpMatrix`` stores
them as (target, scale) arrays so application costs O(size) instead of
O(size^2), and they are densified only at system-assembly boundaries.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import _kernels as _pure
from .errors import InconsistentDataError, ParameterError, SingularMatrixError

try:
    from . import _gfcore as _compiled
except ImportError:  # pragma: no cover - depends on the build environment
    _compiled = None

_BACKENDS = {"python": _pure}
if _compiled is not None:
    _BACKENDS["compiled"] = _compiled

if os.environ.get("ZZMR_PURE", "") not in ("", "0"):
    _active = _pure
else:
    _active = _compiled if _compiled is not None else _pure

# Largest modulus for which q**2 fits comfortably in int64 row operations.
MAX_MODULUS = 2**31 - 1

__all__ = [
    "backend_name",
    "backends",
    "row_reduce",
    "rank",
    "det",
    "invert",
    "solve",
    "mod_matmul",
    "GpMatrix",
    "gp_apply",
    "gp_dense",
    "stack_blocks",
    "MAX_MODULUS",
]


def backend_name() -> str:
    """Which elimination kernel is active ('compiled' or 'python')."""
    return _active.BACKEND


def backends() -> dict:
    """All loaded kernels, keyed by name (for benchmarks and cross-checks)."""
    return dict(_BACKENDS)


def _check_matrix(a, q: int) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2:
        raise ParameterError(f"expected a 2-D matrix, got shape {a.shape}")
    if not 2 <= q <= MAX_MODULUS:
        raise ParameterError(f"modulus {q} outside [2, {MAX_MODULUS}]")
    return np.ascontiguousarray(a, dtype=np.int64) % q


def row_reduce(a: np.ndarray, q: int, left_cols=None, backend=None):
    """In-place Gauss-Jordan on an int64 C-contiguous array; see kernels.

    Returns (rank, det-accumulator).  ``left_cols`` limits pivoting to the
    leading columns so right-hand sides can ride along in the same array.
    """
    if left_cols is None:
        left_cols = a.shape[1]
    if not 0 <= left_cols <= a.shape[1]:
        raise ParameterError(f"left_cols {left_cols} outside [0, {a.shape[1]}]")
    kern = _BACKENDS[backend] if backend is not None else _active
    return kern.row_reduce(a, q, left_cols)


def rank(a, q: int) -> int:
    m = _check_matrix(a, q)
    r, _ = row_reduce(m, q)
    return int(r)


def det(a, q: int) -> int:
    m = _check_matrix(a, q)
    if m.shape[0] != m.shape[1]:
        raise ParameterError(f"determinant needs a square matrix, got {m.shape}")
    r, dv = row_reduce(m, q)
    return int(dv) if r == m.shape[0] else 0


def invert(a, q: int) -> np.ndarray:
    m = _check_matrix(a, q)
    n = m.shape[0]
    if m.shape[1] != n:
        raise ParameterError(f"inverse needs a square matrix, got {m.shape}")
    aug = np.hstack([m, np.eye(n, dtype=np.int64)])
    r, _ = row_reduce(aug, q, left_cols=n)
    if r < n:
        raise SingularMatrixError(
            f"matrix of size {n} has rank {r}, not invertible", rank=r, size=n
        )
    return aug[:, n:].copy()


def solve(a, b, q: int) -> np.ndarray:
    """Unique solution of a@x = b over GF(q); b may be a vector or a matrix
    of stacked right-hand-side columns.

    The coefficient matrix may have more rows than columns; then the system
    must still pin every unknown (else ``SingularMatrixError``) and the
    surplus rows must be consistent (else ``InconsistentDataError``).
    """
    m = _check_matrix(a, q)
    rows, cols = m.shape
    b = np.asarray(b)
    vector_in = b.ndim == 1
    rhs = _check_matrix(b[:, None] if vector_in else b, q)
    if rhs.shape[0] != rows:
        raise ParameterError(
            f"rhs has {rhs.shape[0]} rows, matrix has {rows}"
        )
    if rows < cols:
        raise SingularMatrixError(
            f"{rows} equations cannot pin {cols} unknowns",
            rank=rows,
            size=cols,
        )
    aug = np.hstack([m, rhs])
    r, _ = row_reduce(aug, q, left_cols=cols)
    if r < cols:
        raise SingularMatrixError(
            f"system matrix {rows}x{cols} has rank {r} < {cols}",
            rank=r,
            size=cols,
        )
    if r < rows and aug[r:, cols:].any():
        raise InconsistentDataError(
            "over-determined system has contradictory equations"
        )
    x = aug[:cols, cols:].copy()
    return x[:, 0] if vector_in else x


def mod_matmul(a, b, q: int) -> np.ndarray:
    """(a @ b) % q with int64 accumulators, chunking the inner dimension
    whenever inner * (q-1)^2 could overflow."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    inner = a.shape[-1]
    limit = (2**62) // max(1, (q - 1) * (q - 1))
    if inner <= limit:
        return (a @ b) % q
    acc = None
    for start in range(0, inner, max(1, limit)):
        stop = min(inner, start + max(1, limit))
        part = (a[..., start:stop] @ b[start:stop]) % q
        acc = part if acc is None else (acc + part) % q
    return acc


@dataclass(frozen=True)
class GpMatrix:
    """Square matrix with exactly one (scaled) nonzero per row.

    Row a holds value ``scale[a]`` in column ``target[a]``; applying it to a
    vector is a gather + pointwise product.  When all scales are nonzero and
    ``target`` is a bijection the matrix is nonsingular.
    """

    size: int
    target: np.ndarray
    scale: np.ndarray
    q: int

    def __post_init__(self):
        t = np.asarray(self.target, dtype=np.int64)
        s = np.asarray(self.scale, dtype=np.int64)
        if t.shape != (self.size,) or s.shape != (self.size,):
            raise ParameterError(
                f"target/scale must both have shape ({self.size},)"
            )
        if t.size and (t.min() < 0 or t.max() >= self.size):
            raise ParameterError("target column index out of range")
        object.__setattr__(self, "target", t)
        object.__setattr__(self, "scale", s % self.q)

    @property
    def is_bijective(self) -> bool:
        if self.scale.size and not self.scale.all():
            return False  # a zero scale kills its row
        return len(np.unique(self.target)) == self.size


def gp_apply(m: GpMatrix, v) -> np.ndarray:
    """m @ v in O(size): out[a] = scale[a] * v[target[a]]."""
    v = np.asarray(v, dtype=np.int64)
    if v.shape != (m.size,):
        raise ParameterError(f"vector of length {v.shape} vs size {m.size}")
    return m.scale * v[m.target] % m.q


def gp_dense(m: GpMatrix) -> np.ndarray:
    out = np.zeros((m.size, m.size), dtype=np.int64)
    out[np.arange(m.size), m.target] = m.scale
    return out


def stack_blocks(grid, q: int) -> np.ndarray:
    """Assemble a 2-D grid of blocks (ndarray, GpMatrix, or None for zeros)
    into one dense matrix.  Block shapes must tile consistently."""
    if not grid or not all(len(row) == len(grid[0]) for row in grid):
        raise ParameterError("blocks must form a non-empty rectangular grid")

    def shape_of(b):
        if b is None:
            return None
        if isinstance(b, GpMatrix):
            return (b.size, b.size)
        arr = np.asarray(b)
        if arr.ndim != 2:
            raise ParameterError(f"block with shape {arr.shape} is not 2-D")
        return arr.shape

    shapes = [[shape_of(b) for b in row] for row in grid]
    heights = [None] * len(grid)
    widths = [None] * len(grid[0])
    for i, row in enumerate(shapes):
        for j, sh in enumerate(row):
            if sh is None:
                continue
            if heights[i] is None:
                heights[i] = sh[0]
            elif heights[i] != sh[0]:
                raise ParameterError(f"row {i} mixes block heights")
            if widths[j] is None:
                widths[j] = sh[1]
            elif widths[j] != sh[1]:
                raise ParameterError(f"column {j} mixes block widths")
    if any(hh is None for hh in heights) or any(w is None for w in widths):
        raise ParameterError("a full row or column of None blocks has no size")

    out = np.zeros((sum(heights), sum(widths)), dtype=np.int64)
    r0 = 0
    for i, row in enumerate(grid):
        c0 = 0
        for j, b in enumerate(row):
            if b is not None:
                dense = gp_dense(b) if isinstance(b, GpMatrix) else np.asarray(b, dtype=np.int64)
                out[r0 : r0 + heights[i], c0 : c0 + widths[j]] = dense % q
            c0 += widths[j]
        r0 += heights[i]
    return out

"""Pure-NumPy elimination kernel; mirror of the compiled `_gfcore` module.

Both backends expose the same single hot routine, ``row_reduce``, so the
rest of the package can pick whichever loaded (see ``linalg``).
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def row_reduce(a: np.ndarray, q: int, left_cols: int) -> tuple[int, int]:
    """In-place Gauss-Jordan over GF(q), pivoting in the first ``left_cols``
    columns only (the remainder rides along, e.g. augmented right-hand sides).

    Pivot choice is the first nonzero scanning rows downward -- there is no
    magnitude to compare in a finite field -- which makes results
    deterministic.  Returns ``(rank, det)`` where ``det`` is the product of
    pivots and row-swap signs; it equals det of the left block only when that
    block is square and of full rank (callers gate on ``rank``).
    """
    rows, cols = a.shape
    rank = 0
    det = 1
    for col in range(left_cols):
        pivots = np.flatnonzero(a[rank:, col])
        if pivots.size == 0:
            continue
        piv = rank + int(pivots[0])
        if piv != rank:
            a[[rank, piv]] = a[[piv, rank]]
            det = q - det
        pv = int(a[rank, col])
        det = det * pv % q
        a[rank] = a[rank] * pow(pv, -1, q) % q
        factors = a[:, col].copy()
        factors[rank] = 0
        hit = np.flatnonzero(factors)
        if hit.size:
            a[hit] = (a[hit] - factors[hit, None] * a[rank]) % q
        rank += 1
        if rank == rows:
            break
    return rank, det

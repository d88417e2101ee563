# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled elimination kernel; mirror of the pure `_kernels` module."""

BACKEND = "compiled"


cdef long long _mod_inv(long long a, long long q) noexcept:
    # Fermat: a^(q-2) mod q for prime q.
    cdef long long result = 1
    cdef long long base = a % q
    cdef long long e = q - 2
    while e > 0:
        if e & 1:
            result = result * base % q
        base = base * base % q
        e >>= 1
    return result


def row_reduce(long long[:, ::1] a, long long q, Py_ssize_t left_cols):
    """In-place Gauss-Jordan over GF(q); pivots in the first ``left_cols``
    columns, first-nonzero pivot choice.  Returns (rank, det); det is valid
    for a square full-rank left block (callers gate on rank)."""
    cdef Py_ssize_t rows = a.shape[0]
    cdef Py_ssize_t cols = a.shape[1]
    cdef Py_ssize_t rank = 0
    cdef Py_ssize_t col, rr, j, piv
    cdef long long det = 1
    cdef long long pv, inv, f, tmp, v

    for col in range(left_cols):
        piv = -1
        for rr in range(rank, rows):
            if a[rr, col] != 0:
                piv = rr
                break
        if piv < 0:
            continue
        if piv != rank:
            for j in range(cols):
                tmp = a[rank, j]
                a[rank, j] = a[piv, j]
                a[piv, j] = tmp
            det = q - det
        pv = a[rank, col]
        det = det * pv % q
        inv = _mod_inv(pv, q)
        for j in range(cols):
            a[rank, j] = a[rank, j] * inv % q
        for rr in range(rows):
            if rr == rank:
                continue
            f = a[rr, col]
            if f == 0:
                continue
            for j in range(cols):
                v = (a[rr, j] - f * a[rank, j]) % q
                if v < 0:
                    v += q
                a[rr, j] = v
        rank += 1
        if rank == rows:
            break
    return rank, det

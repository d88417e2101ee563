"""The array-code construction: coefficients, parity maps, encode, decode.

A code instance is parameterized by ``CodeParams``; a codeword is a NumPy
int64 array of shape ``(instances, n, base)`` where ``cw[w, i]`` is node
i's symbol column for instance w, and ``base == radix**n`` rows are indexed
by radix-ary digit vectors (node i owns digit position i).

Every instance independently satisfies, for each parity level
t in [0, parities) and every row a:

    sum_i  coeff(t, i, a) * cw[w, i, shift(a, i, +t)]  ==  0   (mod q)

where ``coeff`` depends on row a only through digit a_i.  Those checks are
the whole definition of the code; ``encode`` solves them for the parity
nodes [k, n), and ``erasure_decode`` solves them for any set of at most
n-k missing nodes (the maximum-distance property makes that system
uniquely solvable from any k survivors).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np

from . import linalg
from .errors import (
    ConstructionError,
    MdsViolationError,
    ParameterError,
    SingularMatrixError,
)
from .field import PrimeField, find_primitive, is_prime, smallest_prime_geq
from .index import DigitSpace, space
from .linalg import GpMatrix

__all__ = [
    "CodeParams",
    "ParityReport",
    "node_multiplier",
    "parity_coefficient",
    "parity_matrix",
    "check_parity",
    "encode",
    "erasure_decode",
]


@dataclass(frozen=True)
class CodeParams:
    """Validated parameter bundle for one code.

    n: total nodes; k: data nodes; d: helpers contacted per repair;
    h: simultaneous failures tolerated by the repair scheme; q: prime
    field modulus (>= n+1); gamma: a fixed multiplicative generator.
    """

    n: int
    k: int
    d: int
    h: int
    q: int
    gamma: int

    def __post_init__(self):
        for name in ("n", "k", "d", "h", "q", "gamma"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)):
                raise ParameterError(f"{name} must be an integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if not 1 <= self.k < self.n:
            raise ParameterError(f"need 1 <= k < n, got k={self.k}, n={self.n}")
        if self.h < 1:
            raise ParameterError(f"need h >= 1, got h={self.h}")
        if not self.k <= self.d <= self.n - self.h:
            raise ParameterError(
                f"need k <= d <= n-h, got k={self.k}, d={self.d}, "
                f"n-h={self.n - self.h}"
            )
        if not is_prime(self.q) or self.q < self.n + 1:
            raise ParameterError(
                f"q={self.q} must be a prime >= n+1 = {self.n + 1}"
            )
        if self.q > linalg.MAX_MODULUS:
            raise ParameterError(f"q={self.q} exceeds {linalg.MAX_MODULUS}")
        if not 0 < self.gamma < self.q:
            raise ParameterError(
                f"generator {self.gamma} outside [1, {self.q})"
            )
        # Delegates the generator-order check.
        PrimeField(self.q, self.gamma)

    @classmethod
    def build(cls, n: int, k: int, d: int, h: int,
              q: Optional[int] = None, gamma: Optional[int] = None) -> "CodeParams":
        """Fill in the smallest admissible prime and its least generator."""
        if q is None:
            q = smallest_prime_geq(n + 1)
        if gamma is None:
            gamma = find_primitive(q)
        return cls(n, k, d, h, q, gamma)

    # -- derived sizes ----------------------------------------------------

    @property
    def radix(self) -> int:
        """Digit alphabet size: d - k + 1."""
        return self.d - self.k + 1

    @property
    def parities(self) -> int:
        """Number of parity levels (and of parity nodes): n - k."""
        return self.n - self.k

    @property
    def base(self) -> int:
        """Rows per instance: radix**n."""
        return self.radix ** self.n

    @property
    def instances(self) -> int:
        """Independent codeword copies striped per node: d - k + h."""
        return self.d - self.k + self.h

    @property
    def symbols_per_node(self) -> int:
        return self.instances * self.base

    @property
    def field(self) -> PrimeField:
        return PrimeField(self.q, self.gamma)

    @property
    def degenerate_nodes(self) -> Tuple[int, ...]:
        """Nodes whose base multiplier gamma**(i+1) collapses to 1.

        That happens exactly when q == n+1 (node n-1 gets gamma**(q-1)).
        Such a node still participates in encoding and erasure decoding --
        the maximum-distance property only needs the multipliers pairwise
        distinct -- but its cooperative-repair systems are singular, so it
        cannot be a *failed* node in `repair`.  Choose q >= n+2 when every
        node must be repairable.
        """
        qm1 = self.q - 1
        return tuple(i for i in range(self.n) if (i + 1) % qm1 == 0)

    @property
    def space(self) -> DigitSpace:
        return space(self.radix, self.n)


@lru_cache(maxsize=None)
def _coeff_tables(n: int, radix: int, parities: int, q: int, gamma: int):
    """(mult, coeff) tables.

    mult[i, u]     -- per-node multiplier: gamma^(i+1) when digit u == 0, else 1.
    coeff[t, i, u] -- product of mult[i, (u+j) % radix] over j in [0, t);
                      the scale that parity level t applies at node i when
                      row digit a_i == u.
    """
    mult = np.ones((n, radix), dtype=np.int64)
    for i in range(n):
        mult[i, 0] = pow(gamma, i + 1, q)
    coeff = np.ones((parities, n, radix), dtype=np.int64)
    for t in range(1, parities):
        for i in range(n):
            for u in range(radix):
                coeff[t, i, u] = coeff[t - 1, i, u] * mult[i, (u + t - 1) % radix] % q
    mult.setflags(write=False)
    coeff.setflags(write=False)
    return mult, coeff


def _tables(p: CodeParams):
    return _coeff_tables(p.n, p.radix, p.parities, p.q, p.gamma)


def node_multiplier(params: CodeParams, i: int, u: int) -> int:
    """Base multiplier of node i at digit value u."""
    if not 0 <= i < params.n:
        raise ParameterError(f"node {i} outside [0, {params.n})")
    if not 0 <= u < params.radix:
        raise ParameterError(f"digit {u} outside [0, {params.radix})")
    return int(_tables(params)[0][i, u])


def parity_coefficient(params: CodeParams, t: int, i: int, a: int) -> int:
    """Scale applied by parity level t at node i on row a (depends only on
    digit a_i)."""
    if not 0 <= t < params.parities:
        raise ParameterError(f"parity level {t} outside [0, {params.parities})")
    if not 0 <= i < params.n:
        raise ParameterError(f"node {i} outside [0, {params.n})")
    digit = params.space.digit(a, i)
    return int(_tables(params)[1][t, i, digit])


def parity_matrix(params: CodeParams, t: int, i: int) -> GpMatrix:
    """The scaled-permutation parity map of node i at level t: row a has
    value coeff(t, i, a) in column shift(a, i, +t).  Level 0 is identity."""
    if not 0 <= t < params.parities:
        raise ParameterError(f"parity level {t} outside [0, {params.parities})")
    if not 0 <= i < params.n:
        raise ParameterError(f"node {i} outside [0, {params.n})")
    sp = params.space
    _, coeff = _tables(params)
    return GpMatrix(
        size=params.base,
        target=sp.shift_perm(i, t),
        scale=coeff[t, i, sp.digit_table[i]],
        q=params.q,
    )


@dataclass(frozen=True)
class ParityReport:
    ok: bool
    violation: Optional[Tuple[int, int, int]]  # (instance, level, row) or None
    equations: int

    def __bool__(self) -> bool:
        return self.ok


def _as_codeword(params: CodeParams, cw, nodes: Optional[int] = None) -> np.ndarray:
    want = (params.instances, nodes if nodes is not None else params.n, params.base)
    arr = np.asarray(cw)
    if arr.shape != want:
        raise ParameterError(f"expected array of shape {want}, got {arr.shape}")
    if arr.dtype.kind not in "iu":
        raise ParameterError(f"symbols must be integers, got dtype {arr.dtype}")
    return np.ascontiguousarray(arr, dtype=np.int64)


def check_parity(params: CodeParams, cw) -> ParityReport:
    """Evaluate every scalar parity equation; report the first violated
    (instance, level, row) triple, scanning instances, then levels, then rows."""
    cw = _as_codeword(params, cw)
    if cw.min() < 0 or cw.max() >= params.q:
        raise ParameterError(f"symbols must lie in [0, {params.q})")
    sp = params.space
    _, coeff = _tables(params)
    q = params.q
    total = params.instances * params.parities * params.base
    for w in range(params.instances):
        for t in range(params.parities):
            acc = np.zeros(params.base, dtype=np.int64)
            for i in range(params.n):
                scale = coeff[t, i, sp.digit_table[i]]
                acc = (acc + scale * cw[w, i, sp.shift_perm(i, t)]) % q
            bad = np.nonzero(acc)[0]
            if bad.size:
                return ParityReport(False, (w, t, int(bad[0])), total)
    return ParityReport(True, None, total)


# -- encoding ---------------------------------------------------------------


@lru_cache(maxsize=8)
def _parity_block_inverse(n: int, k: int, d: int, q: int, gamma: int) -> np.ndarray:
    """Inverse of the square system tying one digit-class of parity-node
    symbols together.

    Fixing the digits at data positions [0, k) decouples the parity checks
    into radix**k independent copies of a single system of side
    parities * radix**parities, identical for every class and instance;
    this factors it once.  Rows are (t, y), columns (p, y') where p indexes
    parity node k+p and y runs over the digit block at positions [k, n).
    """
    params = CodeParams(n, k, d, h=1, q=q, gamma=gamma)
    radix, parities = params.radix, params.parities
    ysp = space(radix, parities)
    side = parities * ysp.size
    _, coeff = _tables(params)
    m = np.zeros((side, side), dtype=np.int64)
    rows = np.arange(ysp.size)
    for t in range(parities):
        for p in range(parities):
            cols = p * ysp.size + ysp.shift_perm(p, t)
            m[t * ysp.size + rows, cols] = coeff[t, k + p, ysp.digit_table[p]]
    try:
        inv = linalg.invert(m, q)
    except SingularMatrixError as exc:  # pragma: no cover - must not occur
        raise ConstructionError(
            f"parity-node system singular for (n={n}, k={k}, d={d}, q={q})"
        ) from exc
    inv.setflags(write=False)
    return inv


def encode(params: CodeParams, data) -> np.ndarray:
    """Systematic encode: place ``data`` (shape (instances, k, base)) on
    nodes [0, k) and solve all parity checks for nodes [k, n)."""
    data = _as_codeword(params, data, nodes=params.k)
    if data.size and (data.min() < 0 or data.max() >= params.q):
        raise ParameterError(f"data symbols must lie in [0, {params.q})")
    q = params.q
    radix, parities, k = params.radix, params.parities, params.k
    ysp = space(radix, parities)          # digit block at parity positions
    csp = space(radix, k)                 # digit block at data positions
    _, coeff = _tables(params)
    inv = _parity_block_inverse(params.n, k, params.d, q, params.gamma)

    # Right-hand sides: one column per (class c, instance w), negated data
    # contributions.  Row (t, y) of column (c, w) collects the data terms of
    # the parity equation at full row index a = c + radix**k * y.
    n_cols = csp.size * params.instances
    rhs = np.zeros((parities * ysp.size, n_cols), dtype=np.int64)
    ystride = csp.size
    yblock = np.arange(ysp.size) * ystride
    for t in range(parities):
        rows = slice(t * ysp.size, (t + 1) * ysp.size)
        for i in range(k):
            for c in range(csp.size):
                scale = coeff[t, i, csp.digit(c, i)]
                rows_full = csp.shift(c, i, t) + yblock
                cols = slice(c * params.instances, (c + 1) * params.instances)
                rhs[rows, cols] = (
                    rhs[rows, cols] - scale * data[:, i, rows_full].T
                ) % q

    x = linalg.mod_matmul(inv, rhs, q)
    # x[(p, y), (c, w)] -> codeword[w, k+p, c + radix**k * y]
    parity_part = (
        x.reshape(parities, ysp.size, csp.size, params.instances)
        .transpose(3, 0, 1, 2)
        .reshape(params.instances, parities, params.base)
    )
    cw = np.empty((params.instances, params.n, params.base), dtype=np.int64)
    cw[:, :k, :] = data
    cw[:, k:, :] = parity_part
    return cw


# -- erasure decoding -------------------------------------------------------


def erasure_decode(params: CodeParams, cw, known: Sequence[int]) -> np.ndarray:
    """Rebuild every node from any >= k intact ones.

    ``cw`` has full codeword shape; columns of nodes outside ``known`` are
    ignored.  Contradictory surviving data raises InconsistentDataError;
    an unsolvable system would disprove the maximum-distance property and
    raises MdsViolationError.
    """
    cw = _as_codeword(params, cw)
    known = sorted(set(int(i) for i in known))
    if any(i < 0 or i >= params.n for i in known):
        raise ParameterError(f"known nodes {known} outside [0, {params.n})")
    if len(known) < params.k:
        raise ParameterError(
            f"need at least k={params.k} known nodes, got {len(known)}"
        )
    if cw[:, known, :].min() < 0 or cw[:, known, :].max() >= params.q:
        raise ParameterError(f"symbols must lie in [0, {params.q})")
    missing = [i for i in range(params.n) if i not in known]
    if not missing:
        return cw.copy()

    q, radix = params.q, params.radix
    sp = params.space
    _, coeff = _tables(params)
    e = len(missing)
    zsp = space(radix, e)                  # digit block at missing positions
    fsp = space(radix, params.n - e)       # digit block at known positions

    # Full row index for (class c, block z): distribute c's digits over the
    # known positions and z's digits over the missing ones.
    cpart = np.zeros(fsp.size, dtype=np.int64)
    for slot, pos in enumerate(known):
        cpart += fsp.digit_table[slot] * radix**pos
    zpart = np.zeros(zsp.size, dtype=np.int64)
    for slot, pos in enumerate(missing):
        zpart += zsp.digit_table[slot] * radix**pos

    # One shared coefficient matrix: rows (t, z), unknown columns (j, z').
    m = np.zeros((params.parities * zsp.size, e * zsp.size), dtype=np.int64)
    zrows = np.arange(zsp.size)
    for t in range(params.parities):
        for j, pos in enumerate(missing):
            cols = j * zsp.size + zsp.shift_perm(j, t)
            m[t * zsp.size + zrows, cols] = coeff[t, pos, zsp.digit_table[j]]

    rhs = np.zeros((params.parities * zsp.size, fsp.size * params.instances),
                   dtype=np.int64)
    for t in range(params.parities):
        rows = slice(t * zsp.size, (t + 1) * zsp.size)
        for i in known:
            perm = sp.shift_perm(i, t)
            scale_i = coeff[t, i, sp.digit_table[i]]
            for c in range(fsp.size):
                arows = cpart[c] + zpart
                gathered = cw[:, i, perm[arows]]            # (instances, zsp)
                scl = scale_i[arows][:, None]
                cols = slice(c * params.instances, (c + 1) * params.instances)
                rhs[rows, cols] = (rhs[rows, cols] - scl * gathered.T) % q

    try:
        x = linalg.solve(m, rhs, q)
    except SingularMatrixError as exc:
        raise MdsViolationError(
            f"erasure system for missing nodes {missing} is singular"
        ) from exc

    out = cw.copy()
    for j, pos in enumerate(missing):
        block = x[j * zsp.size : (j + 1) * zsp.size, :]
        for c in range(fsp.size):
            arows = cpart[c] + zpart
            out[:, pos, arows] = block[:, c * params.instances :
                                       (c + 1) * params.instances].T
    return out

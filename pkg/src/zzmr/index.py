"""Little-endian base-s digit arithmetic on symbol indices.

A symbol index a in [0, s^n) is identified with its digit vector
(a_0, ..., a_{n-1}), a = sum a_i * s^i.  On top of single-digit shifts this
module enumerates the index families that drive repair grouping:

* ``pinned_indices``   -- indices whose digits at the helper positions are
  pinned to a given pattern (one pattern per value ``ell`` in [0, s^d));
* ``group_indices``    -- the subset of a pinned family whose non-helper
  digits sum to ``tau`` modulo s;
* ``anchor``           -- the m-th member of a group under the canonical
  enumeration that threads the digits of m through the non-helper
  positions, skipping one pivot position whose digit is forced by the
  congruence.

All enumerations are ascending by index value so downstream matrix layouts
are reproducible run to run.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .errors import ParameterError

__all__ = ["DigitSpace", "space"]


@dataclass(frozen=True)
class DigitSpace:
    """All length-n digit vectors over base s, with vectorized digit ops."""

    s: int
    n: int

    def __post_init__(self):
        if self.s < 1:
            raise ParameterError(f"digit base must be >= 1, got {self.s}")
        if self.n < 0:
            raise ParameterError(f"digit count must be >= 0, got {self.n}")

    @property
    def size(self) -> int:
        return self.s**self.n

    @cached_property
    def digit_table(self) -> np.ndarray:
        """(n, size) array; digit_table[i][a] is digit i of index a."""
        if self.n == 0:
            return np.zeros((0, 1), dtype=np.int64)
        ar = np.arange(self.size, dtype=np.int64)
        return np.stack([(ar // self.s**i) % self.s for i in range(self.n)])

    @cached_property
    def perms(self) -> np.ndarray:
        """(n, s, size) array; perms[i][w][a] = a with digit i bumped by w."""
        ar = np.arange(self.size, dtype=np.int64)
        out = np.empty((self.n, self.s, self.size), dtype=np.int64)
        for i in range(self.n):
            step = self.s**i
            rest = ar - self.digit_table[i] * step
            for w in range(self.s):
                out[i, w] = rest + ((self.digit_table[i] + w) % self.s) * step
        return out

    def digits(self, a: int) -> tuple[int, ...]:
        if not 0 <= a < self.size:
            raise ParameterError(f"index {a} outside [0, {self.size})")
        return tuple(int(a // self.s**i) % self.s for i in range(self.n))

    def digit(self, a: int, pos: int) -> int:
        if not 0 <= a < self.size:
            raise ParameterError(f"index {a} outside [0, {self.size})")
        if not 0 <= pos < self.n:
            raise ParameterError(f"digit position {pos} outside [0, {self.n})")
        return int(a // self.s**pos) % self.s

    def value(self, digs) -> int:
        if len(digs) != self.n:
            raise ParameterError(f"want {self.n} digits, got {len(digs)}")
        if any(not 0 <= g < self.s for g in digs):
            raise ParameterError(f"digits {tuple(digs)} outside [0, {self.s})")
        return sum(int(g) * self.s**i for i, g in enumerate(digs))

    def shift(self, a: int, pos: int, offset: int) -> int:
        """Index a with digit ``pos`` replaced by <digit + offset> mod s."""
        if not 0 <= pos < self.n:
            raise ParameterError(f"digit position {pos} outside [0, {self.n})")
        if not 0 <= a < self.size:
            raise ParameterError(f"index {a} outside [0, {self.size})")
        step = self.s**pos
        g = (a // step) % self.s
        return a + (((g + offset) % self.s) - g) * step

    def shift_perm(self, pos: int, offset: int) -> np.ndarray:
        """Vectorized ``shift``: the permutation array over all indices."""
        if not 0 <= pos < self.n:
            raise ParameterError(f"digit position {pos} outside [0, {self.n})")
        return self.perms[pos, offset % self.s]

    def _helper_mask(self, helpers, ell: int) -> np.ndarray:
        helpers = tuple(helpers)
        if any(not 0 <= j < self.n for j in helpers):
            raise ParameterError(f"helper positions {helpers} outside [0, {self.n})")
        if len(set(helpers)) != len(helpers):
            raise ParameterError(f"helper positions {helpers} contain duplicates")
        d = len(helpers)
        if not 0 <= ell < self.s**d:
            raise ParameterError(f"pin pattern {ell} outside [0, {self.s**d})")
        mask = np.ones(self.size, dtype=bool)
        for i, j in enumerate(sorted(helpers)):
            pin = (ell // self.s**i) % self.s
            mask &= self.digit_table[j] == pin
        return mask

    def pinned_indices(self, helpers, ell: int) -> list[int]:
        """Ascending indices whose digit at the i-th helper position equals
        the i-th digit of ell (helper positions taken in sorted order)."""
        return [int(a) for a in np.flatnonzero(self._helper_mask(helpers, ell))]

    def group_indices(self, helpers, ell: int, tau: int) -> list[int]:
        """The pinned family restricted to non-helper digit sum == tau (mod s)."""
        if not 0 <= tau < self.s:
            raise ParameterError(f"congruence class {tau} outside [0, {self.s})")
        mask = self._helper_mask(helpers, ell)
        others = sorted(set(range(self.n)) - set(helpers))
        if others:
            sums = self.digit_table[others].sum(axis=0) % self.s
            mask &= sums == tau
        elif tau != 0:
            return []
        return [int(a) for a in np.flatnonzero(mask)]

    def anchor(self, helpers, ell: int, tau: int, pivot: int, m: int) -> int:
        """The m-th group member under the pivot-skipping enumeration.

        Helper digits come from ell; the digits of m fill the non-helper
        positions other than ``pivot`` in ascending position order; the digit
        at ``pivot`` is the unique value completing the tau-congruence.
        """
        helpers = sorted(helpers)
        others = sorted(set(range(self.n)) - set(helpers))
        if pivot not in others:
            raise ParameterError(f"pivot {pivot} is not a non-helper position")
        free = [p for p in others if p != pivot]
        if not 0 <= m < self.s ** len(free):
            raise ParameterError(f"member rank {m} outside [0, {self.s**len(free)})")
        if not 0 <= tau < self.s:
            raise ParameterError(f"congruence class {tau} outside [0, {self.s})")
        digs = [0] * self.n
        for i, j in enumerate(helpers):
            digs[j] = (ell // self.s**i) % self.s
        acc = 0
        for i, p in enumerate(free):
            digs[p] = (m // self.s**i) % self.s
            acc += digs[p]
        digs[pivot] = (tau - acc) % self.s
        return self.value(digs)


@lru_cache(maxsize=None)
def space(s: int, n: int) -> DigitSpace:
    """Shared DigitSpace instances so cached digit tables are reused."""
    return DigitSpace(s, n)

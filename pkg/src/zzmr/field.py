"""Arithmetic in a prime field GF(q) with a designated multiplicative generator.

Field elements are plain Python ints kept in canonical form, i.e. in the
range [0, q).  ``PrimeField`` bundles the modulus with a generator of the
multiplicative group and offers range-checked scalar operations; bulk
arithmetic elsewhere in the package works directly on NumPy int64 arrays
with explicit ``% q`` reductions.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ParameterError

__all__ = [
    "PrimeField",
    "is_prime",
    "smallest_prime_geq",
    "prime_factors",
    "find_primitive",
]


def is_prime(m: int) -> bool:
    """Trial-division primality check (moduli here are desk-scale)."""
    if m < 2:
        return False
    if m < 4:
        return True
    if m % 2 == 0:
        return False
    f = 3
    while f * f <= m:
        if m % f == 0:
            return False
        f += 2
    return True


def smallest_prime_geq(m: int) -> int:
    """Least prime >= m.  Used to pick the default modulus for n nodes."""
    if m < 2:
        raise ParameterError(f"smallest_prime_geq needs m >= 2, got {m}")
    p = m
    while not is_prime(p):
        p += 1
    return p


def prime_factors(m: int) -> list[int]:
    """Distinct prime factors of m, ascending."""
    out = []
    f = 2
    while f * f <= m:
        if m % f == 0:
            out.append(f)
            while m % f == 0:
                m //= f
        f += 1 if f == 2 else 2
    if m > 1:
        out.append(m)
    return out


def find_primitive(q: int) -> int:
    """Smallest generator of the multiplicative group of GF(q).

    The multiplicative order is verified through the prime factorization of
    q - 1: g generates iff g^((q-1)/p) != 1 for every prime p | q - 1.
    """
    if not is_prime(q):
        raise ParameterError(f"field size must be prime, got {q}")
    if q == 2:
        return 1
    factors = prime_factors(q - 1)
    for g in range(2, q):
        if all(pow(g, (q - 1) // p, q) != 1 for p in factors):
            return g
    raise ParameterError(f"no generator found for GF({q})")  # pragma: no cover


@dataclass(frozen=True)
class PrimeField:
    """GF(q) for prime q, with primitive element ``gamma``.

    ``gamma`` defaults to the smallest generator; a caller-supplied value is
    checked to have multiplicative order exactly q - 1.
    """

    q: int
    gamma: int = 0  # 0 means "pick the default"; replaced in __post_init__

    def __post_init__(self):
        if not is_prime(self.q):
            raise ParameterError(f"field size must be prime, got {self.q}")
        if self.gamma == 0:
            object.__setattr__(self, "gamma", find_primitive(self.q))
            return
        g = self.gamma
        if not 0 < g < self.q:
            raise ParameterError(f"generator {g} outside [1, {self.q})")
        if self.q > 2:
            ok = all(
                pow(g, (self.q - 1) // p, self.q) != 1
                for p in prime_factors(self.q - 1)
            )
            if not ok:
                raise ParameterError(
                    f"{g} does not generate GF({self.q})*: order < {self.q - 1}"
                )

    def _chk(self, *elems: int) -> None:
        for a in elems:
            if not 0 <= a < self.q:
                raise ParameterError(
                    f"{a} is not a canonical element of GF({self.q})"
                )

    def add(self, a: int, b: int) -> int:
        self._chk(a, b)
        return (a + b) % self.q

    def sub(self, a: int, b: int) -> int:
        self._chk(a, b)
        return (a - b) % self.q

    def mul(self, a: int, b: int) -> int:
        self._chk(a, b)
        return (a * b) % self.q

    def neg(self, a: int) -> int:
        self._chk(a)
        return (self.q - a) % self.q

    def inv(self, a: int) -> int:
        self._chk(a)
        if a == 0:
            raise ZeroDivisionError("0 has no multiplicative inverse")
        return pow(a, self.q - 2, self.q)

    def pow(self, a: int, e: int) -> int:
        self._chk(a)
        if e < 0:
            return pow(self.inv(a), -e, self.q)
        return pow(a, e, self.q)

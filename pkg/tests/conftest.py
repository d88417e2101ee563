import numpy as np
import pytest

from zzmr import CodeParams
from zzmr.field import smallest_prime_geq

# Desk-scale family used by the exhaustive suites: every (n, k, d, h) with
# n in {4,5,6}, digit alphabet s = d-k+1 in {2,3}, h in {1,2,3}, and
# k <= d <= n-h.  28 tuples.
GRID_NKDH = [
    (n, k, k + s - 1, h)
    for n in (4, 5, 6)
    for s in (2, 3)
    for h in (1, 2, 3)
    for k in range(1, n)
    if k + s - 1 <= n - h
]


def repairable_params(n: int, k: int, d: int, h: int) -> CodeParams:
    """Params over the smallest field where every node can be repaired.

    q-1 must exceed n so that no node's multiplier gamma**(i+1) wraps to 1;
    the smallest prime >= n+2 guarantees that.
    """
    return CodeParams.build(n, k, d, h, q=smallest_prime_geq(n + 2))


@pytest.fixture(scope="session")
def grid_params():
    return [repairable_params(*t) for t in GRID_NKDH]


@pytest.fixture
def rng():
    return np.random.default_rng(0xC0DE)

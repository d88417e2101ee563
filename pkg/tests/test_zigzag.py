from itertools import combinations

import numpy as np
import pytest

from zzmr import (
    CodeParams,
    check_parity,
    encode,
    erasure_decode,
    generate_data,
    node_multiplier,
    parity_coefficient,
    parity_matrix,
)
from zzmr.errors import InconsistentDataError, ParameterError
from zzmr.linalg import GpMatrix, gp_dense

GF7 = dict(q=7, gamma=3)


def small_codeword(params, seed=0):
    return encode(params, generate_data(params, seed))


# -- parameter validation -----------------------------------------------------


@pytest.mark.parametrize("bad", [
    dict(n=4, k=0, d=2, h=1),           # k too small
    dict(n=4, k=4, d=4, h=1),           # k = n
    dict(n=4, k=2, d=1, h=1),           # d < k
    dict(n=4, k=2, d=4, h=1),           # d > n-h
    dict(n=4, k=2, d=3, h=0),           # no failures to plan for
    dict(n=6, k=2, d=3, h=1, q=6),      # composite q
    dict(n=6, k=2, d=3, h=1, q=5),      # q < n+1
    dict(n=6, k=2, d=3, h=1, q=7, gamma=2),   # gamma not a generator
    dict(n=6, k=2, d=3, h=1, q=7, gamma=0),   # gamma out of range
])
def test_invalid_params_rejected(bad):
    with pytest.raises(ParameterError):
        CodeParams.build(**bad)


def test_build_defaults():
    p = CodeParams.build(6, 2, 3, 2)
    assert (p.q, p.gamma) == (7, 3)
    assert p.radix == 2 and p.parities == 4
    assert p.base == 64 and p.instances == 3
    assert p.symbols_per_node == 192


def test_degenerate_nodes():
    assert CodeParams.build(6, 2, 3, 2, q=7).degenerate_nodes == (5,)
    assert CodeParams.build(6, 2, 3, 2, q=11).degenerate_nodes == ()
    assert CodeParams.build(4, 2, 3, 1, q=5).degenerate_nodes == (3,)


# -- coefficient structure ----------------------------------------------------


def test_node_multipliers_gf7():
    p = CodeParams.build(6, 2, 3, 1, **GF7)
    assert [node_multiplier(p, i, 0) for i in range(6)] == [3, 2, 6, 4, 5, 1]
    assert all(node_multiplier(p, i, 1) == 1 for i in range(6))


def test_level_one_matrix_rows_gf7():
    # the worked 64-row example: rows 0..5 of the first zigzag map of node 0
    p = CodeParams.build(6, 2, 3, 1, **GF7)
    dense = gp_dense(parity_matrix(p, 1, 0))
    gamma = 3
    eye = np.eye(64, dtype=np.int64)
    want = [gamma * eye[1], eye[0], gamma * eye[3], eye[2], gamma * eye[5], eye[4]]
    assert np.array_equal(dense[:6], np.array(want) % 7)


def test_periodicity_full_rotation():
    # shifting a digit s times returns to the identity permutation scaled by
    # the node multiplier: the t = z*s parity map is gamma^((i+1)z) * I
    for p in [CodeParams.build(6, 2, 3, 1, **GF7), CodeParams.build(6, 1, 3, 1, q=11)]:
        s = p.radix
        for i in range(p.n):
            for z in range(1, p.parities // s + 1):
                t = z * s
                if t >= p.parities:
                    break
                m = parity_matrix(p, t, i)
                assert np.array_equal(m.target, np.arange(p.base))
                want = pow(p.gamma, (i + 1) * z, p.q)
                assert np.all(m.scale == want)


def test_parity_matrix_is_power_of_level_one():
    # A_{t,i} == A_{1,i}^t, composed in scaled-permutation form
    p = CodeParams.build(5, 2, 3, 1, q=11)
    for i in range(p.n):
        base = parity_matrix(p, 1, i)
        target = np.arange(p.base)
        scale = np.ones(p.base, dtype=np.int64)
        for t in range(p.parities):
            m = parity_matrix(p, t, i)
            assert np.array_equal(m.target, target)
            assert np.array_equal(m.scale, scale)
            # compose one more application of the level-1 map on the right:
            # row a of the product picks up base's action at target[a]
            scale = scale * base.scale[target] % p.q
            target = base.target[target]


def test_parity_matrix_bijective_and_coefficient_consistent():
    p = CodeParams.build(4, 1, 2, 2, q=7)
    for t in range(p.parities):
        for i in range(p.n):
            m = parity_matrix(p, t, i)
            assert m.is_bijective
            for a in (0, 5, p.base - 1):
                assert m.scale[a] == parity_coefficient(p, t, i, a)


# -- properties P1/P2 ---------------------------------------------------------


def test_coefficient_depends_only_on_own_digit_exhaustive_n4():
    p = CodeParams.build(4, 1, 2, 1, q=7)
    sp = p.space
    for t in range(p.parities):
        for i in range(p.n):
            by_digit = {}
            for a in range(p.base):
                u = sp.digit(a, i)
                c = parity_coefficient(p, t, i, a)
                assert by_digit.setdefault(u, c) == c


def test_coefficient_invariant_under_other_digit_shifts(rng):
    p = CodeParams.build(6, 2, 3, 2, q=11)
    sp = p.space
    for _ in range(500):
        a = int(rng.integers(p.base))
        t = int(rng.integers(p.parities))
        i = int(rng.integers(p.n))
        j = int(rng.integers(p.n))
        if i == j:
            continue
        w = int(rng.integers(1, p.radix))
        assert parity_coefficient(p, t, i, a) == \
            parity_coefficient(p, t, i, sp.shift(a, j, w))


# -- encode / check_parity ----------------------------------------------------


@pytest.mark.parametrize("nkdh", [(4, 2, 3, 1), (5, 2, 3, 2), (6, 2, 3, 2),
                                  (5, 1, 3, 1), (6, 3, 4, 2)])
def test_encode_is_systematic_and_satisfies_parity(nkdh):
    p = CodeParams.build(*nkdh)
    data = generate_data(p, seed=11)
    cw = encode(p, data)
    assert cw.shape == (p.instances, p.n, p.base)
    assert np.array_equal(cw[:, : p.k, :], data)
    assert cw.min() >= 0 and cw.max() < p.q
    assert check_parity(p, cw)


def test_check_parity_reports_first_violation():
    p = CodeParams.build(4, 2, 3, 1)
    cw = small_codeword(p)
    cw[1, 2, 5] = (cw[1, 2, 5] + 1) % p.q
    rep = check_parity(p, cw)
    assert not rep
    w, t, a = rep.violation
    assert w == 1
    # level 0 hits row 5 directly; scan order puts (instance, level) first
    assert t == 0
    assert a == 5
    assert rep.equations == p.instances * p.parities * p.base


def test_check_parity_scan_order_prefers_low_instance():
    p = CodeParams.build(4, 2, 3, 1)
    cw = small_codeword(p)
    cw[0, 0, 9] = (cw[0, 0, 9] + 3) % p.q
    cw[1, 0, 2] = (cw[1, 0, 2] + 3) % p.q
    assert check_parity(p, cw).violation[0] == 0


def test_encode_rejects_bad_input():
    p = CodeParams.build(4, 2, 3, 1)
    good = generate_data(p, seed=0)
    with pytest.raises(ParameterError):
        encode(p, good[:, :1, :])                     # wrong node count
    with pytest.raises(ParameterError):
        encode(p, good.astype(np.float64))            # non-integer symbols
    bad = good.copy()
    bad[0, 0, 0] = p.q
    with pytest.raises(ParameterError):
        encode(p, bad)                                # out of field range


# -- erasure decoding ---------------------------------------------------------


@pytest.mark.parametrize("nkdh,q", [((4, 2, 3, 1), 5), ((6, 2, 3, 1), 7)])
def test_any_k_subset_reconstructs(nkdh, q):
    p = CodeParams.build(*nkdh, q=q)
    cw = small_codeword(p, seed=5)
    for known in combinations(range(p.n), p.k):
        masked = cw.copy()
        for i in range(p.n):
            if i not in known:
                masked[:, i, :] = 0
        assert np.array_equal(erasure_decode(p, masked, known=known), cw)


def test_decode_with_extra_survivors_uses_consistency():
    p = CodeParams.build(5, 2, 3, 1)
    cw = small_codeword(p, seed=2)
    masked = cw.copy()
    masked[:, 4, :] = 0
    assert np.array_equal(erasure_decode(p, masked, known=[0, 1, 2, 3]), cw)


def test_decode_flags_contradictory_survivors():
    p = CodeParams.build(5, 2, 3, 1)
    cw = small_codeword(p, seed=2)
    cw[0, 1, 7] = (cw[0, 1, 7] + 1) % p.q  # corrupt one surviving symbol
    masked = cw.copy()
    masked[:, 4, :] = 0
    with pytest.raises(InconsistentDataError):
        erasure_decode(p, masked, known=[0, 1, 2, 3])


def test_decode_validates_known_set():
    p = CodeParams.build(4, 2, 3, 1)
    cw = small_codeword(p)
    with pytest.raises(ParameterError):
        erasure_decode(p, cw, known=[0])          # fewer than k
    with pytest.raises(ParameterError):
        erasure_decode(p, cw, known=[0, 7])       # out of range


def test_decode_no_missing_is_identity():
    p = CodeParams.build(4, 2, 3, 1)
    cw = small_codeword(p)
    out = erasure_decode(p, cw, known=range(4))
    assert np.array_equal(out, cw)
    assert out is not cw

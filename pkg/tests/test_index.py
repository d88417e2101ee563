import numpy as np
import pytest

from zzmr.errors import ParameterError
from zzmr.index import DigitSpace, space


def test_digits_value_roundtrip():
    sp = DigitSpace(3, 4)
    assert sp.size == 81
    for a in range(sp.size):
        ds = sp.digits(a)
        assert len(ds) == 4
        assert sp.value(ds) == a
    # little-endian: position 0 is the least significant digit
    assert list(sp.digits(5)) == [2, 1, 0, 0]


def test_digit_table_matches_digits():
    sp = DigitSpace(2, 6)
    for pos in range(6):
        for a in (0, 1, 31, 63):
            assert sp.digit_table[pos][a] == sp.digits(a)[pos] == sp.digit(a, pos)


def test_digit_accessor_validates():
    sp = DigitSpace(2, 3)
    with pytest.raises(ParameterError):
        sp.digit(8, 0)
    with pytest.raises(ParameterError):
        sp.digit(0, 3)


def test_shift_wraps_single_digit():
    sp = DigitSpace(3, 3)
    a = sp.value([2, 1, 0])
    assert sp.digits(sp.shift(a, 0, 1)) [0] == 0  # 2+1 wraps
    assert sp.shift(a, 1, 3) == a                 # offset multiple of s
    assert sp.shift(sp.shift(a, 2, 2), 2, -2) == a


def test_shift_perm_is_gather_form():
    sp = DigitSpace(2, 5)
    for pos in range(5):
        for off in (0, 1, -1, 7):
            perm = sp.shift_perm(pos, off)
            for a in (0, 9, 31):
                assert perm[a] == sp.shift(a, pos, off)
            # a permutation: every row hit exactly once
            assert len(np.unique(perm)) == sp.size


def test_empty_space():
    sp = DigitSpace(2, 0)
    assert sp.size == 1
    assert sp.digit_table.shape == (0, 1)
    assert list(sp.digits(0)) == []


def test_invalid_space():
    with pytest.raises(ParameterError):
        DigitSpace(0, 3)
    with pytest.raises(ParameterError):
        DigitSpace(2, -1)


def test_unary_base():
    # s = 1 is the degenerate alphabet used by replication-style layouts
    sp = DigitSpace(1, 4)
    assert sp.size == 1
    assert sp.shift(0, 2, 5) == 0


def test_space_cache_returns_same_object():
    assert space(2, 6) is space(2, 6)


def test_pinned_indices_fix_helper_digits():
    sp = DigitSpace(2, 6)
    helpers = [3, 4, 5]
    for ell in (0, 5, 7):
        rows = sp.pinned_indices(helpers, ell)
        assert len(rows) == 2 ** 3  # free digits at the non-helper positions
        want = np.array([ell >> slot & 1 for slot in range(3)])
        for a in rows:
            ds = sp.digits(a)
            assert np.array_equal(np.asarray(ds)[helpers], want)


def test_group_indices_partition_pinned_rows():
    sp = DigitSpace(2, 6)
    helpers = [1, 2, 4]
    for ell in range(8):
        pinned = set(sp.pinned_indices(helpers, ell))
        union = []
        for tau in range(2):
            rows = sp.group_indices(helpers, ell, tau)
            nonhelp = [0, 3, 5]
            for a in rows:
                ds = sp.digits(a)
                assert sum(ds[p] for p in nonhelp) % 2 == tau
            union.extend(rows)
        assert set(union) == pinned
        assert len(union) == len(pinned)


def test_group_indices_example_subgroups():
    # the worked (6,2,3,2) scenario: helpers {3,4,5} pinned to 0, groups
    # split the low-digit block {0..7} by digit-sum parity
    sp = DigitSpace(2, 6)
    assert sorted(sp.group_indices([3, 4, 5], 0, 0)) == [0, 3, 5, 6]
    assert sorted(sp.group_indices([3, 4, 5], 0, 1)) == [1, 2, 4, 7]


def test_anchor_enumeration():
    sp = DigitSpace(2, 6)
    helpers = [3, 4, 5]
    # pivot 0; anchors indexed by digits at the non-pivot, non-helper
    # positions {1, 2}; the pivot digit balances the sum to tau (mod s)
    got = [sp.anchor(helpers, 0, 0, 0, m) for m in range(4)]
    assert got == [0, 3, 5, 6]
    got1 = [sp.anchor(helpers, 0, 1, 0, m) for m in range(4)]
    assert got1 == [1, 2, 4, 7]
    # anchors enumerate each group exactly
    assert sorted(got) == sorted(sp.group_indices(helpers, 0, 0))


def test_anchor_respects_ell():
    sp = DigitSpace(2, 6)
    helpers = [0, 2, 5]
    for ell in (1, 6):
        for tau in (0, 1):
            anchors = [sp.anchor(helpers, ell, tau, 1, m) for m in range(4)]
            assert sorted(anchors) == sorted(sp.group_indices(helpers, ell, tau))

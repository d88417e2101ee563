import pytest

from zzmr.errors import ParameterError
from zzmr.field import PrimeField, find_primitive, is_prime, prime_factors, smallest_prime_geq


def test_is_prime_small():
    primes = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31}
    for m in range(-3, 32):
        assert is_prime(m) == (m in primes), m


def test_is_prime_larger():
    assert is_prime(1_000_003)
    assert not is_prime(1_000_001)  # 101 * 9901
    assert not is_prime(2**16 + 2)


def test_smallest_prime_geq():
    assert smallest_prime_geq(2) == 2
    assert smallest_prime_geq(7) == 7
    assert smallest_prime_geq(8) == 11
    assert smallest_prime_geq(90) == 97
    with pytest.raises(ParameterError):
        smallest_prime_geq(1)


def test_prime_factors():
    assert prime_factors(1) == []
    assert prime_factors(12) == [2, 3]
    assert prime_factors(97) == [97]
    assert prime_factors(360) == [2, 3, 5]


@pytest.mark.parametrize("q,expected", [(5, 2), (7, 3), (11, 2), (13, 2), (97, 5)])
def test_find_primitive(q, expected):
    g = find_primitive(q)
    assert g == expected
    # verify the order really is q-1
    seen = set()
    x = 1
    for _ in range(q - 1):
        x = x * g % q
        seen.add(x)
    assert len(seen) == q - 1


def test_find_primitive_rejects_composite():
    with pytest.raises(ParameterError):
        find_primitive(8)


def test_gf7_generator_powers():
    f = PrimeField(7, 3)
    assert [f.pow(3, e) for e in range(6)] == [1, 3, 2, 6, 4, 5]


def test_field_ops_match_python_ints():
    f = PrimeField(97, 5)
    for a in (0, 1, 50, 96):
        for b in (1, 2, 93):
            assert f.add(a, b) == (a + b) % 97
            assert f.sub(a, b) == (a - b) % 97
            assert f.mul(a, b) == (a * b) % 97
            assert f.mul(b, f.inv(b)) == 1
            assert f.pow(a, 12) == pow(a, 12, 97)
    assert f.neg(0) == 0
    assert f.neg(1) == 96


def test_inverse_of_zero_rejected():
    f = PrimeField(11, 2)
    with pytest.raises(ZeroDivisionError):
        f.inv(0)


def test_nonprime_modulus_rejected():
    with pytest.raises(ParameterError):
        PrimeField(9, 2)


def test_nongenerator_rejected():
    # 2 has order 3 in GF(7)*, not 6
    with pytest.raises(ParameterError):
        PrimeField(7, 2)


def test_default_gamma_sentinel():
    # gamma=0 means "arithmetic only"; generator ops must still work
    f = PrimeField(13, 0)
    assert f.mul(6, 11) == 66 % 13

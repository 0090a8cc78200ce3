import math
import random
import warnings

import pytest

from support_lab import rigidity_sl2 as sl
from support_lab.rigidity_sl2 import Mat2ModM


def test_deligne_example_mod_15():
    a = 2
    factors = sl.deligne_factorization(a, 15)
    assert all(f.is_unitriangular() for f in factors)
    assert sl.product(factors) == sl.diag(8, 2, 15)


def test_deligne_rejects_nonunit():
    with pytest.raises(sl.DomainError):
        sl.deligne_factorization(5, 15)


def test_crt_split_example_mod_15():
    g = Mat2ModM(15, 2, 0, 0, 8)
    parts = sl.crt_split(g)
    assert [h.m for h in parts] == [3, 5]
    assert parts[0].rows() == ((2, 0), (0, 2)) and parts[1].rows() == ((2, 0), (0, 3))
    assert sl.crt_join(parts) == g


def test_small_prime_guard():
    g = Mat2ModM(15, 2, 0, 0, 8)
    with pytest.raises(sl.Unsupported):
        sl.elementary_decomposition(g)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        word = sl.elementary_decomposition(g, allow_small_primes=True)
    assert caught and word.evaluate() == g


def test_non_squarefree_rejected():
    with pytest.raises(sl.Unsupported):
        sl.elementary_decomposition(Mat2ModM(25, 1, 0, 0, 1))


def test_decomposition_rejects_det_not_one():
    with pytest.raises(sl.DomainError):
        sl.elementary_decomposition(Mat2ModM(35, 2, 0, 0, 1))


def random_sl2(m, rng):
    while True:
        a, b, c = rng.randrange(m), rng.randrange(m), rng.randrange(m)
        if math.gcd(a, m) == 1:
            return Mat2ModM(m, a, b, c, (1 + b * c) * pow(a, -1, m))
        if math.gcd(c, m) == 1:
            # b = (a d - 1) / c
            d = rng.randrange(m)
            return Mat2ModM(m, a, (a * d - 1) * pow(c, -1, m), c, d)


def test_random_decompositions_mod_385():
    rng = random.Random(385)
    m = 5 * 7 * 11
    for _ in range(10_000):
        g = random_sl2(m, rng)
        assert g.in_sl2()
        word = sl.elementary_decomposition(g)
        assert [side for side, _ in word.letters] == list(sl.WORD_PATTERN)
        assert word.evaluate() == g


def test_split_join_round_trip_and_homomorphism():
    rng = random.Random(7)
    m = 5 * 7 * 13
    for _ in range(500):
        g, h = random_sl2(m, rng), random_sl2(m, rng)
        assert sl.crt_join(sl.crt_split(g)) == g
        prod_parts = [x @ y for x, y in zip(sl.crt_split(g), sl.crt_split(h))]
        assert sl.crt_split(g @ h) == prod_parts


def test_matrix_algebra():
    g = Mat2ModM(7, 3, 1, 5, 2)
    assert g.in_sl2()
    assert g @ g.inverse() == Mat2ModM.identity(7)
    assert g**-3 == (g**3).inverse()
    assert g**0 == Mat2ModM.identity(7)


@pytest.mark.parametrize("q", [5, 7])
def test_group_sizes(q):
    assert sum(1 for _ in sl.sl2_elements(q)) == q * (q * q - 1)
    assert len(set(sl.sl2_elements(q))) == q * (q * q - 1)


def test_conjugacy_class_of_unipotent_mod_5():
    cls = sl.conjugacy_class(sl.upper(1, 5))
    assert len(cls) == (5 * 5 - 1) // 2
    assert all(h.trace == 2 for h in cls)


def test_semisimple_rejects_repeated_eigenvalue():
    with pytest.raises(sl.DomainError):
        sl.semisimple_power_conjugacy_count(sl.upper(1, 7))


def test_range_limits():
    with pytest.raises(sl.Unsupported):
        sl.unipotent_power_conjugacy_count(29)
    with pytest.raises(sl.DomainError):
        sl.order_census(9)


def test_census_sums_to_group_order():
    for q in (5, 7):
        census = sl.order_census(q)
        assert sum(census.values()) == q * (q * q - 1)
        assert census[1] == 1 and census[2] == 1


def test_census_table_rows():
    t = sl.census_table([5])
    assert t.rows[0] == (5, 1, 1)
    assert t.summary()["unipotent_power_conjugacy"] == {5: 2}

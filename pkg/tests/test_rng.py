from fractions import Fraction

import pytest

from dagforge.rng import RandomSource


def test_same_seed_same_stream():
    a, b = RandomSource(123), RandomSource(123)
    assert [a.below(10**30) for _ in range(20)] == [b.below(10**30) for _ in range(20)]


def test_split_streams_are_independent_of_each_other():
    first = [RandomSource.split(5, i).bits(64) for i in range(4)]
    again = [RandomSource.split(5, i).bits(64) for i in (3, 2, 1, 0)][::-1]
    assert first == again
    assert len(set(first)) == 4


def test_below_rejects_empty_range():
    with pytest.raises(ValueError):
        RandomSource(0).below(0)


def test_below_power_of_two_uses_exact_bits():
    rng = RandomSource(9)
    for t in range(1, 70):
        before = rng.bits_used
        assert 0 <= rng.below(2**t) < 2**t
        assert rng.bits_used - before == t


def test_choose_returns_distinct_indices():
    rng = RandomSource(1)
    for pop, size in [(10, 0), (10, 3), (10, 8), (10, 10), (10**6, 5)]:
        got = rng.choose(pop, size)
        assert len(got) == len(set(got)) == size
        assert all(0 <= x < pop for x in got)


def test_weighted_index_respects_zero_weights():
    rng = RandomSource(2)
    assert {rng.weighted_index([0, 5, 0]) for _ in range(50)} == {1}


def test_bernoulli_extremes():
    rng = RandomSource(3)
    assert not any(rng.bernoulli(Fraction(0)) for _ in range(100))
    assert all(rng.bernoulli(Fraction(1)) for _ in range(100))

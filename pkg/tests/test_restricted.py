from fractions import Fraction

import pytest

from dagforge.baselines import is_weakly_connected
from dagforge.counting import (
    build_children_limited_table,
    build_count_table,
    build_restricted_table,
    build_weighted_table,
)
from dagforge.dag import Dag
from dagforge.oracle_stats import (
    Histogram,
    chi_square_uniformity,
    enumerate_all_dags,
    filter_connected,
    filter_max_children,
    layered_max_in_dags,
    peel_layers,
    two_sample_test,
    uniform_expectation,
    weighted_expectation,
)
from dagforge.restricted import (
    RestrictionSpec,
    sample_children_limited_dag,
    sample_connected_dag,
    sample_connected_with_attempts,
    sample_max_in_dag,
    sample_weighted_dag,
)
from dagforge.rng import RandomSource
from dagforge.sample_exact import sample_uniform_dag

ALPHA = 1e-3


def draw(f, count, seed):
    rng = RandomSource(seed)
    return [f(rng) for _ in range(count)]


@pytest.mark.parametrize(
    "kw",
    [
        dict(kind="bogus"),
        dict(kind="max_in", K=0),
        dict(kind="max_children"),
        dict(kind="max_in_out", K=1),
        dict(kind="weighted", p=Fraction(3, 2)),
        dict(kind="weighted", p=Fraction(-1, 2)),
    ],
)
def test_restriction_spec_rejects(kw):
    with pytest.raises(ValueError):
        RestrictionSpec(**kw)


def test_restriction_spec_accepts():
    RestrictionSpec("max_in_out", K=2, K_n=0)
    RestrictionSpec("weighted", p=Fraction(0))


# connected


def test_connected_n2_uniform_over_two():
    t = build_count_table(2)
    dags = draw(lambda r: sample_connected_dag(2, t, r), 4000, 1)
    keys = {d.key() for d in dags}
    assert keys == {Dag.from_edges(2, [(0, 1)]).key(), Dag.from_edges(2, [(1, 0)]).key()}
    hist = Histogram.of_dags(2, dags)
    _, p = chi_square_uniformity(hist, uniform_expectation(filter_connected(enumerate_all_dags(2))))
    assert p > ALPHA


def test_connected_n4_uniform_over_446():
    oracle = filter_connected(enumerate_all_dags(4))
    assert len(oracle) == 446
    t = build_count_table(4)
    dags = draw(lambda r: sample_connected_dag(4, t, r), 20000, 2)
    assert all(is_weakly_connected(d) for d in dags)
    _, p = chi_square_uniformity(Histogram.of_dags(4, dags), uniform_expectation(oracle))
    assert p > ALPHA


def test_connected_acceptance_n10(table20):
    rng = RandomSource(3)
    attempts = sum(sample_connected_with_attempts(10, table20, rng)[1] for _ in range(2000))
    assert 2000 / attempts > 0.99


# in-arc limits


def test_max_in_nonbinding_matches_uniform():
    t = build_restricted_table(4, 3)
    plain = build_count_table(4)
    assert t.a == plain.a
    a = Histogram.of_dags(4, draw(lambda r: sample_max_in_dag(4, t, r), 20000, 4))
    b = Histogram.of_dags(4, draw(lambda r: sample_uniform_dag(4, plain, r), 20000, 5))
    assert two_sample_test(a, b)[1] > ALPHA


def _layer_in_counts_ok(dag, K):
    # each vertex gets at most K arcs from any one peeled layer
    for layer in peel_layers(dag):
        for v in range(dag.n):
            if sum(1 for u in layer if dag.rows[u] >> v & 1) > K:
                return False
    return True


def test_max_in_structural_n3():
    t = build_restricted_table(3, 1)
    dags = draw(lambda r: sample_max_in_dag(3, t, r), 10000, 6)
    assert all(_layer_in_counts_ok(d, 1) for d in dags)


@pytest.mark.parametrize("n,K,K_n", [(3, 1, None), (4, 1, None), (4, 1, 1), (4, 2, 0)])
def test_max_in_uniform_over_layered_oracle(n, K, K_n):
    oracle = layered_max_in_dags(n, K, K_n)
    t = build_restricted_table(n, K, K_n)
    assert len(oracle) == t.total[n]
    count = max(20 * len(oracle), 5000)
    hist = Histogram.of_dags(n, draw(lambda r: sample_max_in_dag(n, t, r), count, 7))
    assert chi_square_uniformity(hist, uniform_expectation(oracle))[1] > ALPHA


def test_max_in_rejects_wrong_table():
    with pytest.raises(ValueError):
        sample_max_in_dag(3, build_count_table(3), RandomSource(0))


# children limits


def test_children_structural_n3():
    t = build_children_limited_table(3, 1)
    for d in draw(lambda r: sample_children_limited_dag(3, t, r), 5000, 8):
        assert max(d.out_degrees()) <= 1


@pytest.mark.parametrize("strategy", ["counts", "marking", "auto"])
def test_children_uniform_n4_k1(strategy):
    oracle = filter_max_children(enumerate_all_dags(4), 1)
    t = build_children_limited_table(4, 1)
    assert len(oracle) == t.total[4] == 125
    dags = draw(lambda r: sample_children_limited_dag(4, t, r, strategy=strategy), 12500, 9)
    assert chi_square_uniformity(Histogram.of_dags(4, dags), uniform_expectation(oracle))[1] > ALPHA


def test_children_strategies_agree():
    t = build_children_limited_table(4, 1)
    a = Histogram.of_dags(4, draw(lambda r: sample_children_limited_dag(4, t, r, strategy="counts"), 15000, 10))
    b = Histogram.of_dags(4, draw(lambda r: sample_children_limited_dag(4, t, r, strategy="marking"), 15000, 11))
    assert two_sample_test(a, b)[1] > ALPHA


def test_children_k2_n4_uniform():
    oracle = filter_max_children(enumerate_all_dags(4), 2)
    t = build_children_limited_table(4, 2)
    assert len(oracle) == t.total[4]
    dags = draw(lambda r: sample_children_limited_dag(4, t, r, strategy="marking"), 20 * len(oracle), 12)
    assert chi_square_uniformity(Histogram.of_dags(4, dags), uniform_expectation(oracle))[1] > ALPHA


def test_children_nonbinding_equals_unrestricted():
    assert build_children_limited_table(6, 5).a == build_count_table(6).a


def test_children_bad_strategy():
    t = build_children_limited_table(3, 1)
    with pytest.raises(ValueError):
        for _ in range(20):
            sample_children_limited_dag(3, t, RandomSource(0), strategy="nope")


def test_max_parents_by_reversal():
    t = build_children_limited_table(5, 1)
    for d in draw(lambda r: sample_children_limited_dag(5, t, r).reversed(), 500, 13):
        assert max(d.in_degrees()) <= 1


# weighted


def test_weighted_n3_quarter():
    p = Fraction(1, 4)
    w = build_weighted_table(3, p)
    dags = draw(lambda r: sample_weighted_dag(3, w, r), 20000, 14)
    expected = weighted_expectation(enumerate_all_dags(3), p)
    assert chi_square_uniformity(Histogram.of_dags(3, dags), expected)[1] > ALPHA


def test_weighted_zero_is_empty():
    w = build_weighted_table(5, Fraction(0))
    assert all(d.num_edges == 0 for d in draw(lambda r: sample_weighted_dag(5, w, r), 50, 15))


def test_weighted_half_matches_uniform():
    w = build_weighted_table(4, Fraction(1, 2))
    t = build_count_table(4)
    a = Histogram.of_dags(4, draw(lambda r: sample_weighted_dag(4, w, r), 15000, 16))
    b = Histogram.of_dags(4, draw(lambda r: sample_uniform_dag(4, t, r), 15000, 17))
    assert two_sample_test(a, b)[1] > ALPHA


def test_weighted_one_is_complete_order():
    w = build_weighted_table(6, Fraction(1))
    for d in draw(lambda r: sample_weighted_dag(6, w, r), 50, 18):
        assert d.num_edges == 15
        assert [len(layer) for layer in peel_layers(d)] == [1] * 6


def test_weighted_rejects_bad_p():
    with pytest.raises(ValueError):
        build_weighted_table(3, Fraction(2))

import warnings
from collections import Counter
from fractions import Fraction

import pytest

from dagforge.counting import build_count_table, build_restricted_table
from dagforge.dag import Dag
from dagforge.oracle_stats import (
    Histogram,
    chi_square_uniformity,
    classify_outpoints,
    enumerate_all_dags,
    filter_connected,
    filter_max_children,
    layered_max_in_dags,
    peel_layers,
    pool_sparse,
    satisfies_max_in,
    two_sample_test,
    uniform_expectation,
    weighted_expectation,
)


@pytest.mark.parametrize("n,total", [(1, 1), (2, 3), (3, 25), (4, 543), (5, 29281)])
def test_enumeration_sizes(n, total):
    assert len(enumerate_all_dags(n)) == total == build_count_table(5).total[n]


def test_enumeration_rejects_large():
    with pytest.raises(ValueError):
        enumerate_all_dags(6)


def test_enumeration_matches_networkx(nx_oracle):
    for n, dags in nx_oracle.items():
        assert {d.key() for d in enumerate_all_dags(n)} == {d.key() for d in dags}


def test_classify_examples():
    assert classify_outpoints(Dag.empty(4)) == 4
    assert classify_outpoints(Dag.from_edges(3, [(0, 1), (1, 2)])) == 1


@pytest.mark.parametrize("n", [3, 4, 5])
def test_outpoint_histogram_equals_rows(n):
    t = build_count_table(5)
    hist = Counter(classify_outpoints(d) for d in enumerate_all_dags(n))
    assert hist == {k: t.a[n][k] for k in range(1, n + 1)}


def test_outpoint_histogram_n3():
    assert Counter(map(classify_outpoints, enumerate_all_dags(3))) == {1: 15, 2: 9, 3: 1}


def test_peel_layers_chain():
    d = Dag.from_edges(3, [(2, 1), (1, 0)])
    assert peel_layers(d) == [[2], [1], [0]]


def test_satisfies_max_in():
    fan = Dag.from_edges(3, [(0, 2), (1, 2)])
    assert satisfies_max_in(fan, 2)
    assert not satisfies_max_in(fan, 1)


def test_layered_oracle_matches_tables():
    for n in range(1, 5):
        for K in (1, 2):
            for K_n in (None, 0, 1):
                t = build_restricted_table(4, K, K_n)
                assert len(layered_max_in_dags(n, K, K_n)) == t.total[n]


def test_layered_oracle_equals_peeling_filter():
    for n in (3, 4):
        layered = {d.key() for d in layered_max_in_dags(n, 1)}
        peeled = {d.key() for d in enumerate_all_dags(n) if satisfies_max_in(d, 1)}
        assert layered == peeled


def test_filters():
    dags = enumerate_all_dags(4)
    assert len(filter_connected(dags)) == 446
    assert len(filter_max_children(dags, 3)) == 543
    assert len(filter_max_children(dags, 1)) == 125


def test_expectations_normalised():
    dags = enumerate_all_dags(3)
    assert sum(uniform_expectation(dags).values()) == 1
    w = weighted_expectation(dags, Fraction(1, 4))
    assert sum(w.values()) == 1
    assert w[Dag.empty(3).key()] == Fraction(27, 64) / sum(
        Fraction(1, 4) ** d.num_edges * Fraction(3, 4) ** (3 - d.num_edges) for d in dags
    )


def test_chi_square_exact_fit():
    dags = enumerate_all_dags(3)
    hist = Histogram.of_dags(3, dags * 8)
    stat, p = chi_square_uniformity(hist, uniform_expectation(dags))
    assert stat == 0 and p == 1


def test_chi_square_unexpected_key():
    hist = Histogram.of_values(2, ["x"] * 10)
    assert chi_square_uniformity(hist, {"y": 1.0})[1] == 0.0


def test_chi_square_warns_on_small_cells():
    dags = enumerate_all_dags(3)
    with pytest.warns(UserWarning):
        chi_square_uniformity(Histogram.of_dags(3, dags), uniform_expectation(dags))


def test_two_sample_identical():
    h = Histogram.of_values(3, [1] * 50 + [2] * 30)
    assert two_sample_test(h, h)[1] == pytest.approx(1.0)


def test_two_sample_detects_shift():
    a = Histogram.of_values(3, [1] * 500 + [2] * 500)
    b = Histogram.of_values(3, [1] * 700 + [2] * 300)
    assert two_sample_test(a, b)[1] < 1e-6


def test_two_sample_rejects_mismatched_n():
    with pytest.raises(ValueError):
        two_sample_test(Histogram.of_values(3, [1]), Histogram.of_values(4, [1]))


def test_histogram_invariant():
    h = Histogram.of_values(3, [1, 1, 2])
    assert sum(h.counts.values()) == h.trials == 3


def test_pool_sparse_keeps_trials_and_silences_warning():
    a = Histogram.of_values(5, [0] * 400 + [1] * 300 + [2] * 3 + [3] * 2)
    b = Histogram.of_values(5, [0] * 390 + [1] * 310 + [2] * 4 + [4] * 1)
    pa, pb = pool_sparse(a, b)
    assert sum(pa.counts.values()) == a.trials
    assert sum(pb.counts.values()) == b.trials
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        two_sample_test(pa, pb)

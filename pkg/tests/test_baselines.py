from collections import Counter
from fractions import Fraction

import pytest
from scipy.stats import binomtest

from dagforge.baselines import (
    MarkovChain,
    McmcConfig,
    is_acyclic,
    is_weakly_connected,
    mcmc_step,
    sample_mcmc,
    sample_triangular,
)
from dagforge.dag import Dag
from dagforge.oracle_stats import (
    Histogram,
    chi_square_uniformity,
    enumerate_all_dags,
    uniform_expectation,
)
from dagforge.rng import RandomSource
from dagforge.sample_exact import sample_uniform_dag


def test_acyclic_basics():
    assert is_acyclic(Dag.empty(5))
    assert not is_acyclic(Dag.from_edges(2, [(0, 1), (1, 0)]))
    assert not is_acyclic(Dag.from_edges(3, [(0, 1), (1, 2), (2, 0)]))
    assert not is_acyclic(Dag(1, (1,)))


def test_acyclic_large_path():
    n = 100
    chain = Dag.from_edges(n, [(i, i + 1) for i in range(n - 1)])
    assert is_acyclic(chain)
    assert not is_acyclic(Dag.from_edges(n, list(chain.edges()) + [(n - 1, 0)]))


def test_uniform_output_acyclic(table20):
    rng = RandomSource(0)
    assert all(is_acyclic(sample_uniform_dag(8, table20, rng)) for _ in range(10000))


def test_acyclic_matches_networkx(nx_oracle):
    # every acyclic state found by networkx is acyclic here, and counts agree
    for n, dags in nx_oracle.items():
        assert all(is_acyclic(d) for d in dags)
        assert len(enumerate_all_dags(n)) == len(dags)


def test_connected_basics():
    assert is_weakly_connected(Dag.empty(1))
    assert not is_weakly_connected(Dag.empty(2))
    assert is_weakly_connected(Dag.from_edges(3, [(2, 0), (2, 1)]))
    n = 80
    star = Dag.from_edges(n, [(0, v) for v in range(1, n)])
    assert is_weakly_connected(star)
    assert not is_weakly_connected(Dag.from_edges(n, [(0, v) for v in range(1, n - 1)]))


def test_connected_count_n4():
    dags = enumerate_all_dags(4)
    assert sum(map(is_weakly_connected, dags)) == 446
    assert len(dags) == 543


def test_triangular_p0_empty():
    rng = RandomSource(1)
    assert all(sample_triangular(6, 0, rng).num_edges == 0 for _ in range(100))


def test_triangular_empty_frequency_n3():
    rng = RandomSource(2)
    trials = 40000
    empty = sum(sample_triangular(3, Fraction(1, 2), rng).num_edges == 0 for _ in range(trials))
    assert binomtest(empty, trials, 1 / 8).pvalue > 1e-3
    assert empty / trials > 2 / 25


def test_triangular_not_uniform_n3():
    rng = RandomSource(3)
    dags = [sample_triangular(3, Fraction(1, 2), rng) for _ in range(100000)]
    _, p = chi_square_uniformity(Histogram.of_dags(3, dags), uniform_expectation(enumerate_all_dags(3)))
    assert p < 1e-6


def test_mcmc_config_validation():
    with pytest.raises(ValueError):
        McmcConfig(burn_in_steps=-1)
    with pytest.raises(ValueError):
        McmcConfig(thinning_steps=0)


def test_mcmc_self_pair_stays():
    chain = MarkovChain(3, McmcConfig(), RandomSource(0))
    assert not chain.apply_pair(1, 1)
    assert chain.state == Dag.empty(3)


def test_mcmc_adds_arc_and_involution():
    chain = MarkovChain(2, McmcConfig(), RandomSource(0))
    assert chain.apply_pair(0, 1)
    assert chain.state == Dag.from_edges(2, [(0, 1)])
    # the reverse arc would close a cycle
    assert not chain.apply_pair(1, 0)
    assert chain.apply_pair(0, 1)
    assert chain.state == Dag.empty(2)


def test_mcmc_step_preserves_acyclicity():
    rng = RandomSource(4)
    d = Dag.empty(6)
    cfg = McmcConfig()
    for _ in range(3000):
        d = mcmc_step(d, cfg, rng)
        assert is_acyclic(d)


def test_mcmc_stay_probability_at_least_one_over_n():
    rng = RandomSource(5)
    n = 4
    chain = MarkovChain(n, McmcConfig(), rng)
    stays = 0
    steps = 20000
    for _ in range(steps):
        stays += not chain.apply_pair(*chain.propose_pair())
    assert stays / steps >= 1 / n - 0.01


def test_mcmc_kernel_symmetric_n2():
    states = enumerate_all_dags(2)
    moves = Counter()
    for start in states:
        for i in range(2):
            for j in range(2):
                chain = MarkovChain(2, McmcConfig(), RandomSource(0), start=start)
                chain.apply_pair(i, j)
                moves[start.key(), chain.state.key()] += 1
    for (x, y), c in moves.items():
        assert moves[y, x] == c


def test_mcmc_pruned_pairs():
    chain = MarkovChain(3, McmcConfig(prune_self_pairs=True), RandomSource(6))
    seen = Counter(chain.propose_pair() for _ in range(7000))
    diag = [p for p in seen if p[0] == p[1]]
    assert diag == [(0, 0)]
    assert len(seen) == 7


def test_sample_mcmc_zero_burn_in():
    assert sample_mcmc(4, McmcConfig(), RandomSource(0)) == Dag.empty(4)


def test_mcmc_chain_uniform_n3():
    chain = MarkovChain(3, McmcConfig(burn_in_steps=10_000, thinning_steps=100), RandomSource(7))
    hist = Histogram.of_dags(3, chain.samples(25000))
    assert chi_square_uniformity(hist, uniform_expectation(enumerate_all_dags(3)))[1] > 1e-3


def test_mcmc_short_burn_in_fails_n3():
    rng = RandomSource(8)
    cfg = McmcConfig(burn_in_steps=10)
    hist = Histogram.of_dags(3, (sample_mcmc(3, cfg, rng) for _ in range(25000)))
    assert chi_square_uniformity(hist, uniform_expectation(enumerate_all_dags(3)))[1] < 1e-3


def _tv_to_uniform(dags, oracle):
    counts = Counter(d.key() for d in dags)
    u = 1 / len(oracle)
    return 0.5 * sum(abs(counts.get(d.key(), 0) / len(dags) - u) for d in oracle)


def test_pruning_speeds_mixing_n3():
    oracle = enumerate_all_dags(3)
    steps, reps = 6, 40000
    tv = {}
    for prune in (False, True):
        rng = RandomSource(9)
        cfg = McmcConfig(burn_in_steps=steps, prune_self_pairs=prune)
        tv[prune] = _tv_to_uniform([sample_mcmc(3, cfg, rng) for _ in range(reps)], oracle)
    assert tv[True] < tv[False]

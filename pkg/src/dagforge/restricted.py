"""Uniform samplers for restricted and weighted families of DAGs.

* connected: rejection from the uniform sampler (acceptance is ~82% at n=4
  and above 99% from n=9 on);
* in-arc limits: each old vertex takes at most ``K`` arcs from every newly
  added outpoint layer, optionally with each new outpoint sending at most
  ``K_n`` arcs to old non-outpoints;
* children limits: every vertex has out-degree at most ``K``;
* weighted: probability proportional to ``p**l * (1-p)**(L-l)`` for a DAG
  with ``l`` arcs.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, lcm
from typing import Sequence

from dagforge.baselines import is_weakly_connected
from dagforge.counting import CountTable, WeightedTable, _bounded_subsets, c_link_count
from dagforge.dag import Dag
from dagforge.rng import RandomSource
from dagforge.sample_exact import (
    OutpointSequence,
    _set_column,
    _walk,
    assemble_layers,
    permute_labels,
    sample_outpoint_sequence,
    sample_uniform_dag,
)

KINDS = ("connected", "max_in", "max_in_out", "max_children", "weighted")

# children-limited layers switch to the mark-then-fill strategy below this
# estimated acceptance of the count-vector strategy
DEFAULT_STRATEGY_THRESHOLD = 0.1


@dataclass(frozen=True)
class RestrictionSpec:
    kind: str
    K: int | None = None
    K_n: int | None = None
    p: Fraction | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown restriction {self.kind!r}")
        if self.kind in ("max_in", "max_in_out", "max_children") and (self.K is None or self.K < 1):
            raise ValueError(f"{self.kind} needs K >= 1, got {self.K}")
        if self.kind == "max_in_out" and (self.K_n is None or self.K_n < 0):
            raise ValueError(f"max_in_out needs K_n >= 0, got {self.K_n}")
        if self.kind == "weighted" and (self.p is None or not 0 <= self.p <= 1):
            raise ValueError(f"weighted needs 0 <= p <= 1, got {self.p}")


# connected ---------------------------------------------------------------

def sample_connected_with_attempts(n: int, table: CountTable, rng: RandomSource) -> tuple[Dag, int]:
    """Uniform weakly connected DAG plus the number of uniform draws it took."""
    attempts = 0
    while True:
        attempts += 1
        dag = sample_uniform_dag(n, table, rng)
        if is_weakly_connected(dag):
            return dag, attempts


def sample_connected_dag(n: int, table: CountTable, rng: RandomSource) -> Dag:
    return sample_connected_with_attempts(n, table, rng)[0]


# in-arc limits -----------------------------------------------------------

def _bounded_subset(rng: RandomSource, size: int, lo: int, hi: int) -> list[int]:
    """Uniform subset of ``range(size)`` among those with ``lo <= |subset| <= hi``."""
    hi = min(hi, size)
    sizes = range(lo, hi + 1)
    i = sizes[rng.weighted_index([comb(size, j) for j in sizes])]
    return rng.choose(size, i)


def _mask(indices, offset: int = 0) -> int:
    out = 0
    for i in indices:
        out |= 1 << (i + offset)
    return out


def _pattern(rng: RandomSource, k: int, lo: int, K: int) -> int:
    return _mask(_bounded_subset(rng, k, lo, K))


def _max_in_fill(K: int, K_n: int | None):
    def fill(rng: RandomSource, base: int, k: int, s: int) -> list[int]:
        free = base - s
        if K_n is None:
            if K >= k:
                rows = [rng.bits(free) for _ in range(k)]
            else:
                rows = [0] * k
                for col in range(free):
                    _set_column(rows, _pattern(rng, k, 0, K), 1 << col)
        else:
            rows = [_mask(_bounded_subset(rng, free, 0, K_n)) for _ in range(k)]
        for col in range(free, base):
            _set_column(rows, _pattern(rng, k, 1, K), 1 << col)
        return rows

    return fill


def sample_max_in_dag(n: int, table: CountTable, rng: RandomSource) -> Dag:
    """Uniform DAG in which no old vertex receives more than ``K`` arcs from
    any single added outpoint layer (``table`` from ``build_restricted_table``)."""
    if table.variant not in ("max_in", "max_in_out"):
        raise ValueError(f"need a max_in or max_in_out table, got {table.variant}")
    seq = sample_outpoint_sequence(n, table, rng)
    dag = assemble_layers(seq, rng, _max_in_fill(table.K, table.K_n))
    return permute_labels(dag, rng)


# children limits ---------------------------------------------------------

def _fill_by_counts(rng: RandomSource, base: int, k: int, s: int, K: int) -> list[int]:
    """Row arc counts first (total >= s), then placement; reject uncovered outpoints."""
    sizes = range(min(base, K) + 1)
    size_weights = [comb(base, c) for c in sizes]
    need = ((1 << s) - 1) << (base - s)
    while True:
        counts = [sizes[rng.weighted_index(size_weights)] for _ in range(k)]
        if sum(counts) < s:
            continue
        rows = [_mask(rng.choose(base, c)) for c in counts]
        hit = 0
        for r in rows:
            hit |= r
        if hit & need == need:
            return rows


def _fill_by_marking(rng: RandomSource, base: int, k: int, s: int, K: int) -> list[int]:
    """Give every old outpoint one marked arc, fill the rest, accept with 1/F.

    A (configuration, marking) pair is proposed uniformly: the marking is
    drawn with probability proportional to the number of completions it
    admits, then each row is completed uniformly. A configuration where old
    outpoint ``i`` receives ``l_i`` arcs has ``F = prod(l_i)`` markings, so
    accepting with ``1/F`` leaves the configurations uniform.
    """
    free_cols = base - s

    def completions(c: int) -> int:
        return _bounded_subsets(base - c, K - c)

    top = completions(0) ** k
    while True:
        owner = [rng.below(k) for _ in range(s)]
        used = [0] * k
        for r in owner:
            used[r] += 1
        if max(used) > K:
            continue
        weight = 1
        for c in used:
            weight *= completions(c)
        if rng.below(top) >= weight:
            continue
        marked = [0] * k
        for i, r in enumerate(owner):
            marked[r] |= 1 << (free_cols + i)
        rows = []
        for r in range(k):
            others = [c for c in range(base) if not marked[r] >> c & 1]
            extra = _bounded_subset(rng, len(others), 0, K - used[r])
            rows.append(marked[r] | _mask(others[i] for i in extra))
        F = 1
        for i in range(s):
            bit = 1 << (free_cols + i)
            F *= sum(1 for row in rows if row & bit)
        if rng.below(F) == 0:
            return rows


def _children_fill(table: CountTable, strategy: str, threshold: float):
    K = table.K

    def fill(rng: RandomSource, base: int, k: int, s: int) -> list[int]:
        chosen = strategy
        if chosen == "auto":
            valid = c_link_count(k, base, s, K, table.c_cache)
            chosen = "marking" if valid < threshold * _bounded_subsets(base, K) ** k else "counts"
        if chosen == "counts":
            return _fill_by_counts(rng, base, k, s, K)
        if chosen == "marking":
            return _fill_by_marking(rng, base, k, s, K)
        raise ValueError(f"unknown strategy {strategy!r}")

    return fill


def sample_children_limited_dag(
    n: int,
    table: CountTable,
    rng: RandomSource,
    *,
    strategy: str = "auto",
    threshold: float = DEFAULT_STRATEGY_THRESHOLD,
) -> Dag:
    """Uniform DAG with every out-degree at most ``table.K``.

    ``strategy`` is ``"counts"``, ``"marking"`` or ``"auto"``. Both
    strategies give the same law; ``auto`` picks per layer by estimated
    acceptance. Reverse the result for a parents-limited DAG.
    """
    if table.variant != "max_children":
        raise ValueError(f"need a max_children table, got {table.variant}")
    seq = sample_outpoint_sequence(n, table, rng)
    dag = assemble_layers(seq, rng, _children_fill(table, strategy, threshold))
    return permute_labels(dag, rng)


# weighted ----------------------------------------------------------------

def _draw_rational(weights: Sequence[Fraction], rng: RandomSource) -> int:
    """1-based index drawn exactly in proportion to nonnegative rationals."""
    den = lcm(*(w.denominator for w in weights))
    ints = [w.numerator * (den // w.denominator) for w in weights]
    return _walk(ints, rng.below(sum(ints)) + 1)


def _weighted_fill(p: Fraction):
    q = 1 - p

    def fill(rng: RandomSource, base: int, k: int, s: int) -> list[int]:
        free = base - s
        rows = [0] * k
        for r in range(k):
            row = 0
            for col in range(free):
                if rng.bernoulli(p):
                    row |= 1 << col
            rows[r] = row
        # nonzero Bernoulli(p) pattern: position of the first arc, then free bits
        first = [q**i * p for i in range(k)]
        for col in range(free, base):
            r0 = _draw_rational(first, rng) - 1
            bit = 1 << col
            rows[r0] |= bit
            for r in range(r0 + 1, k):
                if rng.bernoulli(p):
                    rows[r] |= bit
        return rows

    return fill


def sample_weighted_sequence(n: int, wtable: WeightedTable, rng: RandomSource) -> OutpointSequence:
    if not 1 <= n <= wtable.n_max:
        raise ValueError(f"n={n} outside 1..{wtable.n_max}")
    k = _draw_rational(wtable.a_hat[n][1:], rng)
    layers = [k]
    m = n - k
    while m > 0:
        s = _draw_rational(wtable.step_weights(k, m), rng)
        layers.append(s)
        k = s
        m -= s
    return OutpointSequence(tuple(layers))


def sample_weighted_dag(n: int, wtable: WeightedTable, rng: RandomSource) -> Dag:
    """DAG drawn with probability proportional to ``p**l * (1-p)**(L-l)``."""
    p = wtable.p
    if p == 0:
        return Dag.empty(n)
    seq = sample_weighted_sequence(n, wtable, rng)
    return permute_labels(assemble_layers(seq, rng, _weighted_fill(p)), rng)

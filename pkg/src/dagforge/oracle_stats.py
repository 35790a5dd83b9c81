"""Brute-force ground truth for small ``n`` and the chi-square machinery.

Everything here is deliberately naive: the enumerators walk every candidate
adjacency matrix (or every layered construction) and share no code with the
count recursions they are used to check.
"""

from __future__ import annotations

import warnings
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, product
from typing import Hashable, Iterable

from scipy.stats import chi2

from dagforge.baselines import is_acyclic, is_weakly_connected
from dagforge.dag import Dag

MAX_ENUMERATION_N = 5

DagKey = int


@dataclass
class Histogram:
    """Counts of observed keys; keys are :meth:`Dag.key` values or any marginal."""

    n: int
    counts: Counter = field(default_factory=Counter)
    trials: int = 0

    def add(self, key: Hashable) -> None:
        self.counts[key] += 1
        self.trials += 1

    @classmethod
    def of_dags(cls, n: int, dags: Iterable[Dag]) -> "Histogram":
        counts = Counter(d.key() for d in dags)
        return cls(n, counts, sum(counts.values()))

    @classmethod
    def of_values(cls, n: int, values: Iterable[Hashable]) -> "Histogram":
        counts = Counter(values)
        return cls(n, counts, sum(counts.values()))


@lru_cache(maxsize=None)
def _enumerate(n: int) -> tuple[Dag, ...]:
    # Every off-diagonal matrix with both (u, v) and (v, u) set has a 2-cycle,
    # so only the 3 states {none, u->v, v->u} per unordered pair are filtered.
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    out = []
    for states in product(range(3), repeat=len(pairs)):
        rows = [0] * n
        for (u, v), st in zip(pairs, states):
            if st == 1:
                rows[u] |= 1 << v
            elif st == 2:
                rows[v] |= 1 << u
        dag = Dag(n, tuple(rows))
        if is_acyclic(dag):
            out.append(dag)
    return tuple(out)


def enumerate_all_dags(n: int) -> list[Dag]:
    """Every labelled DAG on ``n <= 5`` vertices, by filtering all digraphs."""
    if not 0 <= n <= MAX_ENUMERATION_N:
        raise ValueError(f"exhaustive enumeration supports 0 <= n <= {MAX_ENUMERATION_N}, got {n}")
    return list(_enumerate(n))


def classify_outpoints(dag: Dag) -> int:
    """Number of vertices with no incoming arcs."""
    return len(dag.outpoints())


def peel_layers(dag: Dag) -> list[list[int]]:
    """Outpoint layers: the outpoints, then the outpoints once those are removed, ..."""
    alive = set(range(dag.n))
    layers = []
    while alive:
        hit = 0
        for u in alive:
            hit |= dag.rows[u]
        layer = sorted(v for v in alive if not hit >> v & 1)
        if not layer:
            raise ValueError("graph has a cycle")
        layers.append(layer)
        alive.difference_update(layer)
    return layers


def satisfies_max_in(dag: Dag, K: int, K_n: int | None = None) -> bool:
    """Check the in-arc limits layer by layer on the canonical outpoint peeling.

    Every old vertex may take at most ``K`` arcs from each newer layer; with
    ``K_n`` the limit on old non-outpoints is replaced by at most ``K_n`` arcs
    sent by each new vertex.
    """
    layers = peel_layers(dag)
    for t in range(len(layers) - 1):
        new = layers[t]
        prev_out = set(layers[t + 1])
        older = [v for layer in layers[t + 1:] for v in layer]
        for v in older:
            if (K_n is None or v in prev_out) and sum(dag.has_edge(u, v) for u in new) > K:
                return False
        if K_n is not None:
            for u in new:
                if sum(dag.has_edge(u, v) for v in older if v not in prev_out) > K_n:
                    return False
    return True


def layered_max_in_dags(n: int, K: int, K_n: int | None = None) -> list[Dag]:
    """Build every DAG reachable by adding outpoint layers under the in-arc limits.

    Independent of the peeling filter above: this walks the construction
    (label choice, then every admissible arc pattern per old vertex).
    """

    def build(labels: tuple[int, ...]) -> list[tuple[dict[int, int], tuple[int, ...]]]:
        # returns (rows restricted to labels, outpoint labels)
        results = []
        for k in range(1, len(labels) + 1):
            for new in combinations(labels, k):
                old = tuple(v for v in labels if v not in new)
                if not old:
                    results.append(({v: 0 for v in labels}, new))
                    continue
                for rows_old, outs in build(old):
                    for wiring in product(range(1 << len(old)), repeat=k):
                        ok = True
                        for v_idx, v in enumerate(old):
                            hits = sum(w >> v_idx & 1 for w in wiring)
                            if v in outs:
                                if hits == 0 or hits > K:
                                    ok = False
                                    break
                            elif K_n is None and hits > K:
                                ok = False
                                break
                        if not ok:
                            continue
                        if K_n is not None:
                            nonout = [i for i, v in enumerate(old) if v not in outs]
                            if any(sum(w >> i & 1 for i in nonout) > K_n for w in wiring):
                                continue
                        rows = dict(rows_old)
                        for u, w in zip(new, wiring):
                            rows[u] = sum(1 << old[i] for i in range(len(old)) if w >> i & 1)
                        results.append((rows, new))
        return results

    found = {}
    for rows, _ in build(tuple(range(n))):
        dag = Dag(n, tuple(rows[u] for u in range(n)))
        found[dag.key()] = dag
    return list(found.values())


def filter_max_children(dags: Iterable[Dag], K: int) -> list[Dag]:
    return [d for d in dags if max(d.out_degrees(), default=0) <= K]


def filter_connected(dags: Iterable[Dag]) -> list[Dag]:
    return [d for d in dags if is_weakly_connected(d)]


def uniform_expectation(dags: Iterable[Dag]) -> dict[DagKey, Fraction]:
    keys = [d.key() for d in dags]
    return {k: Fraction(1, len(keys)) for k in keys}


def weighted_expectation(dags: Iterable[Dag], p: Fraction) -> dict[DagKey, Fraction]:
    """Target law ``p**l (1-p)**(L-l)`` normalised over ``dags``."""
    dags = list(dags)
    p = Fraction(p)
    raw = {}
    for d in dags:
        L = d.n * (d.n - 1) // 2
        raw[d.key()] = p**d.num_edges * (1 - p) ** (L - d.num_edges)
    total = sum(raw.values())
    return {k: w / total for k, w in raw.items()}


def chi_square_uniformity(hist: Histogram, expected: dict[Hashable, float | Fraction]) -> tuple[float, float]:
    """Pearson goodness of fit of ``hist`` against cell probabilities ``expected``.

    Observed keys missing from ``expected`` have probability zero and force
    ``p = 0``. Warns when some expected cell count is below 5.
    """
    trials = hist.trials
    if trials == 0:
        raise ValueError("empty histogram")
    if any(k not in expected and c > 0 for k, c in hist.counts.items()):
        return float("inf"), 0.0
    cells = [(hist.counts.get(k, 0), float(pr) * trials) for k, pr in expected.items() if pr > 0]
    if min(e for _, e in cells) < 5:
        warnings.warn("expected cell count below 5; chi-square approximation is poor", stacklevel=2)
    stat = sum((o - e) ** 2 / e for o, e in cells)
    df = len(cells) - 1
    if df < 1:
        return stat, 1.0
    return stat, float(chi2.sf(stat, df))


def two_sample_test(hist_a: Histogram, hist_b: Histogram) -> tuple[float, float]:
    """Chi-square homogeneity test of two histograms over the union of keys."""
    if hist_a.n != hist_b.n:
        raise ValueError(f"histograms for different n: {hist_a.n} vs {hist_b.n}")
    na, nb = hist_a.trials, hist_b.trials
    if na == 0 or nb == 0:
        raise ValueError("empty histogram")
    keys = set(hist_a.counts) | set(hist_b.counts)
    total = na + nb
    stat = 0.0
    small = False
    for k in keys:
        oa, ob = hist_a.counts.get(k, 0), hist_b.counts.get(k, 0)
        col = oa + ob
        ea, eb = col * na / total, col * nb / total
        small |= min(ea, eb) < 5
        stat += (oa - ea) ** 2 / ea + (ob - eb) ** 2 / eb
    if small:
        warnings.warn("expected cell count below 5; chi-square approximation is poor", stacklevel=2)
    df = len(keys) - 1
    if df < 1:
        return stat, 1.0
    return stat, float(chi2.sf(stat, df))


def pool_sparse(hist_a: Histogram, hist_b: Histogram, minimum: int = 20) -> tuple[Histogram, Histogram]:
    """Merge keys whose pooled count is below ``minimum`` into one tail cell.

    Marginals such as edge counts have thin tails; pooling keeps the
    chi-square approximation valid without dropping any trials.
    """
    ra, rb = Counter(), Counter()
    for k in set(hist_a.counts) | set(hist_b.counts):
        a, b = hist_a.counts.get(k, 0), hist_b.counts.get(k, 0)
        target = k if a + b >= minimum else "pooled"
        ra[target] += a
        rb[target] += b
    if 0 < ra["pooled"] + rb["pooled"] < minimum and len(ra) > 2:
        # a thin pooled cell is itself sparse; fold it into the smallest real cell
        smallest = min((k for k in ra if k != "pooled"), key=lambda k: ra[k] + rb[k])
        ra[smallest] += ra.pop("pooled")
        rb[smallest] += rb.pop("pooled")
    return Histogram(hist_a.n, ra, hist_a.trials), Histogram(hist_b.n, rb, hist_b.trials)

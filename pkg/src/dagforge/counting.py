"""Exact count tables for labelled DAGs, split by number of outpoints.

An outpoint is a vertex with no incoming arcs. ``a[n][k]`` counts labelled
DAGs on ``n`` vertices with exactly ``k`` outpoints; removing those outpoints
leaves an ``m = n - k`` vertex DAG with ``s`` outpoints, and every table here
is built by summing over ``s``::

    a[n][k] = binom(n, k) * b[n][k]
    b[n][k] = sum_s  w(k, m, s) * a[m][s]

The per-step factor ``w(k, m, s)`` counts the ways of wiring the ``k`` new
outpoints into the old graph, and is the only thing that changes between the
unrestricted, in-arc-limited and children-limited variants. Python ints are
used throughout so nothing overflows.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

DEFAULT_N_LIMIT = 200

# prefix sums of step weights are memoized only for k + m <= this bound,
# which caps the memo at ~2000 entries of small integers
PREFIX_CACHE_SPAN = 64

# a_n ~ n! 2^L / (M q^n), constants known to three digits
ASYMPTOTIC_M = Fraction(574, 1000)
ASYMPTOTIC_Q = Fraction(148, 100)

VARIANTS = ("unrestricted", "max_in", "max_in_out", "max_children")


@dataclass(frozen=True, eq=False)
class CountTable:
    """Triangular arrays ``a``, ``b`` and totals for ``1 <= k <= n <= n_max``.

    Index as ``table.a[n][k]``; row ``0`` and column ``0`` are unused padding.
    A finished table is never mutated (``c_cache`` only memoizes a pure
    function), so it can be shared between threads.
    """

    n_max: int
    variant: str
    a: list[list[int]]
    b: list[list[int]]
    total: list[int]
    K: int | None = None
    K_n: int | None = None
    c_cache: dict[tuple[int, int, int], int] = field(default_factory=dict, repr=False)
    _prefix: dict[tuple[int, int], tuple[int, ...]] = field(default_factory=dict, repr=False)

    def step_weight(self, k: int, m: int, s: int) -> int:
        """Ways to attach ``k`` new outpoints to an ``m``-node DAG with ``s`` outpoints."""
        if self.variant == "unrestricted":
            return (2**k - 1) ** s << (k * (m - s))
        if self.variant == "max_in":
            hit, free = _in_limited_sums(k, self.K)
            return hit**s * free ** (m - s)
        if self.variant == "max_in_out":
            hit, _ = _in_limited_sums(k, self.K)
            return hit**s * _bounded_subsets(m - s, self.K_n) ** k
        if self.variant == "max_children":
            return c_link_count(k, m, s, self.K, self.c_cache)
        raise ValueError(f"unknown variant {self.variant!r}")

    def step_weights(self, k: int, m: int) -> list[int]:
        """``[w(k, m, s) * a[m][s] for s = 1..m]``; these sum to ``b[m+k][k]``."""
        if self.variant == "unrestricted":
            base = 2**k - 1
            pw = base << (k * (m - 1))
            out = []
            am = self.a[m]
            for s in range(1, m + 1):
                out.append(pw * am[s])
                pw = (pw * base) >> k
            return out
        am = self.a[m]
        return [self.step_weight(k, m, s) * am[s] for s in range(1, m + 1)]

    def step_prefix(self, k: int, m: int) -> tuple[int, ...]:
        """Running sums of :meth:`step_weights`; the last entry is the bound."""
        key = (k, m)
        hit = self._prefix.get(key)
        if hit is not None:
            return hit
        acc = 0
        out = []
        for w in self.step_weights(k, m):
            acc += w
            out.append(acc)
        out = tuple(out)
        if k + m <= PREFIX_CACHE_SPAN:
            self._prefix[key] = out
        return out

    def first_prefix(self, n: int) -> tuple[int, ...]:
        """Running sums of ``a[n][1..n]``."""
        key = (0, n)
        hit = self._prefix.get(key)
        if hit is None:
            acc = 0
            hit = []
            for x in self.a[n][1:]:
                acc += x
                hit.append(acc)
            hit = tuple(hit)
            if n <= PREFIX_CACHE_SPAN:
                self._prefix[key] = hit
        return hit

    def describe(self) -> str:
        parts = [f"variant={self.variant}", f"n_max={self.n_max}"]
        if self.K is not None:
            parts.append(f"K={self.K}")
        if self.K_n is not None:
            parts.append(f"K_n={self.K_n}")
        return " ".join(parts)


@dataclass(frozen=True, eq=False)
class WeightedTable:
    """Exact-rational analogue of :class:`CountTable` where a DAG with ``l`` arcs
    carries weight ``p**l * (1-p)**(L-l)``."""

    n_max: int
    p: Fraction
    a_hat: list[list[Fraction]]
    total_hat: list[Fraction]

    def step_weights(self, k: int, m: int) -> list[Fraction]:
        """Relative weights of the next layer size ``s = 1..m`` after a layer of ``k``."""
        hit = 1 - (1 - self.p) ** k
        am = self.a_hat[m]
        return [hit**s * am[s] for s in range(1, m + 1)]


def _check_n_max(n_max: int, limit: int | None) -> None:
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    if limit is not None and n_max > limit:
        raise ValueError(
            f"n_max={n_max} exceeds the table limit {limit}; "
            "raise the limit explicitly or use the hybrid sampler"
        )


def _fill(n_max: int, weights, b_sum=None) -> tuple[list[list[int]], list[list[int]], list[int]]:
    """Run the outpoint recursion given ``weights(k, m, a) -> [w*a[m][s] for s]``.

    ``b_sum(k, m, a)``, when given, returns the sum directly and replaces
    ``sum(weights(...))``.
    """
    if b_sum is None:
        def b_sum(k, m, a):
            return sum(weights(k, m, a))
    a: list[list[int]] = [[0]]
    b: list[list[int]] = [[0]]
    total = [1]
    for n in range(1, n_max + 1):
        arow = [0] * (n + 1)
        brow = [0] * (n + 1)
        for k in range(1, n):
            bk = b_sum(k, n - k, a)
            brow[k] = bk
            arow[k] = comb(n, k) * bk
        arow[n] = brow[n] = 1
        a.append(arow)
        b.append(brow)
        total.append(sum(arow))
    return a, b, total


def _unrestricted_weights(k: int, m: int, a: list[list[int]]) -> list[int]:
    # (2^k-1)^s 2^{k(m-s)} built incrementally across s
    base = 2**k - 1
    pw = base << (k * (m - 1))
    am = a[m]
    out = []
    for s in range(1, m + 1):
        out.append(pw * am[s])
        pw = (pw * base) >> k
    return out


def _unrestricted_b(k: int, m: int, a: list[list[int]]) -> int:
    # Horner in x = 2^k-1 with y = 2^k; x*acc and y^j*a are shifts and a
    # subtraction, so each step is linear in the operand size
    am = a[m]
    acc = am[m]
    for s in range(m - 1, 0, -1):
        acc = (acc << k) - acc + (am[s] << (k * (m - s)))
    return (acc << k) - acc


def build_count_table(n_max: int, *, limit: int | None = DEFAULT_N_LIMIT) -> CountTable:
    """Counts of labelled DAGs by outpoint number, for all ``n <= n_max``.

    >>> t = build_count_table(3)
    >>> t.a[3][1:], t.total[3]
    ([15, 9, 1], 25)
    """
    _check_n_max(n_max, limit)
    a, b, total = _fill(n_max, _unrestricted_weights, _unrestricted_b)
    return CountTable(n_max, "unrestricted", a, b, total)


@lru_cache(maxsize=None)
def _in_limited_sums(k: int, K: int) -> tuple[int, int]:
    """(patterns hitting an old outpoint, patterns for an old non-outpoint)."""
    hit = sum(comb(k, i) for i in range(1, min(k, K) + 1))
    return hit, hit + 1


@lru_cache(maxsize=None)
def _bounded_subsets(size: int, bound: int) -> int:
    """Number of subsets of a ``size``-set with at most ``bound`` elements."""
    return sum(comb(size, i) for i in range(min(size, bound) + 1))


def build_restricted_table(
    n_max: int, K: int, K_n: int | None = None, *, limit: int | None = DEFAULT_N_LIMIT
) -> CountTable:
    """Counts where each old node takes at most ``K`` arcs from every new layer.

    With ``K_n`` given, old outpoints keep the ``K`` limit while each new
    outpoint sends at most ``K_n`` arcs into the old non-outpoints.
    """
    _check_n_max(n_max, limit)
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    if K_n is not None and K_n < 0:
        raise ValueError(f"K_n must be >= 0, got {K_n}")

    if K_n is None:
        def weights(k, m, a):
            hit, free = _in_limited_sums(k, K)
            return [hit**s * free ** (m - s) * a[m][s] for s in range(1, m + 1)]
        variant = "max_in"
    else:
        def weights(k, m, a):
            hit, _ = _in_limited_sums(k, K)
            return [
                hit**s * _bounded_subsets(m - s, K_n) ** k * a[m][s]
                for s in range(1, m + 1)
            ]
        variant = "max_in_out"

    a, b, total = _fill(n_max, weights)
    return CountTable(n_max, variant, a, b, total, K=K, K_n=K_n)


def c_link_count(
    k: int, m: int, s: int, K: int, cache: dict[tuple[int, int, int], int] | None = None
) -> int:
    """Ways to link ``k`` new outpoints to ``m`` old nodes, each new node sending
    at most ``K`` arcs, such that all ``s`` old outpoints receive at least one.

    Inclusion-exclusion over the old outpoints left unreached. ``cache`` is
    keyed ``(k, m, s)`` and must only ever be shared for a single ``K``.
    """
    if k < 1 or K < 1:
        raise ValueError(f"need k >= 1 and K >= 1, got k={k}, K={K}")
    if not 0 <= s <= m:
        raise ValueError(f"need 0 <= s <= m, got s={s}, m={m}")
    if cache is None:
        cache = {}
    return _c_link(k, m, s, K, cache)


def _c_link(k: int, m: int, s: int, K: int, cache: dict) -> int:
    key = (k, m, s)
    hit = cache.get(key)
    if hit is not None:
        return hit
    if s == 0:
        val = _bounded_subsets(m, K) ** k
    else:
        val = _bounded_subsets(m, K) ** k - sum(
            comb(s, i) * _c_link(k, m - i, s - i, K, cache) for i in range(1, s + 1)
        )
    cache[key] = val
    return val


def build_children_limited_table(
    n_max: int, K: int, *, limit: int | None = DEFAULT_N_LIMIT
) -> CountTable:
    """Counts of DAGs in which every vertex has at most ``K`` children."""
    _check_n_max(n_max, limit)
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    cache: dict[tuple[int, int, int], int] = {}

    def weights(k, m, a):
        return [_c_link(k, m, s, K, cache) * a[m][s] for s in range(1, m + 1)]

    a, b, total = _fill(n_max, weights)
    return CountTable(n_max, "max_children", a, b, total, K=K, c_cache=cache)


def build_weighted_table(
    n_max: int, p: Fraction | int | str, *, limit: int | None = DEFAULT_N_LIMIT
) -> WeightedTable:
    """Arc-probability-weighted counts for an exact rational ``p`` in [0, 1].

    Uses ``0**0 == 1``, so ``a_hat[1][1] == 1`` even at ``p == 1``.
    """
    _check_n_max(n_max, limit)
    p = Fraction(p)
    if not 0 <= p <= 1:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    q = 1 - p
    a_hat: list[list[Fraction]] = [[Fraction(0)]]
    total_hat = [Fraction(1)]
    for n in range(1, n_max + 1):
        row = [Fraction(0)] * (n + 1)
        for k in range(1, n):
            m = n - k
            hit = 1 - q**k
            am = a_hat[m]
            acc = sum((hit**s * am[s] for s in range(1, m + 1)), Fraction(0))
            row[k] = comb(n, k) * q ** comb(k, 2) * acc
        row[n] = q ** comb(n, 2)
        a_hat.append(row)
        total_hat.append(sum(row, Fraction(0)))
    return WeightedTable(n_max, p, a_hat, total_hat)


@lru_cache(maxsize=None)
def _ie_total(n: int) -> int:
    # independent of the outpoint split; a_0 = 1
    if n == 0:
        return 1
    return sum(
        (-1) ** (k + 1) * comb(n, k) * (1 << (k * (n - k))) * _ie_total(n - k)
        for k in range(1, n + 1)
    )


def total_inclusion_exclusion(n: int, table: CountTable) -> int:
    """Total number of labelled ``n``-vertex DAGs by inclusion-exclusion.

    Computed without touching the outpoint split, so agreement with
    ``table.total[n]`` is a genuine cross-check of the table.
    """
    if table.variant != "unrestricted":
        raise ValueError(f"inclusion-exclusion total needs an unrestricted table, got {table.variant}")
    if not 1 <= n <= table.n_max:
        raise ValueError(f"n={n} outside 1..{table.n_max}")
    for j in range(n):  # keep recursion depth bounded
        _ie_total(j)
    return _ie_total(n)


def asymptotic_ratio(n: int, table: CountTable) -> float:
    """``a_n * M * q**n / (n! * 2**L)``; tends to 1 for large ``n``."""
    if not 1 <= n <= table.n_max:
        raise ValueError(f"n={n} outside 1..{table.n_max}")
    L = n * (n - 1) // 2
    ratio = Fraction(table.total[n]) * ASYMPTOTIC_M * ASYMPTOTIC_Q**n
    ratio /= factorial(n) << L
    return float(ratio)

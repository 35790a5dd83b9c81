"""Exactly uniform sampling of labelled DAGs.

Sampling runs in three passes:

1. draw the sequence of outpoint-layer sizes ``k_1, ..., k_I`` from the count
   table, one bounded big-integer draw per layer;
2. lay the layers out as contiguous vertex blocks, innermost layer first, and
   wire each new block to the older vertices (every old outpoint must receive
   at least one arc, every other old vertex is free);
3. relabel the vertices with a uniform random permutation.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from dagforge.counting import CountTable
from dagforge.dag import Dag, relabel_rows
from dagforge.rng import RandomSource

# layer fill callback: (rng, base, k, s) -> k new rows wired into vertices < base
SMALL_N = 64

LayerFill = Callable[[RandomSource, int, int, int], list[int]]


@dataclass(frozen=True)
class OutpointSequence:
    """Layer sizes from the outermost layer (the outpoints of the whole DAG)
    inwards; the last layer is the all-outpoint remainder."""

    layers: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.layers or any(k < 1 for k in self.layers):
            raise ValueError(f"invalid outpoint sequence {self.layers}")

    @property
    def n(self) -> int:
        return sum(self.layers)


def draw_uniform_bigint(bound: int, rng: RandomSource) -> int:
    """Uniform integer in ``[1, bound]``.

    Draws ``ceil(log2(bound))`` bits and retries when the value is out of
    range, which happens less than half the time.
    """
    if bound < 1:
        raise ValueError(f"bound must be >= 1, got {bound}")
    return rng.below(bound) + 1


def _walk(weights: Sequence[int], r: int) -> int:
    """Smallest 1-based index whose partial sum reaches ``r``."""
    acc = 0
    for i, w in enumerate(weights, 1):
        acc += w
        if acc >= r:
            return i
    raise ValueError("draw exceeds total weight; table is inconsistent")


def continue_sequence(
    table: CountTable, k: int, m: int, rng: RandomSource, layers: list[int]
) -> list[int]:
    """Append layers for the ``m`` vertices left below a layer of size ``k``."""
    below = rng.below
    while m > 0:
        prefix = table.step_prefix(k, m)
        k = bisect_left(prefix, below(prefix[-1]) + 1) + 1
        layers.append(k)
        m -= k
    return layers


def _sequence(n: int, table: CountTable, rng: RandomSource) -> list[int]:
    if not 1 <= n <= table.n_max:
        raise ValueError(f"n={n} outside 1..{table.n_max}")
    prefix = table.first_prefix(n)
    k = bisect_left(prefix, rng.below(prefix[-1]) + 1) + 1
    return continue_sequence(table, k, n - k, rng, [k])


def sample_outpoint_sequence(n: int, table: CountTable, rng: RandomSource) -> OutpointSequence:
    """Draw layer sizes so that each sequence has probability proportional to
    the number of DAGs that decompose into it.

    The first layer takes the smallest ``k`` whose partial sum of ``a[n][i]``
    reaches a uniform draw from ``[1, a_n]``; each later layer does the same
    with the step weights below the previous layer and a fresh draw.
    """
    return OutpointSequence(tuple(_sequence(n, table, rng)))


def _nonzero_pattern(rng: RandomSource, k: int) -> int:
    """Uniform nonzero ``k``-bit pattern."""
    if k <= 62:
        return rng.below((1 << k) - 1) + 1
    while True:
        pat = rng.bits(k)
        if pat:
            return pat


def _set_column(rows: list[int], pattern: int, bit: int) -> None:
    r = 0
    while pattern:
        if pattern & 1:
            rows[r] |= bit
        pattern >>= 1
        r += 1


def _fill_uniform(rng: RandomSource, base: int, k: int, s: int) -> list[int]:
    free = base - s
    rows = [rng.bits(free) for _ in range(k)]
    for col in range(free, base):
        _set_column(rows, _nonzero_pattern(rng, k), 1 << col)
    return rows


def _assemble(layers: Sequence[int], rng: RandomSource, fill: LayerFill) -> list[int]:
    rows: list[int] = [0] * layers[-1]
    base = s = layers[-1]
    for k in reversed(layers[:-1]):
        rows.extend(fill(rng, base, k, s))
        base += k
        s = k
    return rows


def assemble_layers(seq: OutpointSequence, rng: RandomSource, fill: LayerFill) -> Dag:
    """Build the block lower-triangular DAG for ``seq`` before relabelling.

    Vertices ``0..k_I-1`` hold the innermost layer; each following block is a
    layer whose rows ``fill`` wires into all lower-numbered vertices. The
    previous block (size ``s``) are the old outpoints.
    """
    return Dag(seq.n, tuple(_assemble(seq.layers, rng, fill)))


def reconstruct_dag(seq: OutpointSequence, rng: RandomSource) -> Dag:
    """Uniform DAG among those with outpoint sequence ``seq``, labels in block order.

    Arcs run from each new block to older vertices only, so reverse block
    order is a topological order.
    """
    return assemble_layers(seq, rng, _fill_uniform)


def permute_labels(dag: Dag, rng: RandomSource) -> Dag:
    """Relabel vertices by a uniform random permutation (Fisher-Yates)."""
    perm = list(range(dag.n))
    rng.shuffle(perm)
    return dag.relabel(perm)


def sample_uniform_dag(n: int, table: CountTable, rng: RandomSource) -> Dag:
    """Labelled DAG on ``n`` vertices, each of the ``a_n`` drawn with probability ``1/a_n``."""
    if table.variant != "unrestricted":
        raise ValueError(f"uniform sampling needs an unrestricted table, got {table.variant}")
    rows = _assemble(_sequence(n, table, rng), rng, _fill_uniform)
    if n > SMALL_N:
        return permute_labels(Dag(n, tuple(rows)), rng)
    perm = list(range(n))
    rng.shuffle(perm)
    return Dag(n, relabel_rows(rows, perm))


# vectorised batches for small n -----------------------------------------

BATCH_MAX_N = 10  # a_10 < 2**63; a_11 is not


def _batch_prefix_arrays(table: CountTable, n: int) -> tuple[np.ndarray, np.ndarray]:
    """First-layer running sums and ``step[k, m, :]`` running sums, int64.

    Unused trailing slots hold int64 max so ``>=`` searches never stop there.
    """
    big = np.iinfo(np.int64).max
    first = np.array(table.first_prefix(n), dtype=np.int64)
    step = np.full((n + 1, n + 1, n), big, dtype=np.int64)
    for k in range(1, n + 1):
        for m in range(1, n - k + 1):
            step[k, m, :m] = table.step_prefix(k, m)
    return first, step


def sample_uniform_batch(
    n: int, table: CountTable, count: int, gen: np.random.Generator
) -> np.ndarray:
    """``count`` uniform DAGs at once as a ``(count, n, n)`` boolean array.

    Same three passes as :func:`sample_uniform_dag`, vectorised over samples:
    layer sizes by partial sums, column-wise rejection of empty hits on old
    outpoints, then a uniform permutation per sample. Needs ``a_n < 2**63``.
    """
    if table.variant != "unrestricted":
        raise ValueError(f"uniform sampling needs an unrestricted table, got {table.variant}")
    if not 1 <= n <= min(table.n_max, BATCH_MAX_N):
        raise ValueError(f"batch sampling supports 1 <= n <= {min(table.n_max, BATCH_MAX_N)}, got {n}")
    first, step = _batch_prefix_arrays(table, n)

    # layer sizes, outermost first
    layers = np.zeros((count, n), dtype=np.int64)
    r = gen.integers(1, first[-1], size=count, endpoint=True)
    k = np.searchsorted(first, r) + 1
    layers[:, 0] = k
    m = n - k
    depth = np.ones(count, dtype=np.int64)
    col = 1
    while (m > 0).any():
        act = np.nonzero(m > 0)[0]
        pre = step[k[act], m[act]]
        bound = pre[np.arange(act.size), m[act] - 1]
        r = gen.integers(1, bound, endpoint=True)
        s = (pre >= r[:, None]).argmax(axis=1) + 1
        layers[act, col] = s
        k[act] = s
        m[act] -= s
        depth[act] += 1
        col += 1

    # inner[:, t] is the size of the t-th layer counted from the innermost
    t = np.arange(n)
    pos = depth[:, None] - 1 - t[None, :]
    inner = np.where(pos >= 0, np.take_along_axis(layers, np.clip(pos, 0, None), axis=1), 0)
    ends = np.cumsum(inner, axis=1)
    # block-order vertex v belongs to inner layer block[:, v]
    block = np.zeros((count, n), dtype=np.int64)
    for j in range(n):
        block += ends[:, j, None] <= t[None, :]
    below_block = block[:, None, :] < block[:, :, None]  # (u, v): v older than u
    next_block = block[:, None, :] + 1 == block[:, :, None]  # u in the layer right after v
    has_next = block < (depth - 1)[:, None]

    adj = gen.integers(0, 2, size=(count, n, n), dtype=bool) & below_block
    hit = np.zeros((count, n), dtype=bool)
    for u in range(n):
        hit |= adj[:, u, :] & next_block[:, u, :]
    si, vi = np.nonzero(has_next & ~hit)
    # redraw only the failing column segments until each old outpoint is hit
    while si.size:
        seg = next_block[si, :, vi]
        fresh = gen.integers(0, 2, size=seg.shape, dtype=bool) & seg
        adj[si, :, vi] = np.where(seg, fresh, adj[si, :, vi])
        ok = fresh.any(axis=1)
        si, vi = si[~ok], vi[~ok]

    perm = np.argsort(gen.random((count, n)), axis=1)
    inv = np.argsort(perm, axis=1)
    adj = np.take_along_axis(adj, inv[:, :, None], axis=1)
    return np.take_along_axis(adj, inv[:, None, :], axis=2)


def batch_keys(adj: np.ndarray) -> list[int] | np.ndarray:
    """:meth:`Dag.key` for every matrix in a ``(count, n, n)`` batch.

    Returns a uint64 array when the keys fit in 64 bits, else a list of ints.
    """
    count, n, _ = adj.shape
    flat = adj.reshape(count, n * n)
    if n * n <= 64:
        weights = np.left_shift(np.uint64(1), np.arange(n * n, dtype=np.uint64))
        return (flat.astype(np.uint64) * weights).sum(axis=1, dtype=np.uint64)
    packed = np.packbits(flat, axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]

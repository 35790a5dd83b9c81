"""Labelled digraph stored as one adjacency bitmask per vertex."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np


@dataclass(frozen=True)
class Dag:
    """Labelled digraph on vertices ``0..n-1``.

    ``rows[u]`` has bit ``v`` set iff there is an arc ``u -> v``. Samplers only
    ever produce acyclic graphs; the class itself does not enforce it so that
    the predicates in :mod:`dagforge.baselines` can be run on arbitrary input.
    """

    n: int
    rows: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.rows) != self.n:
            raise ValueError(f"expected {self.n} rows, got {len(self.rows)}")

    @classmethod
    def empty(cls, n: int) -> "Dag":
        return cls(n, (0,) * n)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Dag":
        rows = [0] * n
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            rows[u] |= 1 << v
        return cls(n, tuple(rows))

    @classmethod
    def from_key(cls, n: int, key: int) -> "Dag":
        mask = (1 << n) - 1
        return cls(n, tuple((key >> (u * n)) & mask for u in range(n)))

    @classmethod
    def from_array(cls, adj: np.ndarray) -> "Dag":
        adj = np.asarray(adj, dtype=bool)
        n = adj.shape[0]
        if adj.shape != (n, n):
            raise ValueError(f"adjacency matrix must be square, got {adj.shape}")
        if n == 0:
            return cls(0, ())
        packed = np.packbits(adj, axis=1, bitorder="little")
        return cls(n, tuple(int.from_bytes(r.tobytes(), "little") for r in packed))

    def to_array(self) -> np.ndarray:
        """Dense boolean adjacency matrix, ``adj[u, v]`` true for ``u -> v``."""
        if self.n == 0:
            return np.zeros((0, 0), dtype=bool)
        width = (self.n + 7) // 8
        raw = b"".join(r.to_bytes(width, "little") for r in self.rows)
        bits = np.unpackbits(
            np.frombuffer(raw, dtype=np.uint8).reshape(self.n, width),
            axis=1,
            bitorder="little",
        )
        return bits[:, : self.n].astype(bool)

    def key(self) -> int:
        """Row-major adjacency bit string packed into an int (bit ``u*n+v``)."""
        n = self.n
        k = 0
        for u, r in enumerate(self.rows):
            k |= r << (u * n)
        return k

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.rows[u] >> v & 1)

    def edges(self) -> Iterator[tuple[int, int]]:
        """Arcs ``(u, v)`` in ascending lexicographic order."""
        for u, r in enumerate(self.rows):
            v = 0
            while r:
                if r & 1:
                    yield u, v
                r >>= 1
                v += 1

    @property
    def num_edges(self) -> int:
        return sum(r.bit_count() for r in self.rows)

    def out_degrees(self) -> list[int]:
        return [r.bit_count() for r in self.rows]

    def in_degrees(self) -> list[int]:
        if self.n > 64:
            return self.to_array().sum(axis=0).tolist()
        deg = [0] * self.n
        for _, v in self.edges():
            deg[v] += 1
        return deg

    def outpoints(self) -> list[int]:
        """Vertices with no incoming arcs."""
        hit = 0
        for r in self.rows:
            hit |= r
        return [v for v in range(self.n) if not hit >> v & 1]

    def reversed(self) -> "Dag":
        """Same graph with every arc flipped."""
        if self.n > 64:
            return Dag.from_array(self.to_array().T)
        return Dag.from_edges(self.n, ((v, u) for u, v in self.edges()))

    def relabel(self, perm: list[int]) -> "Dag":
        """Vertex ``u`` becomes ``perm[u]``."""
        if self.n > 64:
            inv = np.empty(self.n, dtype=np.intp)
            inv[np.asarray(perm, dtype=np.intp)] = np.arange(self.n)
            adj = self.to_array()
            return Dag.from_array(adj[np.ix_(inv, inv)])
        return Dag(self.n, relabel_rows(self.rows, perm))


def relabel_rows(rows: Sequence[int], perm: Sequence[int]) -> tuple[int, ...]:
    """Bitmask rows after moving vertex ``u`` to ``perm[u]`` (small ``n``)."""
    out = [0] * len(rows)
    for u, r in enumerate(rows):
        acc = 0
        while r:
            low = r & -r
            acc |= 1 << perm[low.bit_length() - 1]
            r ^= low
        out[perm[u]] = acc
    return tuple(out)

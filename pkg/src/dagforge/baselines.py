"""Graph predicates and the two non-recursive samplers used as foils.

``sample_triangular`` fills a random triangular matrix and shuffles labels.
It is quick but biased: the empty DAG comes out ``n!`` times more often than
a DAG with all ``L`` arcs. The Markov chain toggles random arcs and is uniform
only in the limit. Its burn-in must be chosen by the caller; O(n^4) steps is
the usual guidance.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from dagforge.dag import Dag
from dagforge.rng import RandomSource
from dagforge.sample_exact import permute_labels

_SMALL = 64


def is_acyclic(dag: Dag) -> bool:
    """True iff repeatedly peeling in-degree-0 vertices empties the graph."""
    n = dag.n
    if n > _SMALL:
        adj = dag.to_array()
        indeg = adj.sum(axis=0)
        alive = np.ones(n, dtype=bool)
        while alive.any():
            layer = alive & (indeg == 0)
            if not layer.any():
                return False
            alive &= ~layer
            indeg = indeg - adj[layer].sum(axis=0)
        return True
    rows = dag.rows
    alive = (1 << n) - 1
    while alive:
        hit = 0
        for u in range(n):
            if alive >> u & 1:
                hit |= rows[u]
        layer = alive & ~hit
        if not layer:
            return False
        alive ^= layer
    return True


def is_weakly_connected(dag: Dag) -> bool:
    """True iff the undirected skeleton has a single component."""
    n = dag.n
    if n <= 1:
        return True
    if n > _SMALL:
        from scipy.sparse import csr_matrix
        from scipy.sparse.csgraph import connected_components

        ncomp, _ = connected_components(csr_matrix(dag.to_array()), directed=True, connection="weak")
        return ncomp == 1
    nbr = list(dag.rows)
    for u, v in dag.edges():
        nbr[v] |= 1 << u
    seen = 1
    frontier = 1
    while frontier:
        nxt = 0
        f, u = frontier, 0
        while f:
            if f & 1:
                nxt |= nbr[u]
            f >>= 1
            u += 1
        frontier = nxt & ~seen
        seen |= frontier
    return seen == (1 << n) - 1


def sample_triangular(n: int, p: Fraction | int | str, rng: RandomSource) -> Dag:
    """Bernoulli(p) upper-triangular adjacency matrix with shuffled labels.

    Not uniform over DAGs; kept as the reference for that bias.
    """
    p = Fraction(p)
    if not 0 <= p <= 1:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    rows = []
    for u in range(n):
        width = n - 1 - u
        if p == Fraction(1, 2):
            r = rng.bits(width)
        elif p == 0:
            r = 0
        elif p == 1:
            r = (1 << width) - 1
        else:
            r = 0
            for j in range(width):
                if rng.bernoulli(p):
                    r |= 1 << j
        rows.append(r << (u + 1))
    return permute_labels(Dag(n, tuple(rows)), rng)


@dataclass(frozen=True)
class McmcConfig:
    burn_in_steps: int = 0
    thinning_steps: int = 1
    prune_self_pairs: bool = False

    def __post_init__(self) -> None:
        if self.burn_in_steps < 0:
            raise ValueError(f"burn_in_steps must be >= 0, got {self.burn_in_steps}")
        if self.thinning_steps < 1:
            raise ValueError(f"thinning_steps must be >= 1, got {self.thinning_steps}")


def _reaches(rows: list[int], src: int, dst: int) -> bool:
    """Is there a directed path ``src -> ... -> dst``?"""
    seen = 1 << src
    stack = [src]
    target = 1 << dst
    while stack:
        nxt = rows[stack.pop()] & ~seen
        if nxt & target:
            return True
        seen |= nxt
        v = 0
        while nxt:
            if nxt & 1:
                stack.append(v)
            nxt >>= 1
            v += 1
    return False


class MarkovChain:
    """Arc-toggling chain over DAGs on ``n`` vertices, started from the empty DAG.

    Each step picks an ordered pair ``(i, j)``. An existing arc ``i -> j`` is
    deleted; otherwise the arc is added unless it would close a cycle. The
    kernel is symmetric, so the stationary law is uniform.
    """

    def __init__(self, n: int, cfg: McmcConfig, rng: RandomSource, start: Dag | None = None):
        self.n = n
        self.cfg = cfg
        self.rng = rng
        self.rows = list(start.rows) if start is not None else [0] * n
        self.steps = 0

    def propose_pair(self) -> tuple[int, int]:
        n = self.n
        if self.cfg.prune_self_pairs:
            # the n(n-1) off-diagonal pairs plus the single pair (0, 0)
            idx = self.rng.below(n * n - n + 1)
            if idx == n * n - n:
                return 0, 0
            i, j = divmod(idx, n - 1)
            return i, j + (j >= i)
        i, j = divmod(self.rng.below(n * n), n)
        return i, j

    def apply_pair(self, i: int, j: int) -> bool:
        """Toggle arc ``i -> j`` if allowed; return whether the state changed."""
        rows = self.rows
        bit = 1 << j
        if rows[i] & bit:
            rows[i] &= ~bit
            return True
        if i == j or _reaches(rows, j, i):
            return False
        rows[i] |= bit
        return True

    def step(self, count: int = 1) -> None:
        for _ in range(count):
            self.apply_pair(*self.propose_pair())
        self.steps += count

    @property
    def state(self) -> Dag:
        return Dag(self.n, tuple(self.rows))

    def samples(self, count: int):
        """Burn in (once), then yield ``count`` states ``thinning_steps`` apart."""
        if self.steps < self.cfg.burn_in_steps:
            self.step(self.cfg.burn_in_steps - self.steps)
        for _ in range(count):
            self.step(self.cfg.thinning_steps)
            yield self.state


def mcmc_step(dag: Dag, cfg: McmcConfig, rng: RandomSource) -> Dag:
    """One chain transition from ``dag``."""
    chain = MarkovChain(dag.n, cfg, rng, start=dag)
    chain.step()
    return chain.state


def sample_mcmc(n: int, cfg: McmcConfig, rng: RandomSource) -> Dag:
    """State of a fresh chain after ``cfg.burn_in_steps`` steps from the empty DAG."""
    chain = MarkovChain(n, cfg, rng)
    chain.step(cfg.burn_in_steps)
    return chain.state

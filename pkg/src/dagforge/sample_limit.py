"""O(n^2) sampler for large DAGs driven by the limiting outpoint distribution.

For large ``n`` the fraction of DAGs with ``k`` outpoints converges to a fixed
law ``A_k`` (to 1e-10 already at n = 20), and the next layer size given the
current one converges to ``B[s|k] ∝ (1 - 2**-k)**s * A_s``. Layer sizes are
drawn from these limits until at most ``n_switch`` vertices remain, after
which the exact tables take over.

All limit-regime draws are made on a 1e-10 fixed-point integer grid, so a
seed reproduces the same sequence on every platform.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from dagforge.counting import CountTable
from dagforge.dag import Dag
from dagforge.rng import RandomSource
from dagforge.sample_exact import (
    OutpointSequence,
    _walk,
    continue_sequence,
    permute_labels,
    reconstruct_dag,
    sample_outpoint_sequence,
)

GRID = 10**10

# limiting outpoint fractions times 1e10, k = 1..8; they sum to exactly 1e10
LIMIT_OUTPOINTS = (5743623733, 3662136732, 564645435, 29023072, 566517, 4496, 15, 0)
K_MAX = 7
DEFAULT_N_SWITCH = 20


@dataclass(frozen=True)
class LimitTables:
    """Limiting first-layer law ``A``, normalizers ``Z`` and conditionals ``B``.

    ``A``, ``Z`` and ``B`` are floats for inspection; sampling uses the integer
    grids ``A_grid`` and ``B_grid[k]`` (each summing to ``GRID``).
    """

    A: dict[int, float]
    Z: dict[int, float]
    B: dict[tuple[int, int], float]
    A_grid: tuple[int, ...]
    B_grid: dict[int, tuple[int, ...]]
    n_switch: int = DEFAULT_N_SWITCH


def _round_half_up(x: Fraction) -> int:
    return (x.numerator * 2 + x.denominator) // (2 * x.denominator)


def build_limit_tables(n_switch: int = DEFAULT_N_SWITCH) -> LimitTables:
    if n_switch < 8:
        raise ValueError(f"n_switch must be >= 8, got {n_switch}")
    A_exact = {k: Fraction(LIMIT_OUTPOINTS[k - 1], GRID) for k in range(1, K_MAX + 1)}
    Z: dict[int, float] = {}
    B: dict[tuple[int, int], float] = {}
    B_grid: dict[int, tuple[int, ...]] = {}
    for k in range(1, K_MAX + 1):
        keep = 1 - Fraction(1, 2**k)
        terms = {s: keep**s * A_exact[s] for s in range(1, K_MAX + 1)}
        z = sum(terms.values())
        Z[k] = float(z)
        probs = {s: t / z for s, t in terms.items()}
        for s, pr in probs.items():
            B[k, s] = float(pr)
        grid = [_round_half_up(probs[s] * GRID) for s in range(1, K_MAX + 1)]
        grid[0] += GRID - sum(grid)
        B_grid[k] = tuple(grid)
    return LimitTables(
        A={k: float(v) for k, v in A_exact.items()},
        Z=Z,
        B=B,
        A_grid=LIMIT_OUTPOINTS[:K_MAX],
        B_grid=B_grid,
        n_switch=n_switch,
    )


def sample_outpoint_sequence_hybrid(
    n: int, lt: LimitTables, table: CountTable, rng: RandomSource
) -> OutpointSequence:
    """Layer sizes for an ``n``-vertex DAG, limit laws above ``lt.n_switch``."""
    if table.variant != "unrestricted":
        raise ValueError(f"hybrid sampling needs an unrestricted table, got {table.variant}")
    if table.n_max < lt.n_switch:
        raise ValueError(f"table covers n <= {table.n_max}, need n_switch={lt.n_switch}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n <= lt.n_switch:
        return sample_outpoint_sequence(n, table, rng)
    k = _walk(lt.A_grid, rng.below(GRID) + 1)
    layers = [k]
    m = n - k
    while m > lt.n_switch:
        k = _walk(lt.B_grid[k], rng.below(GRID) + 1)
        layers.append(k)
        m -= k
    return OutpointSequence(tuple(continue_sequence(table, k, m, rng, layers)))


def sample_large_dag(n: int, lt: LimitTables, table: CountTable, rng: RandomSource) -> Dag:
    """Approximately uniform DAG (uniform at scales above 1e-10) in O(n^2)."""
    seq = sample_outpoint_sequence_hybrid(n, lt, table, rng)
    return permute_labels(reconstruct_dag(seq, rng), rng)

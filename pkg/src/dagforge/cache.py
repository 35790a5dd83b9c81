"""Versioned text cache for count tables.

Layout::

    dagforge-tables v1 variant=<tag> n_max=<n> [K=<K>] [K_n=<K_n>]
    <n> <k> <a> <b>        one line per 1 <= k <= n <= n_max
    total <n> <a_n>        one line per n

Every load re-checks ``a == binom(n, k) * b``, the row sums against the
stored totals, the base cases, and recomputes the first rows from the stated
parameters, so a flipped digit anywhere is caught before sampling.
"""

from __future__ import annotations

import os
from math import comb
from pathlib import Path

from dagforge.counting import (
    CountTable,
    build_children_limited_table,
    build_count_table,
    build_restricted_table,
    total_inclusion_exclusion,
)

MAGIC = "dagforge-tables"
VERSION = "v1"
SPOT_CHECK_N = 8


class TableCacheError(Exception):
    """The cache file is unreadable or fails an integrity check."""


def _rebuild(variant: str, n_max: int, K: int | None, K_n: int | None) -> CountTable:
    if variant != "unrestricted" and (K is None or (variant == "max_in_out") != (K_n is not None)):
        raise TableCacheError(f"parameters K={K}, K_n={K_n} do not fit variant {variant!r}")
    if variant == "unrestricted":
        return build_count_table(n_max, limit=None)
    if variant in ("max_in", "max_in_out"):
        return build_restricted_table(n_max, K, K_n, limit=None)
    if variant == "max_children":
        return build_children_limited_table(n_max, K, limit=None)
    raise TableCacheError(f"unknown variant {variant!r}")


def verify_table(table: CountTable) -> None:
    """Raise :class:`TableCacheError` unless the table's invariants hold."""
    for n in range(1, table.n_max + 1):
        arow, brow = table.a[n], table.b[n]
        if len(arow) != n + 1 or len(brow) != n + 1:
            raise TableCacheError(f"row {n} has the wrong length")
        if arow[n] != 1 or brow[n] != 1:
            raise TableCacheError(f"base case a({n},{n}) = b({n},{n}) = 1 violated")
        for k in range(1, n + 1):
            if arow[k] <= 0 or arow[k] != comb(n, k) * brow[k]:
                raise TableCacheError(f"a({n},{k}) != binom({n},{k}) * b({n},{k})")
        if sum(arow[1:]) != table.total[n]:
            raise TableCacheError(f"row {n} does not sum to total({n})")
    ref = _rebuild(table.variant, min(table.n_max, SPOT_CHECK_N), table.K, table.K_n)
    for n in range(1, ref.n_max + 1):
        if ref.a[n] != table.a[n]:
            raise TableCacheError(f"row {n} does not match the recursion for {table.describe()}")
    if table.variant == "unrestricted":
        for n in range(1, table.n_max + 1):
            if total_inclusion_exclusion(n, table) != table.total[n]:
                raise TableCacheError(f"total({n}) disagrees with inclusion-exclusion")


def save_table(table: CountTable, path: str | os.PathLike) -> None:
    verify_table(table)
    header = [MAGIC, VERSION, f"variant={table.variant}", f"n_max={table.n_max}"]
    if table.K is not None:
        header.append(f"K={table.K}")
    if table.K_n is not None:
        header.append(f"K_n={table.K_n}")
    lines = [" ".join(header)]
    for n in range(1, table.n_max + 1):
        for k in range(1, n + 1):
            lines.append(f"{n} {k} {table.a[n][k]} {table.b[n][k]}")
    for n in range(1, table.n_max + 1):
        lines.append(f"total {n} {table.total[n]}")
    tmp = Path(f"{path}.tmp")
    tmp.write_text("\n".join(lines) + "\n")
    os.replace(tmp, path)


def load_table(path: str | os.PathLike) -> CountTable:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise TableCacheError(f"cannot read {path}: {exc}") from exc
    lines = text.splitlines()
    if not lines:
        raise TableCacheError(f"{path} is empty")
    head = lines[0].split()
    if head[:2] != [MAGIC, VERSION]:
        raise TableCacheError(f"{path}: not a {MAGIC} {VERSION} file")
    try:
        fields = dict(item.split("=", 1) for item in head[2:])
        variant = fields["variant"]
        n_max = int(fields["n_max"])
        K = int(fields["K"]) if "K" in fields else None
        K_n = int(fields["K_n"]) if "K_n" in fields else None
    except (KeyError, ValueError) as exc:
        raise TableCacheError(f"{path}: bad header {lines[0]!r}") from exc
    if n_max < 1:
        raise TableCacheError(f"{path}: n_max must be >= 1")

    a = [[0]] + [[0] * (n + 1) for n in range(1, n_max + 1)]
    b = [[0]] + [[0] * (n + 1) for n in range(1, n_max + 1)]
    total = [1] + [None] * n_max
    seen = set()
    for lineno, line in enumerate(lines[1:], 2):
        parts = line.split()
        if not parts:
            continue
        try:
            if parts[0] == "total" and len(parts) == 3:
                n = int(parts[1])
                if not 1 <= n <= n_max or total[n] is not None:
                    raise ValueError("duplicate or out-of-range total")
                total[n] = int(parts[2])
                continue
            if len(parts) != 4:
                raise ValueError("expected 4 fields")
            n, k, av, bv = (int(x) for x in parts)
            if not 1 <= k <= n <= n_max or (n, k) in seen:
                raise ValueError("duplicate or out-of-range entry")
        except ValueError as exc:
            raise TableCacheError(f"{path}:{lineno}: {exc}") from exc
        seen.add((n, k))
        a[n][k], b[n][k] = av, bv
    if len(seen) != n_max * (n_max + 1) // 2 or any(t is None for t in total):
        raise TableCacheError(f"{path}: table is incomplete")

    table = CountTable(n_max, variant, a, b, total, K=K, K_n=K_n)
    verify_table(table)
    return table

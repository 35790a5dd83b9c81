"""Text formats for DAG streams.

All formats number vertices from 1 and list arcs ``u -> v`` in ascending
``(u, v)`` order. In a stream, edgelist, matrix and dot records are separated
by a blank line; json is one object per line.
"""

from __future__ import annotations

import json
import re
from typing import Iterable, Iterator

from dagforge.dag import Dag

FORMATS = ("edgelist", "matrix", "dot", "json")


class FormatError(ValueError):
    """Input that does not parse as the expected DAG format."""


def serialize(dag: Dag, fmt: str) -> str:
    """One record, newline-terminated (no trailing blank line)."""
    if fmt == "edgelist":
        lines = [f"# n={dag.n}"]
        lines += [f"{u + 1} {v + 1}" for u, v in dag.edges()]
        return "\n".join(lines) + "\n"
    if fmt == "matrix":
        if dag.n == 0:
            return "\n"
        adj = dag.to_array()
        return "".join("".join("1" if x else "0" for x in row) + "\n" for row in adj)
    if fmt == "dot":
        lines = ["digraph {"]
        lines += [f"  {v + 1};" for v in range(dag.n)]
        lines += [f"  {u + 1} -> {v + 1};" for u, v in dag.edges()]
        lines.append("}")
        return "\n".join(lines) + "\n"
    if fmt == "json":
        edges = [[u + 1, v + 1] for u, v in dag.edges()]
        return json.dumps({"n": dag.n, "edges": edges}, separators=(",", ":")) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def write_stream(dags: Iterable[Dag], fmt: str) -> Iterator[str]:
    """Chunks to write, records separated as described in the module docstring."""
    sep = "" if fmt == "json" else "\n"
    for i, dag in enumerate(dags):
        yield (sep if i else "") + serialize(dag, fmt)


def detect_format(text: str) -> str:
    head = text.lstrip()
    if not head:
        return "edgelist"
    if head.startswith("#"):
        return "edgelist"
    if head.startswith("{"):
        return "json"
    if head.startswith("digraph"):
        return "dot"
    if head[0] in "01":
        return "matrix"
    raise FormatError(f"cannot detect format from {head[:20]!r}")


def _edges_dag(n: int, edges: list[tuple[int, int]], where: str) -> Dag:
    for u, v in edges:
        if not (1 <= u <= n and 1 <= v <= n):
            raise FormatError(f"{where}: arc {u} {v} outside 1..{n}")
    return Dag.from_edges(n, ((u - 1, v - 1) for u, v in edges))


def _parse_edgelist(text: str) -> Iterator[Dag]:
    n = None
    edges: list[tuple[int, int]] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = re.fullmatch(r"#\s*n=(\d+)", line)
            if not m:
                raise FormatError(f"line {lineno}: bad header {line!r}")
            if n is not None:
                yield _edges_dag(n, edges, f"record ending line {lineno - 1}")
            n, edges = int(m.group(1)), []
            continue
        if n is None:
            raise FormatError(f"line {lineno}: arc before '# n=' header")
        parts = line.split()
        if len(parts) != 2 or not all(p.isdigit() for p in parts):
            raise FormatError(f"line {lineno}: expected 'u v', got {line!r}")
        edges.append((int(parts[0]), int(parts[1])))
    if n is not None:
        yield _edges_dag(n, edges, "last record")


def _parse_matrix(text: str) -> Iterator[Dag]:
    block: list[str] = []
    for line in text.splitlines() + [""]:
        line = line.strip()
        if line:
            block.append(line)
            continue
        if not block:
            continue
        n = len(block)
        if any(len(r) != n or set(r) - {"0", "1"} for r in block):
            raise FormatError(f"matrix record is not a square 0/1 block: {block[0]!r}...")
        yield Dag(n, tuple(int(r[::-1], 2) for r in block))
        block = []


_DOT_NODE = re.compile(r"^\s*(\d+)\s*;\s*$")
_DOT_EDGE = re.compile(r"^\s*(\d+)\s*->\s*(\d+)\s*;\s*$")


def _parse_dot(text: str) -> Iterator[Dag]:
    inside = False
    nodes: list[int] = []
    edges: list[tuple[int, int]] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s:
            continue
        if not inside:
            if s != "digraph {":
                raise FormatError(f"line {lineno}: expected 'digraph {{', got {s!r}")
            inside, nodes, edges = True, [], []
        elif s == "}":
            n = len(nodes)
            if sorted(nodes) != list(range(1, n + 1)):
                raise FormatError(f"line {lineno}: node ids must be 1..{n}")
            yield _edges_dag(n, edges, f"graph ending line {lineno}")
            inside = False
        elif m := _DOT_EDGE.match(s):
            edges.append((int(m.group(1)), int(m.group(2))))
        elif m := _DOT_NODE.match(s):
            nodes.append(int(m.group(1)))
        else:
            raise FormatError(f"line {lineno}: unsupported statement {s!r}")
    if inside:
        raise FormatError("unterminated digraph")


def _parse_json(text: str) -> Iterator[Dag]:
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            n = int(obj["n"])
            edges = [(int(u), int(v)) for u, v in obj["edges"]]
        except (ValueError, KeyError, TypeError) as exc:
            raise FormatError(f"line {lineno}: {exc}") from exc
        yield _edges_dag(n, edges, f"line {lineno}")


def parse_stream(text: str, fmt: str | None = None) -> Iterator[Dag]:
    """Parse every record in ``text``; ``fmt=None`` guesses from the first record."""
    fmt = fmt or detect_format(text)
    parsers = {
        "edgelist": _parse_edgelist,
        "matrix": _parse_matrix,
        "dot": _parse_dot,
        "json": _parse_json,
    }
    if fmt not in parsers:
        raise ValueError(f"unknown format {fmt!r}")
    return parsers[fmt](text)

import itertools

import networkx as nx
import pytest

from dagforge.counting import build_count_table
from dagforge.dag import Dag


@pytest.fixture(scope="session")
def table40():
    return build_count_table(40)


@pytest.fixture(scope="session")
def table20():
    return build_count_table(20)


def nx_dags(n):
    """All labelled DAGs on n vertices, enumerated independently with networkx."""
    pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
    out = []
    for bits in itertools.product((0, 1), repeat=len(pairs)):
        g = nx.DiGraph()
        g.add_nodes_from(range(n))
        g.add_edges_from(p for p, b in zip(pairs, bits) if b)
        if nx.is_directed_acyclic_graph(g):
            out.append(Dag.from_edges(n, g.edges()))
    return out


@pytest.fixture(scope="session")
def nx_oracle():
    return {n: nx_dags(n) for n in range(1, 5)}

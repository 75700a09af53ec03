"""Shared graph corpora for tests: the small-graph atlas plus seeded random graphs."""

from __future__ import annotations

import random
from functools import lru_cache

import networkx as nx
from hypothesis import strategies as st

from maxmod.graph import Graph

RANDOM_SEED = 20240611
RANDOM_COUNT = 200


def from_nx(H) -> Graph:
    nodes = list(H.nodes())
    idx = {v: i for i, v in enumerate(nodes)}
    return Graph(len(nodes), tuple((idx[u], idx[v]) for u, v in H.edges()), tuple(str(v) for v in nodes))


def random_graph(rng: random.Random, n: int, p: float) -> Graph:
    edges = tuple((u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p)
    return Graph(n, edges)


@lru_cache(maxsize=None)
def atlas_graphs() -> tuple:
    """Every connected graph on at most 7 vertices with at least one edge, up to isomorphism."""
    return tuple(from_nx(H) for H in nx.graph_atlas_g() if H.number_of_edges() and nx.is_connected(H))


@lru_cache(maxsize=None)
def random_graphs() -> tuple:
    """200 seeded G(n, p) graphs, 2 <= n <= 8, at least one edge (isolated vertices allowed)."""
    rng = random.Random(RANDOM_SEED)
    out = []
    while len(out) < RANDOM_COUNT:
        n = rng.randint(2, 8)
        G = random_graph(rng, n, rng.uniform(0.15, 0.8))
        if G.m:
            out.append(G)
    return tuple(out)


def corpus() -> tuple:
    return atlas_graphs() + random_graphs()


# hypothesis strategies


@st.composite
def graphs(draw, min_n: int = 1, max_n: int = 7, min_edges: int = 0):
    n = draw(st.integers(min_n, max_n))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, min_size=min(min_edges, len(pairs)))
                  if pairs else st.just([]))
    return Graph(n, tuple(chosen))


@st.composite
def graphs_with_partition(draw, min_n: int = 1, max_n: int = 7):
    G = draw(graphs(max(min_n, 2), max_n, min_edges=1))
    labels = draw(st.lists(st.integers(0, G.n - 1), min_size=G.n, max_size=G.n))
    parts: dict = {}
    for v, lab in enumerate(labels):
        parts.setdefault(lab, set()).add(v)
    return G, list(parts.values())

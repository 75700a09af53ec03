import random

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus import from_nx, graphs, random_graph
from maxmod.graph import Graph, bits, build_graph, strip_isolated
from maxmod.treedecomp import (
    FORGET,
    JOIN,
    TDFormatError,
    TreeDecomposition,
    decomposition_from_order,
    elimination_order,
    format_td,
    heuristic_decompose,
    make_nice,
    nice_decomposition,
    parse_td,
    validate,
)

PATH3 = build_graph([("a", "b"), ("b", "c")])


def test_parse_single_bag():
    td = parse_td("s td 1 2 2\nb 1 1 2\n")
    assert td.bags == [frozenset({0, 1})] and td.width == 1


def test_parse_two_bags():
    td = parse_td("c comment\ns td 2 2 3\nb 1 1 2\nb 2 2 3\n1 2\n")
    assert td.width == 1 and td.edges == [(0, 1)]


@pytest.mark.parametrize(
    "text,msg",
    [
        ("s td 2 2 3\nb 1 1 2\nb 2 2 3\n1 3\n", "undeclared bag 3"),
        ("s td 3 2 3\nb 1 1 2\nb 2 2 3\nb 3 3\n1 2\n2 3\n3 1\n", "cycle"),
        ("s td 2 2\nb 1 1 2\n", "malformed header"),
        ("b 1 1 2\n", "before"),
        ("s td 2 2 3\nb 1 1 2\n", "declares 2 bags"),
        ("s td 1 2 2\nb 1 1 5\n", "outside"),
    ],
)
def test_parse_errors(text, msg):
    with pytest.raises(TDFormatError, match=msg):
        parse_td(text)


def test_format_round_trip():
    G = from_nx(nx.petersen_graph())
    td = heuristic_decompose(G)
    back = parse_td(format_td(td, G.n))
    assert back.bags == td.bags and sorted(back.edges) == sorted(td.edges)


def test_validate_examples():
    good = TreeDecomposition([frozenset({0, 1}), frozenset({1, 2})], [(0, 1)])
    assert validate(PATH3, good) == []
    bad = TreeDecomposition([frozenset({0, 1}), frozenset({2})], [(0, 1)])
    assert validate(PATH3, bad) == ["condition 2: edge b-c is in no bag"]
    split = TreeDecomposition([frozenset({0, 1}), frozenset({2}), frozenset({1, 2})], [(0, 1), (1, 2)])
    problems = validate(PATH3, split)
    assert len(problems) == 1 and problems[0].startswith("condition 3: bags containing b")
    missing = TreeDecomposition([frozenset({0, 1})], [])
    assert any(p.startswith("condition 1: vertex c") for p in validate(PATH3, missing))


@pytest.mark.parametrize(
    "H,width",
    [
        (nx.balanced_tree(2, 3), 1),
        (nx.random_labeled_tree(15, seed=4), 1),
        (nx.cycle_graph(5), 2),
        (nx.cycle_graph(9), 2),
        (nx.complete_graph(4), 3),
    ],
)
def test_min_fill_widths(H, width):
    G = from_nx(H)
    td = heuristic_decompose(G)
    assert validate(G, td) == [] and td.width == width


@pytest.mark.parametrize("heuristic", ["min-fill", "min-degree", "random"])
def test_orders_are_permutations(heuristic):
    G = from_nx(nx.petersen_graph())
    order = elimination_order(G, heuristic, seed=3)
    assert sorted(order) == list(range(G.n))
    assert validate(G, decomposition_from_order(G, order)) == []


def test_single_bag_nice():
    G = build_graph([("a", "b")])
    nice = make_nice(TreeDecomposition([frozenset({0, 1})], []))
    assert nice.kinds == ["leaf", "introduce"] and nice.width == 1
    assert validate(G, nice.to_td()) == [] and nice.check_nice() == []


def test_c6_nice_keeps_width():
    G = from_nx(nx.cycle_graph(6))
    nice = nice_decomposition(G)
    assert nice.width == 2 and validate(G, nice.to_td()) == [] and nice.check_nice() == []


def test_path_decomposition_has_no_joins():
    G = from_nx(nx.path_graph(8))
    bags = [frozenset({i, i + 1}) for i in range(7)]
    nice = make_nice(TreeDecomposition(bags, [(i, i + 1) for i in range(6)]))
    assert JOIN not in nice.kinds and validate(G, nice.to_td()) == []


def test_make_nice_rejects_bad_input():
    with pytest.raises(ValueError):
        make_nice(TreeDecomposition([frozenset({0}), frozenset({1})], [(0, 1), (1, 0)]))


def _ancestors_bags(nice):
    parent = {}
    for t, ch in enumerate(nice.children):
        for c in ch:
            parent[c] = t
    return parent


def _check_nice(G, td):
    nice = make_nice(td)
    assert nice.check_nice() == []
    assert validate(G, nice.to_td()) == []
    assert nice.width == td.width
    assert nice.bags[nice.root] != 0
    # node count: leaves, joins and forgets are O(N + n); introduces add up to (w+1) per tree edge
    assert len(nice) <= (td.width + 3) * (len(td.bags) + G.n)
    parent = _ancestors_bags(nice)
    for t, kind in enumerate(nice.kinds):
        if kind == FORGET:
            v = nice.vertex[t]
            a = parent.get(t)
            while a is not None:
                assert not nice.bags[a] >> v & 1
                a = parent.get(a)


def test_random_graphs_up_to_twenty():
    rng = random.Random(17)
    for _ in range(500):
        G = random_graph(rng, rng.randint(2, 20), rng.uniform(0.05, 0.5))
        H, _ = strip_isolated(G)
        if H.n == 0:
            continue
        for heuristic in ("min-fill", "min-degree"):
            td = heuristic_decompose(H, heuristic)
            assert validate(H, td) == []
            _check_nice(H, td)


@settings(max_examples=80, deadline=None)
@given(graphs(min_n=2, max_n=10, min_edges=1), st.integers(0, 10_000))
def test_random_orders_give_valid_nice_decompositions(G, seed):
    H, _ = strip_isolated(G)
    td = heuristic_decompose(H, "random", seed)
    assert validate(H, td) == []
    _check_nice(H, td)


def test_disconnected_graph_decomposes_to_one_tree():
    G = Graph(6, ((0, 1), (1, 2), (3, 4), (4, 5)))
    td = heuristic_decompose(G)
    assert validate(G, td) == [] and len(td.edges) == len(td.bags) - 1
    assert set().union(*td.bags) == set(bits(G.all_mask))

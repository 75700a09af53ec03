from fractions import Fraction

import networkx as nx
import pytest
from hypothesis import given, settings

from corpus import from_nx, graphs
from maxmod import connsub, oracle
from maxmod.graph import BudgetExceeded, Graph, is_connected, score_partition, set_stats

TWO_K3 = Graph(6, ((0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)))


@pytest.mark.parametrize(
    "G,count",
    [(from_nx(nx.path_graph(3)), 6), (from_nx(nx.complete_graph(4)), 15), (Graph(3, ((1, 2),)), 4),
     (from_nx(nx.cycle_graph(5)), 21), (from_nx(nx.star_graph(3)), 11)],
)
def test_counts(G, count):
    assert connsub.count_connected_subgraphs(G) == count


@pytest.mark.parametrize(
    "G,expected",
    [(TWO_K3, Fraction(1, 2)), (from_nx(nx.complete_graph(5)), 0), (from_nx(nx.cycle_graph(5)), Fraction(2, 25))],
)
def test_solve_examples(G, expected):
    sol = connsub.solve(G)
    assert sol.q.fraction == expected
    assert score_partition(G, sol.partition).q == sol.q


def test_cap():
    with pytest.raises(BudgetExceeded) as info:
        connsub.enumerate_connected_subgraphs(from_nx(nx.complete_graph(10)), cap=100)
    assert info.value.reached == 101


@settings(max_examples=80, deadline=None)
@given(graphs(max_n=9))
def test_index_is_exactly_the_connected_sets(G):
    index = connsub.enumerate_connected_subgraphs(G)
    expected = {S for S in range(1, 1 << G.n) if is_connected(G, S)}
    assert set(index.subgraphs) == expected and len(index) == len(expected)
    sizes = [S.bit_count() for S in index.subgraphs]
    assert sizes == sorted(sizes)


@settings(max_examples=60, deadline=None)
@given(graphs(min_n=2, max_n=8, min_edges=1))
def test_recurrence_properties(G):
    index = connsub.enumerate_connected_subgraphs(G)
    connsub.evaluate(G, index)
    m4 = 4 * G.m
    for j, H in enumerate(index.subgraphs):
        e, vol, _ = set_stats(G, H)
        assert index.best[j] >= m4 * e - vol * vol
        for X, Y in connsub._splits(index, j):
            assert X | Y == H and not X & Y
            assert index.position[X] < j and index.position[Y] < j


@settings(max_examples=60, deadline=None)
@given(graphs(min_n=2, max_n=8, min_edges=1))
def test_matches_brute_force(G):
    sol = connsub.solve(G)
    assert sol.q == oracle.brute_force(G).q

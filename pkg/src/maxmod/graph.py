"""Graphs, exact modularity scoring and the basic structural facts.

Every modularity value is carried as an integer numerator over the fixed
denominator ``4 m**2`` (see :class:`ScaledScore`).  Vertex sets are Python
ints used as bit vectors internally; public functions accept either a mask or
any iterable of vertex indices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import total_ordering
from typing import Iterable, NamedTuple, Sequence, Union

VertexLike = Union[int, Iterable[int]]


class GraphError(ValueError):
    """Malformed graph input (self-loop, duplicate edge, bad index)."""


class PartitionError(ValueError):
    """A vertex family that is not a partition of the vertex set."""


class EdgelessGraphError(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    """A size cap (partitions, states, subgraphs, search nodes) was hit."""

    def __init__(self, what: str, limit: int, reached: int | None = None):
        self.what = what
        self.limit = limit
        self.reached = reached
        msg = f"{what} budget exceeded: limit {limit}"
        if reached is not None:
            msg += f", reached {reached}"
        super().__init__(msg)


# ---------------------------------------------------------------------------
# bit helpers

def bits(mask: int):
    """Yield the indices of the set bits of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def popcount(mask: int) -> int:
    return mask.bit_count()


def to_mask(vertices: VertexLike) -> int:
    if isinstance(vertices, int):
        return vertices
    mask = 0
    for v in vertices:
        mask |= 1 << v
    return mask


def to_set(mask: int) -> frozenset:
    return frozenset(bits(mask))


# ---------------------------------------------------------------------------
# scores

@total_ordering
@dataclass(frozen=True)
class ScaledScore:
    """An exact modularity value ``num / (4 m**2)``.

    For ``m == 0`` the scale is 1; this only occurs for the conventional
    value q* = 1 of an edgeless graph.
    """

    num: int
    m: int

    @property
    def scale(self) -> int:
        return 4 * self.m * self.m if self.m else 1

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.num, self.scale)

    def __float__(self) -> float:
        return self.num / self.scale

    def _check(self, other: "ScaledScore") -> None:
        if not isinstance(other, ScaledScore):
            raise TypeError(f"cannot combine ScaledScore with {type(other).__name__}")
        if other.m != self.m:
            raise ValueError(f"scale mismatch: m={self.m} vs m={other.m}")

    def __add__(self, other: "ScaledScore") -> "ScaledScore":
        self._check(other)
        return ScaledScore(self.num + other.num, self.m)

    def __sub__(self, other: "ScaledScore") -> "ScaledScore":
        self._check(other)
        return ScaledScore(self.num - other.num, self.m)

    def __neg__(self) -> "ScaledScore":
        return ScaledScore(-self.num, self.m)

    def __lt__(self, other):
        if not isinstance(other, ScaledScore):
            return NotImplemented
        if other.m == self.m:
            return self.num < other.num
        return self.fraction < other.fraction

    def __str__(self) -> str:
        f = self.fraction
        return f"{f.numerator}/{f.denominator}" if f.denominator != 1 else str(f.numerator)


# ---------------------------------------------------------------------------
# graph

@dataclass(frozen=True)
class Graph:
    """Immutable simple graph on vertices ``0..n-1``.

    ``edges`` holds each edge once as ``(u, v)`` with ``u < v``.
    ``labels[i]`` is the original name of vertex ``i``.
    """

    n: int
    edges: tuple
    labels: tuple = ()
    deg: tuple = field(init=False, repr=False, compare=False)
    adj: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = self.n
        if n < 0:
            raise GraphError("negative vertex count")
        seen = set()
        deg = [0] * n
        adj = [0] * n
        canon = []
        for u, v in self.edges:
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u}, {v}) has an endpoint outside 0..{n - 1}")
            if u == v:
                raise GraphError(f"self-loop at vertex {u}")
            e = (u, v) if u < v else (v, u)
            if e in seen:
                raise GraphError(f"duplicate edge {e}")
            seen.add(e)
            canon.append(e)
            deg[u] += 1
            deg[v] += 1
            adj[u] |= 1 << v
            adj[v] |= 1 << u
        labels = tuple(str(x) for x in self.labels) if self.labels else tuple(str(i) for i in range(n))
        if len(labels) != n:
            raise GraphError("label count does not match vertex count")
        object.__setattr__(self, "edges", tuple(canon))
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "deg", tuple(deg))
        object.__setattr__(self, "adj", tuple(adj))

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def all_mask(self) -> int:
        return (1 << self.n) - 1

    @property
    def max_degree(self) -> int:
        return max(self.deg, default=0)

    def neighbors(self, v: int) -> frozenset:
        return to_set(self.adj[v])

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown vertex label {label!r}") from None


def build_graph(pairs: Iterable[tuple], isolated: Iterable = (), line_numbers: Sequence[int] | None = None) -> Graph:
    """Build a graph from labelled edge pairs plus declared isolated vertices.

    Labels are densely re-indexed in order of first appearance.  Self-loops and
    duplicate edges raise :class:`GraphError`; when ``line_numbers`` is given it
    is used to point at the offending input line.
    """
    index: dict = {}
    labels: list = []

    def idx(label) -> int:
        label = str(label)
        if label not in index:
            index[label] = len(labels)
            labels.append(label)
        return index[label]

    edges = []
    seen = {}
    for k, (a, b) in enumerate(pairs):
        where = f" (line {line_numbers[k]})" if line_numbers is not None else ""
        if str(a) == str(b):
            raise GraphError(f"self-loop on {a!r}{where}")
        u, v = idx(a), idx(b)
        e = (min(u, v), max(u, v))
        if e in seen:
            raise GraphError(f"duplicate edge {a!r} {b!r}{where}, first seen{seen[e]}")
        seen[e] = where or f" as pair #{k}"
        edges.append(e)
    for label in isolated:
        idx(label)
    return Graph(len(labels), tuple(edges), tuple(labels))


def induced_subgraph(G: Graph, vertices: VertexLike) -> tuple:
    """Return ``(H, old_of_new)``: the induced subgraph and its index map."""
    keep = list(bits(to_mask(vertices)))
    new_of_old = {v: i for i, v in enumerate(keep)}
    edges = tuple((new_of_old[u], new_of_old[v]) for u, v in G.edges if u in new_of_old and v in new_of_old)
    return Graph(len(keep), edges, tuple(G.labels[v] for v in keep)), keep


def add_isolated(G: Graph, k: int, prefix: str = "iso") -> Graph:
    labels = list(G.labels)
    taken = set(labels)
    j = 0
    for _ in range(k):
        while f"{prefix}{j}" in taken:
            j += 1
        labels.append(f"{prefix}{j}")
        taken.add(labels[-1])
    return Graph(G.n + k, G.edges, tuple(labels))


# ---------------------------------------------------------------------------
# set statistics and scoring

def set_stats(G: Graph, A: VertexLike) -> tuple:
    """Return ``(e(A), vol(A), boundary(A))`` for a vertex set ``A``."""
    mask = to_mask(A)
    if mask >> G.n:
        raise ValueError("vertex set is not a subset of V(G)")
    internal2 = 0
    vol = 0
    for v in bits(mask):
        vol += G.deg[v]
        internal2 += popcount(G.adj[v] & mask)
    e = internal2 // 2
    return e, vol, vol - 2 * e


def partition_masks(G: Graph, partition) -> list:
    """Validate ``partition`` against ``V(G)`` and return it as a list of masks."""
    masks = [to_mask(p) for p in partition]
    seen = 0
    for k, p in enumerate(masks):
        if p == 0:
            raise PartitionError(f"part {k} is empty")
        if p >> G.n:
            raise PartitionError(f"part {k} contains a vertex outside V(G)")
        if p & seen:
            raise PartitionError(f"part {k} overlaps an earlier part")
        seen |= p
    if seen != G.all_mask:
        missing = sorted(G.labels[v] for v in bits(G.all_mask & ~seen))
        raise PartitionError(f"parts do not cover V(G); missing {missing}")
    return masks


def canonical_partition(masks: Iterable[int]) -> tuple:
    """Partition as a tuple of frozensets ordered by smallest member."""
    ms = sorted((m for m in masks if m), key=lambda m: (m & -m).bit_length())
    return tuple(to_set(m) for m in ms)


class Scores(NamedTuple):
    q: ScaledScore
    coverage: ScaledScore
    tax: ScaledScore


def _require_edges(G: Graph) -> None:
    if G.m == 0:
        raise EdgelessGraphError("edgeless graph: q* is 1 by convention, partition scores undefined")


def score_masks(G: Graph, masks: Iterable[int]) -> int:
    """Unchecked scaled score ``4m*sum e(A) - sum vol(A)**2`` of a mask family."""
    m4 = 4 * G.m
    total = 0
    for p in masks:
        e, vol, _ = set_stats(G, p)
        total += m4 * e - vol * vol
    return total


def score_partition(G: Graph, partition) -> Scores:
    """Exact modularity of a partition with its coverage and degree-tax parts."""
    _require_edges(G)
    masks = partition_masks(G, partition)
    m = G.m
    esum = 0
    vsq = 0
    for p in masks:
        e, vol, _ = set_stats(G, p)
        esum += e
        vsq += vol * vol
    cov = ScaledScore(4 * m * esum, m)
    tax = ScaledScore(vsq, m)
    return Scores(cov - tax, cov, tax)


def deficit(G: Graph, partition) -> ScaledScore:
    """Modularity deficit ``1 - q``, computed from boundaries and volumes."""
    _require_edges(G)
    masks = partition_masks(G, partition)
    m = G.m
    # 4m^2 * (1/2m) * sum(bd + vol^2/2m) = sum(2m*bd + vol^2)
    num = 0
    for p in masks:
        _, vol, bd = set_stats(G, p)
        num += 2 * m * bd + vol * vol
    return ScaledScore(num, m)


def merge_delta(G: Graph, partition, i: int, j: int) -> ScaledScore:
    """Change in modularity from merging parts ``i`` and ``j``."""
    _require_edges(G)
    masks = partition_masks(G, partition)
    if i == j or not (0 <= i < len(masks) and 0 <= j < len(masks)):
        raise IndexError(f"invalid part pair ({i}, {j}) for {len(masks)} parts")
    a, b = masks[i], masks[j]
    cross = sum(popcount(G.adj[v] & b) for v in bits(a))
    _, vol_a, _ = set_stats(G, a)
    _, vol_b, _ = set_stats(G, b)
    return ScaledScore(4 * G.m * cross - 2 * vol_a * vol_b, G.m)


def strip_isolated(G: Graph) -> tuple:
    """Drop isolated vertices.

    Returns ``(H, removed)`` where ``removed`` is the frozenset of dropped
    vertex indices of ``G``; vertex ``i`` of ``H`` is the ``i``-th surviving
    vertex of ``G`` in index order and keeps its label.
    """
    removed = frozenset(v for v in range(G.n) if G.deg[v] == 0)
    H, _ = induced_subgraph(G, G.all_mask & ~to_mask(removed))
    return H, removed


def connected_components(G: Graph, within: int | None = None) -> list:
    """Connected components as masks (of ``G[within]`` when given)."""
    rest = G.all_mask if within is None else within
    comps = []
    while rest:
        seed = rest & -rest
        comp = seed
        frontier = seed
        while frontier:
            nxt = 0
            for v in bits(frontier):
                nxt |= G.adj[v]
            nxt &= rest & ~comp
            comp |= nxt
            frontier = nxt
        comps.append(comp)
        rest &= ~comp
    return comps


def is_connected(G: Graph, mask: int) -> bool:
    if mask == 0:
        return False
    return len(connected_components(G, mask)) == 1


def tw_degree_lower_bound(G: Graph, width: int) -> float:
    """Advisory lower bound ``max(0, 1 - 2 sqrt((width+1) * maxdeg / m))`` on q*."""
    _require_edges(G)
    return max(0.0, 1.0 - 2.0 * math.sqrt((width + 1) * G.max_degree / G.m))


# ---------------------------------------------------------------------------
# solver results

@dataclass
class Solution:
    """Optimum reported by a solver: exact score, argmax partition, counters."""

    q: ScaledScore
    partition: tuple
    method: str = ""
    stats: dict = field(default_factory=dict)


def solve_via_stripped(G: Graph, core, method: str) -> Solution:
    """Run ``core`` on ``G`` minus isolated vertices and lift the answer back.

    ``core(H)`` must return ``(num, masks, stats)`` for an edge-bearing graph
    with no isolated vertices.  Isolated vertices come back as singletons.
    The lifted partition is rescored and must reproduce ``num``.
    """
    if G.m == 0:
        return Solution(ScaledScore(1, 0), canonical_partition(1 << v for v in range(G.n)), method)
    H, removed = strip_isolated(G)
    keep = [v for v in range(G.n) if v not in removed]
    num, masks, stats = core(H)
    lifted = []
    for p in masks:
        lifted.append(sum(1 << keep[v] for v in bits(p)))
    lifted.extend(1 << v for v in sorted(removed))
    check = score_masks(G, lifted)
    if check != num:
        raise AssertionError(f"{method}: reconstructed partition scores {check}, solver reported {num}")
    return Solution(ScaledScore(num, G.m), canonical_partition(lifted), method, stats)

"""q* from the list of connected induced subgraphs.

Every connected induced subgraph ``H`` gets the best total contribution of a
partition of ``V(H)`` into connected parts; it is either ``H`` as one part or
the sum over a split ``(X, Y)`` of ``V(H)`` into two connected halves, both of
which are earlier (smaller) entries of the list.  The answer is the sum over
the connected components of ``G``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .graph import BudgetExceeded, Graph, Solution, bits, connected_components, set_stats, solve_via_stripped

DEFAULT_SUBGRAPH_CAP = 2_000_000


@dataclass
class SubgraphIndex:
    """Connected induced subgraphs (as masks) in non-decreasing size order."""

    subgraphs: list
    position: dict = field(default_factory=dict)
    best: list = field(default_factory=list)
    split: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.subgraphs)

    def __contains__(self, mask: int) -> bool:
        return mask in self.position


def _search_from(G: Graph, v: int, allowed: int, out: list, cap: int) -> None:
    """Search tree over pairs (U, W): pick x in W adjacent to U, branch on x in / out.

    Every connected set containing ``v`` inside ``allowed`` is emitted once,
    at the leaf where no candidate remains.
    """
    adj = G.adj
    stack = [(1 << v, allowed & ~(1 << v))]
    while stack:
        U, W = stack.pop()
        frontier = 0
        for u in bits(U):
            frontier |= adj[u]
        cand = frontier & W
        if not cand:
            out.append(U)
            if len(out) > cap:
                raise BudgetExceeded("connected subgraphs", cap, len(out))
            continue
        x = cand & -cand
        stack.append((U, W & ~x))
        stack.append((U | x, W & ~x))


def enumerate_connected_subgraphs(G: Graph, cap: int = DEFAULT_SUBGRAPH_CAP) -> SubgraphIndex:
    """List every connected induced subgraph of ``G`` exactly once.

    Start vertices are processed in index order and removed once used, so each
    set is found from its smallest vertex only.
    """
    found: list = []
    allowed = G.all_mask
    for v in range(G.n):
        _search_from(G, v, allowed, found, cap)
        allowed &= ~(1 << v)
    found.sort(key=lambda s: (s.bit_count(), s))
    return SubgraphIndex(found, {s: i for i, s in enumerate(found)})


def count_connected_subgraphs(G: Graph, cap: int = DEFAULT_SUBGRAPH_CAP) -> int:
    return len(enumerate_connected_subgraphs(G, cap))


def _splits(index: SubgraphIndex, j: int):
    """Valid splits ``(X, Y)`` of entry ``j``; ``X`` holds the lowest vertex."""
    H = index.subgraphs[j]
    low = H & -H
    size = H.bit_count()
    pos = index.position
    # scan whichever is shorter: submasks of H, or the earlier list entries
    if (1 << (size - 1)) <= j:
        rest = H ^ low
        sub = rest
        while True:
            X = sub | low
            if X != H:
                Y = H ^ X
                if X in pos and Y in pos:
                    yield X, Y
            if sub == 0:
                break
            sub = (sub - 1) & rest
    else:
        for i in range(j):
            X = index.subgraphs[i]
            if X & low and X & H == X and X != H:
                Y = H ^ X
                if Y in pos:
                    yield X, Y


def evaluate(G: Graph, index: SubgraphIndex) -> None:
    """Fill ``index.best`` and ``index.split`` with the split recurrence (scale 4m^2)."""
    m4 = 4 * G.m
    best = index.best = [0] * len(index)
    split = index.split = [None] * len(index)
    pos = index.position
    for j, H in enumerate(index.subgraphs):
        e, vol, _ = set_stats(G, H)
        value = m4 * e - vol * vol
        arg = None
        for X, Y in _splits(index, j):
            v = best[pos[X]] + best[pos[Y]]
            if v > value:
                value, arg = v, (X, Y)
        best[j] = value
        split[j] = arg


def expand(index: SubgraphIndex, H: int) -> list:
    """Parts of the optimal partition recorded for entry ``H``."""
    out = []
    stack = [H]
    while stack:
        S = stack.pop()
        sp = index.split[index.position[S]]
        if sp is None:
            out.append(S)
        else:
            stack.extend(sp)
    return out


def solve(G: Graph, cap: int = DEFAULT_SUBGRAPH_CAP) -> Solution:
    """Exact q* as the sum of the per-component recurrence values."""

    def core(H: Graph):
        index = enumerate_connected_subgraphs(H, cap)
        evaluate(H, index)
        total = 0
        masks = []
        for comp in connected_components(H):
            total += index.best[index.position[comp]]
            masks.extend(expand(index, comp))
        return total, masks, {"subgraphs": len(index)}

    return solve_via_stripped(G, core, "connsub")

"""Exhaustive ground truth for q* and q_{<=c}.

Partitions are enumerated as restricted growth strings (RGS): ``a[0] = 0`` and
``a[i] <= 1 + max(a[:i])``.  Maximizers are reported with ties broken toward
the lexicographically smallest RGS, so the argmax is deterministic.
``brute_force`` searches the graph without its isolated vertices and returns
those as singletons.
"""

from __future__ import annotations

from typing import Iterator

from .graph import (
    BudgetExceeded,
    Graph,
    ScaledScore,
    Solution,
    bits,
    canonical_partition,
    set_stats,
    solve_via_stripped,
)

UNRESTRICTED_CAP = 12
RESTRICTED_CAP = 14

NONE = "none"
CONNECTED = "connected-no-singleton"


def iter_rgs(n: int) -> Iterator[tuple]:
    """Yield every restricted growth string of length ``n`` in lex order."""
    if n <= 0:
        raise ValueError("n must be >= 1")
    a = [0] * n

    def rec(i: int, top: int):
        if i == n:
            yield tuple(a)
            return
        for b in range(top + 2):
            a[i] = b
            yield from rec(i + 1, max(top, b))

    a[0] = 0
    yield from rec(1, 0)


def rgs_to_masks(rgs) -> list:
    masks: list = []
    for v, b in enumerate(rgs):
        if b == len(masks):
            masks.append(0)
        masks[b] |= 1 << v
    return masks


def masks_to_rgs(masks, n: int) -> tuple:
    """RGS of a partition given as masks (blocks numbered by first vertex)."""
    owner = [-1] * n
    for k, p in enumerate(masks):
        for v in bits(p):
            owner[v] = k
    relabel: dict = {}
    out = []
    for v in range(n):
        out.append(relabel.setdefault(owner[v], len(relabel)))
    return tuple(out)


def iter_partitions(n: int, cap: int = UNRESTRICTED_CAP) -> Iterator[tuple]:
    """Yield each set partition of ``{0..n-1}`` once (Bell(n) in total)."""
    if n > cap:
        raise BudgetExceeded(f"partition enumeration (n={n})", cap)
    for rgs in iter_rgs(n):
        yield canonical_partition(rgs_to_masks(rgs))


def _search_rgs(G: Graph, max_parts: int, prune: bool):
    """Depth-first RGS search for the best partition with at most ``max_parts`` parts.

    The bound adds ``4m`` per still-undecided edge to the running score; the
    degree tax only grows, so it is a valid upper bound.  Pruning on ``<=``
    keeps the lexicographically first maximizer because later strings only
    replace the incumbent when strictly better.
    """
    n = G.n
    m4 = 4 * G.m
    adj = G.adj
    deg = G.deg
    # edges whose larger endpoint is >= i
    rem = [0] * (n + 1)
    for u, v in G.edges:
        rem[v] += 1
    for i in range(n - 1, -1, -1):
        rem[i] += rem[i + 1]
    masks = [0] * n
    vols = [0] * n
    rgs = [0] * n
    best = [None, None]
    visited = [0]

    def rec(i: int, nb: int, cur: int):
        visited[0] += 1
        if i == n:
            if best[0] is None or cur > best[0]:
                best[0] = cur
                best[1] = tuple(rgs)
            return
        if prune and best[0] is not None and cur + m4 * rem[i] <= best[0]:
            return
        dv = deg[i]
        av = adj[i]
        bit = 1 << i
        for b in range(nb):
            vb = vols[b]
            gain = m4 * (av & masks[b]).bit_count() - dv * (2 * vb + dv)
            masks[b] |= bit
            vols[b] = vb + dv
            rgs[i] = b
            rec(i + 1, nb, cur + gain)
            masks[b] ^= bit
            vols[b] = vb
        if nb < max_parts:
            masks[nb] = bit
            vols[nb] = dv
            rgs[i] = nb
            rec(i + 1, nb + 1, cur - dv * dv)
            masks[nb] = 0
            vols[nb] = 0

    rec(0, 0, 0)
    return best[0], best[1], visited[0]


def _connected_sets(G: Graph, v: int, allowed: int) -> Iterator[int]:
    """All vertex sets containing ``v``, inside ``allowed``, inducing a connected graph."""
    start = 1 << v
    seen = {start}
    stack = [start]
    while stack:
        cur = stack.pop()
        yield cur
        frontier = 0
        for u in bits(cur):
            frontier |= G.adj[u]
        frontier &= allowed & ~cur
        for u in bits(frontier):
            nxt = cur | (1 << u)
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)


def _search_connected(G: Graph):
    """Search over partitions into connected parts with no non-isolated singleton."""
    n = G.n
    m4 = 4 * G.m
    value: dict = {}

    def part_value(p: int) -> int:
        if p not in value:
            e, vol, _ = set_stats(G, p)
            value[p] = m4 * e - vol * vol
        return value[p]

    def internal_edges(mask: int) -> int:
        return sum((G.adj[u] & mask).bit_count() for u in bits(mask)) // 2

    best = [None, None]
    chosen: list = []
    visited = [0]

    def rec(rest: int, cur: int):
        visited[0] += 1
        if rest == 0:
            rgs = masks_to_rgs(chosen, n)
            if best[0] is None or cur > best[0] or (cur == best[0] and rgs < best[1]):
                best[0] = cur
                best[1] = rgs
            return
        if best[0] is not None and cur + m4 * internal_edges(rest) < best[0]:
            return
        v = (rest & -rest).bit_length() - 1
        isolated = G.deg[v] == 0
        for p in _connected_sets(G, v, rest):
            if not isolated and p == 1 << v:
                continue
            chosen.append(p)
            rec(rest & ~p, cur + part_value(p))
            chosen.pop()

    rec(G.all_mask, 0)
    return best[0], best[1], visited[0]


def _edgeless(G: Graph, method: str) -> Solution:
    return Solution(ScaledScore(1, 0), canonical_partition(1 << v for v in range(G.n)), method)


def brute_force(G: Graph, restrict: str = NONE, cap: int | None = None, prune: bool = True) -> Solution:
    """Exact q* by exhaustive search.

    ``restrict=CONNECTED`` only visits partitions whose parts induce connected
    subgraphs and contain no singleton non-isolated vertex.  Both modes must
    agree on q*.  ``prune=False`` disables the bound in the unrestricted mode.
    """
    if restrict not in (NONE, CONNECTED):
        raise ValueError(f"unknown restriction {restrict!r}")
    if G.n == 0:
        raise ValueError("empty graph")
    limit = cap if cap is not None else (UNRESTRICTED_CAP if restrict == NONE else RESTRICTED_CAP)
    active = sum(1 for d in G.deg if d)
    if active > limit:
        raise BudgetExceeded(f"brute force ({active} non-isolated vertices)", limit)
    if G.m == 0:
        return _edgeless(G, "brute")

    def core(H: Graph):
        if restrict == NONE:
            num, rgs, visited = _search_rgs(H, H.n, prune)
        else:
            num, rgs, visited = _search_connected(H)
        return num, rgs_to_masks(rgs), {"restrict": restrict, "nodes": visited, "rgs": rgs}

    return solve_via_stripped(G, core, "brute")


def brute_force_bounded(G: Graph, c: int, cap: int | None = None, prune: bool = True) -> Solution:
    """Exact q_{<=c}: best modularity over partitions with at most ``c`` parts."""
    if c < 1:
        raise ValueError("c must be >= 1")
    if G.n == 0:
        raise ValueError("empty graph")
    limit = cap if cap is not None else UNRESTRICTED_CAP
    if G.n > limit:
        raise BudgetExceeded(f"brute force (n={G.n})", limit)
    if G.m == 0:
        return _edgeless(G, "brute-bounded")
    num, rgs, visited = _search_rgs(G, c, prune)
    part = canonical_partition(rgs_to_masks(rgs))
    return Solution(ScaledScore(num, G.m), part, "brute-bounded", {"c": c, "nodes": visited, "rgs": rgs})

"""Dynamic programs over nice tree decompositions.

``solve_exact`` computes q* with liquid-part states (bag partition plus the
edges captured and volume so far of each part touching the bag); parts that
leave the bag are frozen into a running score.  ``solve_bounded`` computes
q_{<=c}: every one of the (at most ``c``) parts keeps its statistics until the
root, because parts of an optimal bounded partition need not be connected.

A state is a sorted tuple of entries ``(mask, alpha, beta)``: ``mask`` is the
part restricted to the current bag (0 for a bounded-DP part with no bag
vertex), ``alpha`` its internal edge count so far, ``beta`` its volume so far.
Scores are integers at scale ``4 m**2``; a part with statistics ``(a, b)``
contributes ``4 m a - b**2``.

Each table maps a state to its value and keeps, per state, one back-pointer
``((child_state, index_map), ...)`` where ``index_map[i]`` is the entry of the
child state that entry ``i`` of this state continues (-1 if none).
"""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass, field

from .graph import (
    BudgetExceeded,
    Graph,
    Solution,
    bits,
    canonical_partition,
    set_stats,
    solve_via_stripped,
    to_mask,
)
from .treedecomp import (
    FORGET,
    INTRODUCE,
    JOIN,
    LEAF,
    NiceTreeDecomposition,
    TreeDecomposition,
    contract_subset_bags,
    make_nice,
    nice_decomposition,
    validate,
)

DEFAULT_STATE_BUDGET = 50_000_000


@dataclass
class DPRun:
    nice: NiceTreeDecomposition
    values: list = field(default_factory=list)  # node -> {state: value}
    backs: list = field(default_factory=list)  # node -> {state: back-pointer}
    total_states: int = 0
    peak_states: int = 0


def _sorted_with_map(entries: list, origin: list) -> tuple:
    order = sorted(range(len(entries)), key=entries.__getitem__)
    return tuple(entries[i] for i in order), tuple(origin[i] for i in order)


class _Stats:
    """Cached e(P) and vol(P) of bag parts."""

    def __init__(self, G: Graph):
        self.G = G
        self.cache: dict = {}

    def __call__(self, mask: int) -> tuple:
        got = self.cache.get(mask)
        if got is None:
            e, vol, _ = set_stats(self.G, mask)
            got = self.cache[mask] = (e, vol)
        return got


def bag_partitions(bag: int, max_parts: int | None = None):
    """Yield the partitions of the vertex mask ``bag`` as lists of masks."""
    vs = list(bits(bag))
    parts: list = []

    def rec(i):
        if i == len(vs):
            yield list(parts)
            return
        bit = 1 << vs[i]
        for j in range(len(parts)):
            parts[j] |= bit
            yield from rec(i + 1)
            parts[j] ^= bit
        if max_parts is None or len(parts) < max_parts:
            parts.append(bit)
            yield from rec(i + 1)
            parts.pop()

    yield from rec(0)


# ---------------------------------------------------------------------------
# exact DP node rules

def dp_leaf(G: Graph, bag: int, max_parts: int | None = None) -> tuple:
    """Leaf table: every partition of the bag with alpha=e(P), beta=vol(P), value 0."""
    stats = _Stats(G)
    values, backs = {}, {}
    for parts in bag_partitions(bag, max_parts):
        key = tuple(sorted((p,) + stats(p) for p in parts))
        values[key] = 0
        backs[key] = ()
    return values, backs


def dp_introduce(G: Graph, v: int, child: dict, bounded_c: int | None = None) -> tuple:
    """Add ``v`` to an existing part or open a new part ``{v}``.

    With ``bounded_c`` set, a new part is only opened while fewer than ``c``
    parts exist, and ``v`` may also join a part with no bag vertex.
    """
    dv = G.deg[v]
    av = G.adj[v]
    bit = 1 << v
    values, backs = {}, {}
    for ck, val in child.items():
        n = len(ck)
        origin = list(range(n))
        options = []
        for i, (mask, a, b) in enumerate(ck):
            if mask == 0 and bounded_c is None:
                continue
            entries = list(ck)
            entries[i] = (mask | bit, a + (av & mask).bit_count(), b + dv)
            options.append(_sorted_with_map(entries, origin))
        if bounded_c is None or n < bounded_c:
            options.append(_sorted_with_map(list(ck) + [(bit, 0, dv)], origin + [-1]))
        for key, imap in options:
            old = values.get(key)
            if old is None or val > old:
                values[key] = val
                backs[key] = ((ck, imap),)
    return values, backs


def dp_forget(G: Graph, v: int, child: dict, m: int, bounded: bool = False) -> tuple:
    """Remove ``v`` from its part; in the exact DP a part left empty is frozen.

    Freezing adds ``4m*alpha - beta**2`` to the value.  In the bounded DP parts
    are never frozen; the entry just loses its bag vertex.
    """
    bit = 1 << v
    m4 = 4 * m
    values, backs = {}, {}
    for ck, val in child.items():
        n = len(ck)
        i = next(j for j in range(n) if ck[j][0] & bit)
        mask, a, b = ck[i]
        if mask == bit and not bounded:
            entries = list(ck[:i] + ck[i + 1:])
            origin = [j for j in range(n) if j != i]
            nv = val + m4 * a - b * b
        else:
            entries = list(ck)
            entries[i] = (mask ^ bit, a, b)
            origin = list(range(n))
            nv = val
        key, imap = _sorted_with_map(entries, origin)
        old = values.get(key)
        if old is None or nv > old:
            values[key] = nv
            backs[key] = ((ck, imap),)
    return values, backs


def dp_join(G: Graph, left: dict, right: dict, bounded_c: int | None = None) -> tuple:
    """Combine states with the same bag partition.

    Bag parts add up as ``alpha1 + alpha2 - e(P)`` and ``beta1 + beta2 - vol(P)``.
    In the bounded DP the bag-free parts of the two sides are additionally
    paired up in every way that keeps the total part count at most ``c``.
    """
    stats = _Stats(G)
    by_shape: dict = {}
    for rk, rv in right.items():
        shape = tuple(e[0] for e in rk if e[0])
        by_shape.setdefault(shape, []).append((rk, rv))
    values, backs = {}, {}
    for lk, lv in left.items():
        shape = tuple(e[0] for e in lk if e[0])
        partners = by_shape.get(shape)
        if not partners:
            continue
        l_bag = [i for i, e in enumerate(lk) if e[0]]
        l_free = [i for i, e in enumerate(lk) if not e[0]]
        for rk, rv in partners:
            r_bag = [i for i, e in enumerate(rk) if e[0]]
            r_free = [i for i, e in enumerate(rk) if not e[0]]
            base = []
            lo, ro = [], []
            for i, j in zip(l_bag, r_bag):
                mask, a1, b1 = lk[i]
                _, a2, b2 = rk[j]
                e, vol = stats(mask)
                base.append((mask, a1 + a2 - e, b1 + b2 - vol))
                lo.append(i)
                ro.append(j)
            val = lv + rv
            if bounded_c is None:
                key, order = _sorted_with_map(base, list(range(len(base))))
                lmap = tuple(lo[k] for k in order)
                rmap = tuple(ro[k] for k in order)
                _offer(values, backs, key, val, ((lk, lmap), (rk, rmap)))
                continue
            for extra, lx, rx in _free_pairings(lk, rk, l_free, r_free, bounded_c - len(base)):
                entries = base + extra
                key, order = _sorted_with_map(entries, list(range(len(entries))))
                lfull = lo + lx
                rfull = ro + rx
                lmap = tuple(lfull[k] for k in order)
                rmap = tuple(rfull[k] for k in order)
                _offer(values, backs, key, val, ((lk, lmap), (rk, rmap)))
    return values, backs


def _offer(values, backs, key, val, back):
    old = values.get(key)
    if old is None or val > old:
        values[key] = val
        backs[key] = back


def _free_pairings(lk, rk, l_free, r_free, room):
    """Ways to merge bag-free parts of the two sides using at most ``room`` parts.

    Yields ``(entries, left_origin, right_origin)``; pairings that produce the
    same multiset of entries are reported once.
    """
    nl, nr = len(l_free), len(r_free)
    if nl + nr - min(nl, nr) > room:
        return
    seen = set()
    used = [False] * nr
    choice = [None] * nl

    def rec(i, merged):
        if i == nl:
            if nl + nr - merged > room:
                return
            entries, lx, rx = [], [], []
            for li in range(nl):
                _, a1, b1 = lk[l_free[li]]
                ri = choice[li]
                if ri is None:
                    entries.append((0, a1, b1))
                    rx.append(-1)
                else:
                    _, a2, b2 = rk[r_free[ri]]
                    entries.append((0, a1 + a2, b1 + b2))
                    rx.append(r_free[ri])
                lx.append(l_free[li])
            for ri in range(nr):
                if not used[ri]:
                    entries.append(rk[r_free[ri]])
                    lx.append(-1)
                    rx.append(r_free[ri])
            sig = tuple(sorted(entries))
            if sig not in seen:
                seen.add(sig)
                yield entries, lx, rx
            return
        # merges still possible cannot reach the minimum needed
        if nl + nr - (merged + min(nl - i, nr - merged)) > room:
            return
        choice[i] = None
        yield from rec(i + 1, merged)
        for ri in range(nr):
            if not used[ri]:
                used[ri] = True
                choice[i] = ri
                yield from rec(i + 1, merged + 1)
                used[ri] = False
        choice[i] = None

    yield from rec(0, 0)


# ---------------------------------------------------------------------------
# driver

def run_dp(G: Graph, nice: NiceTreeDecomposition, bounded_c: int | None = None,
           budget: int = DEFAULT_STATE_BUDGET) -> DPRun:
    """Fill every table bottom-up; raises :class:`BudgetExceeded` on blow-up."""
    run = DPRun(nice, [None] * len(nice), [None] * len(nice))
    bounded = bounded_c is not None
    for t in nice.postorder():
        kind = nice.kinds[t]
        ch = nice.children[t]
        if kind == LEAF:
            vals, backs = dp_leaf(G, nice.bags[t], bounded_c)
        elif kind == INTRODUCE:
            vals, backs = dp_introduce(G, nice.vertex[t], run.values[ch[0]], bounded_c)
        elif kind == FORGET:
            vals, backs = dp_forget(G, nice.vertex[t], run.values[ch[0]], G.m, bounded)
        elif kind == JOIN:
            vals, backs = dp_join(G, run.values[ch[0]], run.values[ch[1]], bounded_c)
        else:
            raise ValueError(f"unknown node kind {kind!r}")
        run.values[t] = vals
        run.backs[t] = backs
        run.total_states += len(vals)
        run.peak_states = max(run.peak_states, len(vals))
        if run.total_states > budget:
            raise BudgetExceeded("DP states", budget, run.total_states)
    return run


def root_value(m: int, key: tuple, val: int) -> int:
    m4 = 4 * m
    return val + sum(m4 * a - b * b for _, a, b in key)


def best_root_state(run: DPRun, m: int) -> tuple:
    """Highest-scoring root state; first in sorted state order on ties."""
    table = run.values[run.nice.root]
    best_key, best = None, None
    for key in sorted(table):
        total = root_value(m, key, table[key])
        if best is None or total > best:
            best_key, best = key, total
    return best_key, best


def reconstruct(run: DPRun, key: tuple) -> list:
    """Recover the partition behind root state ``key`` as a list of masks."""
    nice = run.nice
    parts: dict = {}
    counter = [0]

    def fresh():
        counter[0] += 1
        return counter[0] - 1

    stack = [(nice.root, key, [fresh() for _ in key])]
    while stack:
        t, k, labels = stack.pop()
        for (mask, _, _), lab in zip(k, labels):
            parts[lab] = parts.get(lab, 0) | mask
        back = run.backs[t][k]
        for c, (ck, imap) in zip(nice.children[t], back):
            clabels = [None] * len(ck)
            for i, j in enumerate(imap):
                if j >= 0:
                    clabels[j] = labels[i]
            clabels = [lab if lab is not None else fresh() for lab in clabels]
            stack.append((c, ck, clabels))
    return [p for p in parts.values() if p]


# ---------------------------------------------------------------------------
# public solvers

def _nice_for(H: Graph, G: Graph, td, heuristic: str, seed):
    """Nice decomposition of the stripped graph ``H`` from whatever ``td`` the caller gave."""
    if td is None:
        return nice_decomposition(H, None, heuristic, seed)
    if isinstance(td, NiceTreeDecomposition):
        if H.n == G.n:
            problems = validate(H, td.to_td()) + td.check_nice()
            if problems:
                raise ValueError("invalid nice tree decomposition: " + "; ".join(problems))
            return td
        td = td.to_td()
    problems = validate(G, td)
    if problems:
        raise ValueError("invalid tree decomposition: " + "; ".join(problems))
    if H.n == G.n:
        return make_nice(td)
    return make_nice(restrict_td(td, G, H))


def restrict_td(td: TreeDecomposition, G: Graph, H: Graph) -> TreeDecomposition:
    """Project a decomposition of ``G`` onto its subgraph ``H`` (matched by label).

    Nodes whose bag becomes empty are spliced out; their neighbours are
    re-attached to one of them, which keeps every vertex's subtree connected.
    """
    new_of_old = {G.index_of(lab): i for i, lab in enumerate(H.labels)}
    bags = [frozenset(new_of_old[v] for v in b if v in new_of_old) for b in td.bags]
    nb = [set(x) for x in td.neighbors()]
    alive = set(range(len(bags)))
    for t in range(len(bags)):
        if bags[t] or len(alive) == 1:
            continue
        ns = sorted(nb[t])
        alive.discard(t)
        for x in ns:
            nb[x].discard(t)
        if ns:
            hub = ns[0]
            for x in ns[1:]:
                nb[x].add(hub)
                nb[hub].add(x)
        nb[t] = set()
    keep = sorted(alive)
    idx = {t: i for i, t in enumerate(keep)}
    edges = sorted({(min(idx[a], idx[b]), max(idx[a], idx[b])) for a in keep for b in nb[a]})
    return contract_subset_bags(TreeDecomposition([bags[t] for t in keep], edges, 0, H.n))


def solve_exact(G: Graph, td=None, heuristic: str = "min-fill", seed: int | None = None,
                budget: int = DEFAULT_STATE_BUDGET) -> Solution:
    """Exact q* by the liquid/frozen tree-decomposition DP.

    ``td`` may be a :class:`TreeDecomposition` or :class:`NiceTreeDecomposition`
    of ``G``; without one, a decomposition is built with ``heuristic``.
    """

    def core(H: Graph):
        nice = _nice_for(H, G, td, heuristic, seed)
        run = run_dp(H, nice, None, budget)
        key, best = best_root_state(run, H.m)
        masks = reconstruct(run, key)
        return best, masks, {"width": nice.width, "nodes": len(nice), "states": run.total_states,
                             "peak_states": run.peak_states}

    return solve_via_stripped(G, core, "tw")


def solve_bounded(G: Graph, c: int, td=None, heuristic: str = "min-fill", seed: int | None = None,
                  budget: int = DEFAULT_STATE_BUDGET) -> Solution:
    """Exact q_{<=c}: the best modularity over partitions with at most ``c`` parts.

    Isolated vertices are stripped first and then returned as singletons, so
    they are merged into part 1 instead whenever that keeps the count within ``c``.
    """
    if c < 1:
        raise ValueError("c must be >= 1")

    def core(H: Graph):
        nice = _nice_for(H, G, td, heuristic, seed)
        run = run_dp(H, nice, c, budget)
        key, best = best_root_state(run, H.m)
        masks = reconstruct(run, key)
        return best, masks, {"width": nice.width, "nodes": len(nice), "states": run.total_states,
                             "peak_states": run.peak_states, "c": c}

    sol = solve_via_stripped(G, core, "tw-bounded")
    if len(sol.partition) > c:
        sol.partition = _absorb_isolated(G, sol.partition, c)
    return sol


def _absorb_isolated(G: Graph, partition: tuple, c: int) -> tuple:
    """Fold isolated singletons into another part until at most ``c`` parts remain."""
    masks = [to_mask(p) for p in partition]
    iso = [p for p in masks if p.bit_count() == 1 and G.deg[p.bit_length() - 1] == 0]
    rest = [p for p in masks if p not in iso]
    if not rest:
        rest = [iso.pop(0)]
    while len(rest) + len(iso) > c:
        rest[0] |= iso.pop()
    return canonical_partition(rest + iso)


def approximate(G: Graph, epsilon: float, td=None, heuristic: str = "min-fill", seed: int | None = None,
                budget: int = DEFAULT_STATE_BUDGET) -> Solution:
    """Partition within a factor ``1 - epsilon`` of q*, via q_{<=c} with ``c = ceil(1/epsilon)``."""
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    c = parts_for_epsilon(epsilon)
    sol = solve_bounded(G, c, td, heuristic, seed, budget)
    sol.method = "tw-approx"
    sol.stats["epsilon"] = epsilon
    return sol


def parts_for_epsilon(epsilon) -> int:
    """``ceil(1/epsilon)``, exact for Fraction and decimal-string-like inputs."""
    eps = Fraction(str(epsilon)) if isinstance(epsilon, float) else Fraction(epsilon)
    return math.ceil(1 / eps)

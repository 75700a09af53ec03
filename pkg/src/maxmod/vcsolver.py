"""Exact q* parameterised by a minimum vertex cover.

With a vertex cover ``U = (u_1..u_k)`` the remaining vertices form an
independent set and fall into at most ``2**k`` types by neighbourhood.  For a
fixed partition ``P_1..P_l`` of ``U``, the modularity of any partition that
extends it (every part meeting ``U``) depends only on the counts
``x[sigma, i]`` of type-``sigma`` vertices placed with ``P_i``:

    e(A_i)   = e(P_i)   + sum_sigma x[sigma, i] * |sigma & pi_i|
    vol(A_i) = vol(P_i) + sum_sigma x[sigma, i] * |sigma|

where ``pi_i`` is the bit vector of ``P_i`` and ``vol`` is taken in ``G``.
Types are ints with bit ``j`` set when the vertex is adjacent to ``u_j``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

from .graph import BudgetExceeded, Graph, Solution, bits, set_stats, solve_via_stripped

DEFAULT_COVER_CAP = 10
DEFAULT_SEARCH_BUDGET = 20_000_000


class NotACoverError(ValueError):
    pass


# ---------------------------------------------------------------------------
# vertex cover

def min_vertex_cover(G: Graph, limit: int | None = None) -> frozenset | None:
    """Minimum vertex cover by branching on a max-degree vertex (take it or all its neighbours).

    With ``limit`` set, returns ``None`` as soon as it is clear that every
    cover is larger than ``limit``.
    """
    adj = G.adj
    best = [None]
    bound = [limit + 1 if limit is not None else G.n + 1]

    def rec(alive: int, chosen: int, size: int):
        if size >= bound[0]:
            return
        v_best, d_best, edges2 = -1, 0, 0
        for v in bits(alive):
            d = (adj[v] & alive).bit_count()
            edges2 += d
            if d > d_best:
                v_best, d_best = v, d
        if d_best == 0:
            bound[0] = size
            best[0] = chosen
            return
        # each further cover vertex removes at most d_best edges
        if size + -(-(edges2 // 2) // d_best) >= bound[0]:
            return
        if d_best == 1:
            # a matching: one endpoint per edge
            extra = 0
            cover = chosen
            rest = alive
            for v in bits(alive):
                if rest >> v & 1 and adj[v] & rest:
                    cover |= 1 << v
                    rest &= ~(1 << v) & ~adj[v]
                    extra += 1
            if size + extra < bound[0]:
                bound[0] = size + extra
                best[0] = cover
            return
        v = v_best
        nv = adj[v] & alive
        rec(alive & ~(1 << v), chosen | (1 << v), size + 1)
        rec(alive & ~nv & ~(1 << v), chosen | nv, size + nv.bit_count())

    rec(G.all_mask, 0, 0)
    if best[0] is None:
        return None
    return frozenset(bits(best[0]))


def is_vertex_cover(G: Graph, U) -> bool:
    U = set(U)
    return all(u in U or v in U for u, v in G.edges)


# ---------------------------------------------------------------------------
# types and counts

@dataclass
class CoverInstance:
    """A vertex cover with the type classes of the independent remainder."""

    G: Graph
    cover: tuple  # u_1..u_k as vertex indices
    type_of: dict  # w -> type
    members: dict  # type -> list of w (ascending)

    @property
    def k(self) -> int:
        return len(self.cover)

    @property
    def counts(self) -> dict:
        return {s: len(ws) for s, ws in self.members.items()}


def classify_types(G: Graph, U) -> CoverInstance:
    cover = tuple(sorted(U))
    if not is_vertex_cover(G, cover):
        raise NotACoverError("U is not a vertex cover")
    pos = {u: j for j, u in enumerate(cover)}
    type_of = {}
    members: dict = {}
    for w in range(G.n):
        if w in pos:
            continue
        sigma = 0
        for u in bits(G.adj[w]):
            sigma |= 1 << pos[u]
        type_of[w] = sigma
        members.setdefault(sigma, []).append(w)
    return CoverInstance(G, cover, type_of, dict(sorted(members.items())))


@dataclass
class CoverPartition:
    """Partition of the cover; ``pi[i]`` is the k-bit indicator of part ``i``."""

    pi: tuple
    masks: tuple  # the same parts as vertex masks of G
    e: tuple
    vol: tuple

    def __len__(self) -> int:
        return len(self.pi)


def cover_partition(inst: CoverInstance, parts) -> CoverPartition:
    """Build a :class:`CoverPartition` from parts given as sets of cover positions."""
    pis, masks, es, vols = [], [], [], []
    for part in parts:
        pi = 0
        mask = 0
        for j in part:
            pi |= 1 << j
            mask |= 1 << inst.cover[j]
        if not pi:
            raise ValueError("cover partition has an empty part")
        e, vol, _ = set_stats(inst.G, mask)
        pis.append(pi)
        masks.append(mask)
        es.append(e)
        vols.append(vol)
    covered = 0
    for pi in pis:
        if covered & pi:
            raise ValueError("cover partition parts overlap")
        covered |= pi
    if covered != (1 << inst.k) - 1:
        raise ValueError("cover partition does not cover U")
    return CoverPartition(tuple(pis), tuple(masks), tuple(es), tuple(vols))


def check_counts(inst: CoverInstance, cp: CoverPartition, x: dict) -> None:
    """Transportation constraints: x >= 0 and each type fully distributed."""
    totals: dict = {}
    for (sigma, i), cnt in x.items():
        if cnt < 0:
            raise ValueError(f"negative count x[{sigma}, {i}]")
        if not 0 <= i < len(cp):
            raise ValueError(f"part index {i} out of range")
        if sigma not in inst.members and cnt:
            raise ValueError(f"no vertices of type {sigma:b}")
        totals[sigma] = totals.get(sigma, 0) + cnt
    for sigma, ws in inst.members.items():
        if totals.get(sigma, 0) != len(ws):
            raise ValueError(f"type {sigma:b}: assigned {totals.get(sigma, 0)} of {len(ws)}")


@dataclass
class ObjectiveTerms:
    """Scaled objective split into a constant, linear and quadratic parts.

    ``num = constant + 4m*theta - 2*phi - psi`` with ``phi = sum_i vol(P_i) L_i``
    and ``psi = sum_i L_i**2`` where ``L_i`` is the type volume added to part i.
    ``phi_cover`` is the edge-weighted linear form ``sum x e(P_i) |sigma & (1 + pi_i)|``
    kept for its range bound.
    """

    constant: int
    theta: int
    phi: int
    psi: int
    phi_cover: int
    num: int = field(init=False)
    m: int = 0

    def __post_init__(self):
        self.num = self.constant + 4 * self.m * self.theta - 2 * self.phi - self.psi


def objective_terms(inst: CoverInstance, cp: CoverPartition, x: dict) -> ObjectiveTerms:
    m = inst.G.m
    ell = len(cp)
    theta = 0
    phi_cover = 0
    L = [0] * ell
    for (sigma, i), cnt in x.items():
        if not cnt:
            continue
        theta += cnt * (sigma & cp.pi[i]).bit_count()
        L[i] += cnt * sigma.bit_count()
        # |sigma . (1 + pi_i)| counts neighbours in U plus neighbours in P_i
        phi_cover += cnt * cp.e[i] * (sigma.bit_count() + (sigma & cp.pi[i]).bit_count())
    constant = sum(4 * m * e - v * v for e, v in zip(cp.e, cp.vol))
    phi = sum(v * l for v, l in zip(cp.vol, L))
    psi = sum(l * l for l in L)
    return ObjectiveTerms(constant, theta, phi, psi, phi_cover, m)


def modularity_from_counts(inst: CoverInstance, cp: CoverPartition, x: dict) -> int:
    """Scaled modularity (``4m^2 q``) of any partition realising counts ``x``."""
    check_counts(inst, cp, x)
    return objective_terms(inst, cp, x).num


def materialize(inst: CoverInstance, cp: CoverPartition, x: dict) -> list:
    """One concrete partition (as masks) with the given counts."""
    check_counts(inst, cp, x)
    masks = list(cp.masks)
    for sigma, ws in inst.members.items():
        it = iter(ws)
        for i in range(len(cp)):
            for _ in range(x.get((sigma, i), 0)):
                masks[i] |= 1 << next(it)
    return masks


# ---------------------------------------------------------------------------
# optimisation over counts

def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def optimize_partition(inst: CoverInstance, cp: CoverPartition, budget: int = DEFAULT_SEARCH_BUDGET) -> tuple:
    """Best counts for a fixed cover partition: returns ``(num, x)``.

    Types are processed one at a time.  The table is keyed by the vector of
    type volumes added to each part so far and keeps the largest number of
    captured edges for it; the final score is a function of exactly these two
    quantities, so the table search is exact.
    """
    m4 = 4 * inst.G.m
    ell = len(cp)
    table = {(0,) * ell: (0, None)}
    history = []
    work = 0
    for sigma, ws in inst.members.items():
        size = sigma.bit_count()
        gains = [(sigma & pi).bit_count() for pi in cp.pi]
        comps = list(_compositions(len(ws), ell))
        nxt: dict = {}
        for L, (theta, _) in table.items():
            for comp in comps:
                key = tuple(l + c * size for l, c in zip(L, comp))
                th = theta + sum(c * g for c, g in zip(comp, gains))
                old = nxt.get(key)
                if old is None or th > old[0]:
                    nxt[key] = (th, (L, comp))
            work += len(comps)
            if work > budget:
                raise BudgetExceeded("count search", budget, work)
        history.append((sigma, nxt))
        table = nxt
    base = sum(m4 * e for e in cp.e)
    best_num, best_key = None, None
    for L in sorted(table):
        theta = table[L][0]
        num = base + m4 * theta - sum((v + l) ** 2 for v, l in zip(cp.vol, L))
        if best_num is None or num > best_num:
            best_num, best_key = num, L
    x = {}
    key = best_key
    for sigma, tab in reversed(history):
        prev, comp = tab[key][1]
        for i, c in enumerate(comp):
            if c:
                x[(sigma, i)] = c
        key = prev
    return best_num, x


def optimize_partition_pairs(inst: CoverInstance, cp: CoverPartition, budget: int = DEFAULT_SEARCH_BUDGET) -> tuple:
    """Alternative route: enumerate every feasible ``x``, keep the least ``psi``
    for each ``(theta, phi)`` pair, then maximise over pairs.

    Returns ``(num, x, pairs, cover_pairs)`` where ``pairs`` is the number of
    distinct ``(theta, phi)`` pairs seen and ``cover_pairs`` the number of
    distinct ``(theta, phi_cover)`` pairs.
    """
    ell = len(cp)
    types = list(inst.members.items())
    per_type = [list(_compositions(len(ws), ell)) for _, ws in types]
    best_psi: dict = {}
    cover_pairs = set()
    seen = 0
    const = None
    for combo in product(*per_type):
        seen += 1
        if seen > budget:
            raise BudgetExceeded("count enumeration", budget, seen)
        x = {(sigma, i): c for (sigma, _), comp in zip(types, combo) for i, c in enumerate(comp) if c}
        terms = objective_terms(inst, cp, x)
        const = terms.constant
        cover_pairs.add((terms.theta, terms.phi_cover))
        pair = (terms.theta, terms.phi)
        if pair not in best_psi or terms.psi < best_psi[pair][0]:
            best_psi[pair] = (terms.psi, x)
    if const is None:
        const = objective_terms(inst, cp, {}).constant
    m4 = 4 * inst.G.m
    best = None
    for (theta, phi), (psi, x) in sorted(best_psi.items()):
        num = const + m4 * theta - 2 * phi - psi
        if best is None or num > best[0]:
            best = (num, x)
    return best[0], best[1], len(best_psi), len(cover_pairs)


def _cover_partitions(k: int):
    """Partitions of ``range(k)`` as lists of position lists (RGS order)."""
    parts: list = []

    def rec(j):
        if j == k:
            yield [list(p) for p in parts]
            return
        for p in parts:
            p.append(j)
            yield from rec(j + 1)
            p.pop()
        parts.append([j])
        yield from rec(j + 1)
        parts.pop()

    yield from rec(0)


def solve(G: Graph, cover_cap: int = DEFAULT_COVER_CAP, budget: int = DEFAULT_SEARCH_BUDGET,
          use_pairs: bool = False) -> Solution:
    """Exact q* as the best of ``optimize_partition`` over all partitions of a minimum cover."""

    def core(H: Graph):
        U = min_vertex_cover(H, cover_cap)
        if U is None:
            raise BudgetExceeded("vertex cover size", cover_cap)
        inst = classify_types(H, U)
        best_num, best_masks = None, None
        count = 0
        for parts in _cover_partitions(inst.k):
            cp = cover_partition(inst, parts)
            if use_pairs:
                num, x, _, _ = optimize_partition_pairs(inst, cp, budget)
            else:
                num, x = optimize_partition(inst, cp, budget)
            count += 1
            if best_num is None or num > best_num:
                best_num, best_masks = num, materialize(inst, cp, x)
        return best_num, best_masks, {"cover_size": inst.k, "cover_partitions": count, "types": len(inst.members)}

    return solve_via_stripped(G, core, "vc")

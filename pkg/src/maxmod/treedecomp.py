"""Tree decompositions: PACE ``.td`` I/O, validation, elimination heuristics and
conversion to nice form."""

from __future__ import annotations

import random
from collections import defaultdict
from dataclasses import dataclass, field

from .graph import Graph, bits, to_mask, to_set


class TDFormatError(ValueError):
    pass


LEAF, INTRODUCE, FORGET, JOIN = "leaf", "introduce", "forget", "join"


@dataclass
class TreeDecomposition:
    """Bags indexed by node id ``0..len(bags)-1`` plus undirected tree edges.

    Bags are frozensets of 0-based vertex indices.
    """

    bags: list
    edges: list
    root: int = 0
    n_vertices: int | None = None

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags), default=0) - 1

    def neighbors(self) -> list:
        nb = [[] for _ in self.bags]
        for a, b in self.edges:
            nb[a].append(b)
            nb[b].append(a)
        return nb

    def rooted_children(self, root: int | None = None) -> tuple:
        """Return ``(order, children)``: a BFS order from the root and child lists."""
        root = self.root if root is None else root
        nb = self.neighbors()
        children = [[] for _ in self.bags]
        order = [root]
        seen = {root}
        i = 0
        while i < len(order):
            t = order[i]
            i += 1
            for s in sorted(nb[t]):
                if s not in seen:
                    seen.add(s)
                    children[t].append(s)
                    order.append(s)
        return order, children


# ---------------------------------------------------------------------------
# PACE format

def parse_td(text: str) -> TreeDecomposition:
    """Parse a PACE 2017 ``.td`` file (1-based vertices and bag ids)."""
    header = None
    bags: dict = {}
    tree_edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        tok = line.split()
        if tok[0] == "s":
            if header is not None:
                raise TDFormatError(f"line {lineno}: second header")
            if len(tok) != 5 or tok[1] != "td":
                raise TDFormatError(f"line {lineno}: malformed header {line!r}")
            try:
                header = tuple(int(x) for x in tok[2:])
            except ValueError:
                raise TDFormatError(f"line {lineno}: non-integer header field") from None
            continue
        if header is None:
            raise TDFormatError(f"line {lineno}: content before 's td' header")
        try:
            nums = [int(x) for x in tok[1:]] if tok[0] == "b" else [int(x) for x in tok]
        except ValueError:
            raise TDFormatError(f"line {lineno}: non-integer token in {line!r}") from None
        if tok[0] == "b":
            if not nums:
                raise TDFormatError(f"line {lineno}: bag line without id")
            bid, verts = nums[0], nums[1:]
            if bid in bags:
                raise TDFormatError(f"line {lineno}: bag {bid} declared twice")
            if any(v < 1 or v > header[2] for v in verts):
                raise TDFormatError(f"line {lineno}: vertex outside 1..{header[2]}")
            bags[bid] = frozenset(v - 1 for v in verts)
        else:
            if len(nums) != 2:
                raise TDFormatError(f"line {lineno}: tree edge needs two bag ids")
            tree_edges.append((nums[0], nums[1], lineno))
    if header is None:
        raise TDFormatError("missing 's td' header")
    nbags, maxbag, nverts = header
    if len(bags) != nbags:
        raise TDFormatError(f"header declares {nbags} bags, found {len(bags)}")
    if set(bags) != set(range(1, nbags + 1)):
        raise TDFormatError("bag ids must be exactly 1..#bags")
    if bags and max(len(b) for b in bags.values()) != maxbag:
        raise TDFormatError(f"header max bag size {maxbag} does not match bags")
    edges = []
    for a, b, lineno in tree_edges:
        for x in (a, b):
            if x not in bags:
                raise TDFormatError(f"line {lineno}: tree edge references undeclared bag {x}")
        edges.append((a - 1, b - 1))
    td = TreeDecomposition([bags[i] for i in range(1, nbags + 1)], edges, 0, nverts)
    problem = _tree_problem(len(td.bags), td.edges)
    if problem:
        raise TDFormatError(problem)
    return td


def format_td(td: TreeDecomposition, n_vertices: int) -> str:
    lines = [f"s td {len(td.bags)} {td.width + 1} {n_vertices}"]
    for i, bag in enumerate(td.bags, 1):
        lines.append(" ".join(["b", str(i)] + [str(v + 1) for v in sorted(bag)]))
    for a, b in td.edges:
        lines.append(f"{a + 1} {b + 1}")
    return "\n".join(lines) + "\n"


def _tree_problem(nnodes: int, edges) -> str | None:
    if nnodes == 0:
        return "decomposition has no bags"
    if len(edges) != nnodes - 1:
        return f"tree must have {nnodes - 1} edges, has {len(edges)} (cycle or disconnected)"
    parent = list(range(nnodes))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra == rb:
            return f"tree edges contain a cycle through bags {a + 1} and {b + 1}"
        parent[ra] = rb
    return None


# ---------------------------------------------------------------------------
# validation

def validate(G: Graph, td: TreeDecomposition) -> list:
    """Return the list of violated decomposition conditions (empty means valid)."""
    problems = []
    tree = _tree_problem(len(td.bags), td.edges)
    if tree:
        problems.append(f"tree: {tree}")
    for t, bag in enumerate(td.bags):
        if not bag:
            problems.append(f"bag {t + 1} is empty")
        bad = [v for v in bag if not 0 <= v < G.n]
        if bad:
            problems.append(f"bag {t + 1} holds vertices outside the graph: {sorted(v + 1 for v in bad)}")
    covered = set().union(*td.bags) if td.bags else set()
    for v in range(G.n):
        if v not in covered:
            problems.append(f"condition 1: vertex {G.labels[v]} is in no bag")
    for u, v in G.edges:
        if not any(u in b and v in b for b in td.bags):
            problems.append(f"condition 2: edge {G.labels[u]}-{G.labels[v]} is in no bag")
    if not tree:
        nb = td.neighbors()
        for v in range(G.n):
            nodes = [t for t, b in enumerate(td.bags) if v in b]
            if len(nodes) <= 1:
                continue
            seen = {nodes[0]}
            stack = [nodes[0]]
            inside = set(nodes)
            while stack:
                t = stack.pop()
                for s in nb[t]:
                    if s in inside and s not in seen:
                        seen.add(s)
                        stack.append(s)
            if len(seen) != len(nodes):
                problems.append(
                    f"condition 3: bags containing {G.labels[v]} do not form a connected subtree "
                    f"(bags {sorted(t + 1 for t in nodes)})"
                )
    return problems


# ---------------------------------------------------------------------------
# heuristic construction

def elimination_order(G: Graph, heuristic: str = "min-fill", seed: int | None = None) -> list:
    """Greedy elimination order; ties go to the smallest vertex index."""
    nbrs = {v: set(bits(G.adj[v])) for v in range(G.n)}
    if heuristic == "random":
        order = list(range(G.n))
        random.Random(seed).shuffle(order)
        return order
    if heuristic not in ("min-fill", "min-degree"):
        raise ValueError(f"unknown heuristic {heuristic!r}")
    order = []
    alive = set(range(G.n))
    while alive:
        if heuristic == "min-degree":
            v = min(alive, key=lambda x: (len(nbrs[x]), x))
        else:
            v = min(alive, key=lambda x: (_fill_in(nbrs, x), x))
        order.append(v)
        _eliminate(nbrs, v)
        alive.discard(v)
    return order


def _fill_in(nbrs: dict, v: int) -> int:
    ns = list(nbrs[v])
    missing = 0
    for i, a in enumerate(ns):
        na = nbrs[a]
        for b in ns[i + 1:]:
            if b not in na:
                missing += 1
    return missing


def _eliminate(nbrs: dict, v: int) -> None:
    ns = nbrs.pop(v)
    for a in ns:
        nbrs[a].discard(v)
        nbrs[a] |= ns - {a}


def decomposition_from_order(G: Graph, order: list) -> TreeDecomposition:
    """Tree decomposition induced by an elimination order, with subset bags contracted."""
    if sorted(order) != list(range(G.n)):
        raise ValueError("order must be a permutation of the vertices")
    pos = {v: i for i, v in enumerate(order)}
    nbrs = {v: set(bits(G.adj[v])) for v in range(G.n)}
    bags = []
    parent_vertex = []
    for v in order:
        later = set(nbrs[v])
        bags.append(frozenset(later | {v}))
        parent_vertex.append(min(later, key=pos.__getitem__) if later else None)
        _eliminate(nbrs, v)
    edges = []
    roots = []
    for i, pv in enumerate(parent_vertex):
        if pv is None:
            roots.append(i)
        else:
            edges.append((i, pos[pv]))
    # disconnected graph: hang every component tree under the first one
    for r in roots[1:]:
        edges.append((r, roots[0]))
    td = TreeDecomposition(bags, edges, roots[0] if roots else 0, G.n)
    return contract_subset_bags(td)


def contract_subset_bags(td: TreeDecomposition) -> TreeDecomposition:
    """Merge every node whose bag is contained in a neighbour's bag into it."""
    bags = list(td.bags)
    nb = [set(x) for x in td.neighbors()]
    alive = set(range(len(bags)))
    changed = True
    while changed:
        changed = False
        for t in sorted(alive):
            for s in sorted(nb[t]):
                if bags[t] <= bags[s]:
                    for x in nb[t]:
                        if x != s:
                            nb[x].discard(t)
                            nb[x].add(s)
                            nb[s].add(x)
                    nb[s].discard(t)
                    nb[t] = set()
                    alive.discard(t)
                    changed = True
                    break
    keep = sorted(alive)
    new = {t: i for i, t in enumerate(keep)}
    edges = sorted({(min(new[a], new[b]), max(new[a], new[b])) for a in keep for b in nb[a]})
    return TreeDecomposition([bags[t] for t in keep], edges, 0, td.n_vertices)


def heuristic_decompose(G: Graph, heuristic: str = "min-fill", seed: int | None = None) -> TreeDecomposition:
    """Valid (not necessarily optimal) decomposition from a greedy elimination order."""
    if G.n < 1:
        raise ValueError("graph has no vertices")
    return decomposition_from_order(G, elimination_order(G, heuristic, seed))


# ---------------------------------------------------------------------------
# nice decompositions

@dataclass
class NiceTreeDecomposition:
    """Rooted decomposition whose nodes are leaf/introduce/forget/join.

    ``bags`` are vertex masks; ``vertex[t]`` is the introduced or forgotten
    vertex (-1 for leaf and join nodes).  Leaves hold a single vertex.
    """

    kinds: list = field(default_factory=list)
    bags: list = field(default_factory=list)
    vertex: list = field(default_factory=list)
    children: list = field(default_factory=list)
    root: int = -1

    def add(self, kind: str, bag: int, vertex: int = -1, children: tuple = ()) -> int:
        self.kinds.append(kind)
        self.bags.append(bag)
        self.vertex.append(vertex)
        self.children.append(tuple(children))
        return len(self.kinds) - 1

    def __len__(self) -> int:
        return len(self.kinds)

    @property
    def width(self) -> int:
        return max(b.bit_count() for b in self.bags) - 1

    def postorder(self) -> list:
        out = []
        stack = [(self.root, False)]
        while stack:
            t, done = stack.pop()
            if done:
                out.append(t)
                continue
            stack.append((t, True))
            for c in reversed(self.children[t]):
                stack.append((c, False))
        return out

    def to_td(self) -> TreeDecomposition:
        edges = [(t, c) for t in range(len(self)) for c in self.children[t]]
        return TreeDecomposition([to_set(b) for b in self.bags], edges, self.root)

    def check_nice(self) -> list:
        """Structural problems with the node kinds (empty when well formed)."""
        problems = []
        for t, kind in enumerate(self.kinds):
            bag, ch, v = self.bags[t], self.children[t], self.vertex[t]
            if bag == 0:
                problems.append(f"node {t}: empty bag")
            if kind == LEAF:
                if ch or bag.bit_count() != 1:
                    problems.append(f"node {t}: leaf must be childless with one vertex")
            elif kind == INTRODUCE:
                if len(ch) != 1 or bag != self.bags[ch[0]] | (1 << v) or self.bags[ch[0]] >> v & 1:
                    problems.append(f"node {t}: bad introduce of {v}")
            elif kind == FORGET:
                if len(ch) != 1 or bag | (1 << v) != self.bags[ch[0]] or bag >> v & 1:
                    problems.append(f"node {t}: bad forget of {v}")
            elif kind == JOIN:
                if len(ch) != 2 or any(self.bags[c] != bag for c in ch):
                    problems.append(f"node {t}: join children must share its bag")
            else:
                problems.append(f"node {t}: unknown kind {kind!r}")
        return problems


def choose_root(td: TreeDecomposition) -> int:
    """Node with the smallest non-empty bag (lowest id on ties)."""
    return min((t for t, b in enumerate(td.bags) if b), key=lambda t: (len(td.bags[t]), t))


def make_nice(td: TreeDecomposition, root: int | None = None) -> NiceTreeDecomposition:
    """Convert a decomposition into nice form with the same width (for width >= 1)."""
    if _tree_problem(len(td.bags), td.edges):
        raise ValueError("input is not a tree decomposition")
    if any(not b for b in td.bags):
        raise ValueError("input decomposition has an empty bag")
    root = choose_root(td) if root is None else root
    order, children = td.rooted_children(root)
    nice = NiceTreeDecomposition()
    top = {}
    for t in reversed(order):
        B = to_mask(td.bags[t])
        branches = [_chain(nice, top[c], to_mask(td.bags[c]), B) for c in children[t]]
        if not branches:
            vs = sorted(bits(B))
            cur = nice.add(LEAF, 1 << vs[0])
            bag = 1 << vs[0]
            for v in vs[1:]:
                bag |= 1 << v
                cur = nice.add(INTRODUCE, bag, v, (cur,))
            top[t] = cur
        else:
            cur = branches[0]
            for b in branches[1:]:
                cur = nice.add(JOIN, B, -1, (cur, b))
            top[t] = cur
    nice.root = top[root]
    return nice


def _chain(nice: NiceTreeDecomposition, cur: int, C: int, B: int) -> int:
    """Forget/introduce path from a node with bag ``C`` up to one with bag ``B``."""
    forget = sorted(bits(C & ~B))
    intro = sorted(bits(B & ~C))
    bag = C
    keep = None
    if intro and not (C & B):
        keep = forget.pop()
    for v in forget:
        bag &= ~(1 << v)
        cur = nice.add(FORGET, bag, v, (cur,))
    for i, v in enumerate(intro):
        bag |= 1 << v
        cur = nice.add(INTRODUCE, bag, v, (cur,))
        if i == 0 and keep is not None:
            bag &= ~(1 << keep)
            cur = nice.add(FORGET, bag, keep, (cur,))
    return cur


def nice_decomposition(G: Graph, td: TreeDecomposition | None = None, heuristic: str = "min-fill",
                       seed: int | None = None) -> NiceTreeDecomposition:
    """Nice decomposition of ``G`` from ``td`` or from the elimination heuristic."""
    if td is None:
        td = heuristic_decompose(G, heuristic, seed)
    else:
        problems = validate(G, td)
        if problems:
            raise ValueError("invalid tree decomposition: " + "; ".join(problems))
    return make_nice(td)


def forget_nodes_by_vertex(nice: NiceTreeDecomposition) -> dict:
    out = defaultdict(list)
    for t, k in enumerate(nice.kinds):
        if k == FORGET:
            out[nice.vertex[t]].append(t)
    return dict(out)

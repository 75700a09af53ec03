"""Hardness gadget: Modularity instances built from anchored equitable
connected partition (AECP) instances, and the per-unit deficit thresholds
that govern them.

For a part ``B`` of a graph with ``m`` edges the per-unit deficit is
``f = bd(B)/vol(B) + vol(B)/(2m)``; the critical value is ``2*sqrt(2/m)``.
All comparisons against it are done in integers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt

from .graph import (
    Graph,
    PartitionError,
    ScaledScore,
    bits,
    connected_components,
    is_connected,
    score_masks,
    set_stats,
    to_mask,
)

BELOW, EQUAL, ABOVE = "below", "equal", "above"
MATERIALIZE_LIMIT = 1_000_000


# ---------------------------------------------------------------------------
# per-unit deficit

@dataclass(frozen=True)
class DeficitComparison:
    relation: str  # f compared with 2*sqrt(2/m)
    value: Fraction


def per_unit_deficit(boundary: int, vol: int, m: int) -> DeficitComparison:
    """Compare ``f = boundary/vol + vol/2m`` with ``2 sqrt(2/m)`` exactly.

    Both sides are positive, so squaring gives the integer test
    ``(2m*boundary + vol**2)**2`` against ``32 m vol**2``.
    """
    if vol < 1:
        raise ValueError("per-unit deficit needs vol >= 1")
    if m < 1:
        raise ValueError("per-unit deficit needs m >= 1")
    lhs = (2 * m * boundary + vol * vol) ** 2
    rhs = 32 * m * vol * vol
    rel = ABOVE if lhs > rhs else EQUAL if lhs == rhs else BELOW
    return DeficitComparison(rel, Fraction(boundary, vol) + Fraction(vol, 2 * m))


_WINDOW_TEXT = {
    0: "vol > 4 sqrt(2m)",
    1: "vol > 3.7321 sqrt(2m) or vol < 0.2679 sqrt(2m)",
    2: "vol > 3.4143 sqrt(2m) or vol < 0.5857 sqrt(2m)",
    3: "vol > 3 sqrt(2m) or vol < sqrt(2m)",
    4: "vol >= 2 sqrt(2m)",
    5: "always",
}


@dataclass(frozen=True)
class ThresholdReport:
    clause: int
    window: str
    in_window: bool
    relation: str
    consistent: bool  # the clause's conclusion holds (vacuous outside the window)

    def __str__(self) -> str:
        where = "inside" if self.in_window else "outside"
        ok = "holds" if self.consistent else "FAILS"
        return f"clause {self.clause} ({self.window}): {where} window, f {self.relation} 2sqrt(2/m); conclusion {ok}"


def classify_threshold(boundary: int, vol: int, m: int) -> ThresholdReport:
    """Which boundary clause applies to ``(boundary, vol, m)`` and whether its window holds.

    Windows are evaluated exactly.  For boundaries 1..3 the window
    ``|vol/sqrt(2m) - 2| > sqrt(4 - boundary)`` squares to
    ``(vol**2 + 2m*boundary)**2 > 32 m vol**2``; the decimals in the window
    text are for display only.
    """
    cmp = per_unit_deficit(boundary, vol, m)
    clause = min(boundary, 5)
    v2 = vol * vol
    if clause == 0:
        inside = v2 > 32 * m
    elif clause in (1, 2, 3):
        inside = (v2 + 2 * m * boundary) ** 2 > 32 * m * v2
    elif clause == 4:
        inside = v2 >= 8 * m
    else:
        inside = True
    if not inside:
        consistent = True
    elif clause == 4:
        consistent = cmp.relation == (EQUAL if v2 == 8 * m else ABOVE)
    else:
        consistent = cmp.relation == ABOVE
    return ThresholdReport(clause, _WINDOW_TEXT[clause], inside, cmp.relation, consistent)


# ---------------------------------------------------------------------------
# AECP instances

@dataclass
class AECPInstance:
    H: Graph
    anchors: tuple  # vertex indices a_1..a_r

    @property
    def r(self) -> int:
        return len(self.anchors)

    @property
    def s(self) -> int:
        return self.H.n // self.r


def caterpillar_violations(G: Graph, removed: int) -> list:
    """Components of ``G - removed`` that are neither isolated vertices nor paths with pendant edges."""
    out = []
    rest = G.all_mask & ~removed
    for comp in connected_components(G, rest):
        size = comp.bit_count()
        if size == 1:
            continue
        edges = sum((G.adj[v] & comp).bit_count() for v in bits(comp)) // 2
        names = sorted(G.labels[v] for v in bits(comp))
        if edges != size - 1:
            out.append(f"component {names} contains a cycle")
            continue
        spine = [v for v in bits(comp) if (G.adj[v] & comp).bit_count() >= 2]
        spine_mask = to_mask(spine)
        if spine and any((G.adj[v] & spine_mask).bit_count() > 2 for v in spine):
            out.append(f"component {names} is not a path with pendant edges")
    return out


def validate_aecp(H: Graph, anchors) -> list:
    """Check the five structural conditions on an AECP instance; returns violations."""
    anchors = tuple(anchors)
    out = []
    if len(set(anchors)) != len(anchors) or any(not 0 <= a < H.n for a in anchors):
        return ["anchors must be distinct vertices of H"]
    if not is_connected(H, H.all_mask):
        out.append("condition 1: H is not connected")
    core = [v for v in range(H.n) if H.deg[v] != 1]
    core_mask = to_mask(core)
    deg_core = {v: (H.adj[v] & core_mask).bit_count() for v in core}
    if core and not is_connected(H, core_mask):
        out.append("condition 2: H without its degree-one vertices is disconnected")
    bad = sorted(H.labels[v] for v, d in deg_core.items() if d not in (2, 3))
    if bad:
        out.append(f"condition 2: vertices {bad} have degree other than 2 or 3 after removing degree-one vertices")
    branch = {v for v, d in deg_core.items() if d == 3}
    aset = set(anchors)
    if branch != aset:
        extra = sorted(H.labels[v] for v in branch - aset)
        missing = sorted(H.labels[v] for v in aset - branch)
        msg = "condition 3: branch vertices differ from anchors"
        if extra:
            msg += f"; non-anchor branch vertices {extra}"
        if missing:
            msg += f"; anchors without degree 3 {missing}"
        out.append(msg)
    r = len(anchors)
    if r < 4 or r % 2 or H.n % r:
        out.append(f"condition 4: r={r} must be even, at least 4 and divide |V(H)|={H.n}")
    for msg in caterpillar_violations(H, to_mask(anchors)):
        out.append("condition 5: " + msg)
    return out


# ---------------------------------------------------------------------------
# construction

@dataclass
class GadgetOutput:
    alpha: int
    beta: int
    m: int
    root: int  # sqrt(2m) = s + alpha + 1
    q0: ScaledScore
    s: int
    r: int
    edges_h: int
    unsafe: bool = False
    G: Graph | None = None
    anchors: tuple = ()  # anchor indices in G (same as in H)
    leaves: tuple = ()  # leaves[i] = indices of the alpha leaves on anchor i
    isolated_edges: tuple = ()
    warnings: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.r * (self.s + self.alpha) + 2 * self.beta


def default_alpha(edges_h: int, s: int, r: int) -> int:
    """Least alpha with alpha >= 32|E(H)|^2, alpha = s+1 (mod 2) and (alpha+s+1)^2 > 2|E(H)| + 2 alpha r + r."""
    a = 32 * edges_h * edges_h
    if (a - s - 1) % 2:
        a += 1
    while (a + s + 1) ** 2 <= 2 * edges_h + 2 * a * r + r:
        a += 2
    return a


def q0_numerator(m: int, beta: int, root: int) -> int:
    """``4m^2 q0`` with ``q0 = 1 - beta/m^2 - 2 sqrt2 (m - beta)/m^(3/2)`` and ``root = sqrt(2m)``."""
    return 4 * m * m - 4 * beta - 8 * root * (m - beta)


def build_gadget(inst: AECPInstance, alpha_override: int | None = None, materialize: bool | None = None) -> GadgetOutput:
    """Gadget graph: H plus alpha leaves per anchor, beta isolated edges and the
    anchor matching a1a2, a3a4, ...

    ``materialize=None`` builds the graph only when it has at most
    ``MATERIALIZE_LIMIT`` edges; the arithmetic is always exact.
    """
    problems = validate_aecp(inst.H, inst.anchors)
    if problems:
        raise ValueError("invalid AECP instance: " + "; ".join(problems))
    H, r, s = inst.H, inst.r, inst.s
    eh = H.m
    warnings = []
    if alpha_override is None:
        alpha = default_alpha(eh, s, r)
        unsafe = False
    else:
        alpha = alpha_override
        if alpha < 1:
            raise ValueError("alpha must be positive")
        if (alpha - s - 1) % 2:
            raise ValueError(f"alpha={alpha} must have the parity of s+1={s + 1}")
        if (alpha + s + 1) ** 2 <= 2 * eh + 2 * alpha * r + r:
            raise ValueError(f"alpha={alpha} too small: (alpha+s+1)^2 must exceed 2|E(H)| + 2 alpha r + r")
        unsafe = alpha < 32 * eh * eh
        if unsafe:
            warnings.append(
                f"unsafe alpha: {alpha} < 32|E(H)|^2 = {32 * eh * eh}; the hardness guarantee does not apply"
            )
    root = alpha + s + 1
    beta = ((root * root - r) // 2) - eh - alpha * r
    m = eh + alpha * r + beta + r // 2
    if 2 * m != root * root or beta <= 0:
        raise AssertionError("gadget arithmetic broken")
    out = GadgetOutput(alpha, beta, m, root, ScaledScore(q0_numerator(m, beta, root), m), s, r, eh, unsafe,
                       anchors=tuple(inst.anchors), warnings=warnings)
    if materialize is None:
        materialize = m <= MATERIALIZE_LIMIT
    if materialize:
        _materialize(inst, out)
    return out


def _materialize(inst: AECPInstance, out: GadgetOutput) -> None:
    H = inst.H
    labels = list(H.labels)
    taken = set(labels)

    def fresh(name: str) -> int:
        while name in taken:
            name = "_" + name
        taken.add(name)
        labels.append(name)
        return len(labels) - 1

    edges = list(H.edges)
    leaves = []
    for a in inst.anchors:
        mine = []
        for j in range(out.alpha):
            leaf = fresh(f"{H.labels[a]}.leaf{j + 1}")
            edges.append((a, leaf))
            mine.append(leaf)
        leaves.append(tuple(mine))
    iso = []
    for j in range(out.beta):
        x = fresh(f"iso{j + 1}.a")
        y = fresh(f"iso{j + 1}.b")
        edges.append((x, y))
        iso.append((x, y))
    anchors = list(inst.anchors)
    for a, b in zip(anchors[0::2], anchors[1::2]):
        edges.append((a, b))
    out.G = Graph(len(labels), tuple(edges), tuple(labels))
    out.leaves = tuple(leaves)
    out.isolated_edges = tuple(iso)
    if out.G.m != out.m:
        raise AssertionError("materialized edge count disagrees with formula")


def gadget_inequalities(out: GadgetOutput) -> dict:
    """Integer checks of the size conditions on alpha."""
    return {
        "alpha_ge_32E2": out.alpha >= 32 * out.edges_h ** 2,
        "two_m_is_square": 2 * out.m == out.root ** 2 and out.root == out.s + out.alpha + 1,
        # alpha > 0.969 sqrt(2m) with sqrt(2m) an integer
        "alpha_gt_0969_root": 1000 * out.alpha > 969 * out.root,
    }


# ---------------------------------------------------------------------------
# witnesses

class WitnessError(ValueError):
    pass


@dataclass
class WitnessLift:
    partition: list  # masks over V(G)
    q: ScaledScore
    anchor_parts: list  # (boundary, vol, relation) per anchor part


def check_witness(inst: AECPInstance, h_parts) -> list:
    """Masks of an equitable, connected, anchored partition of V(H) (one part per anchor, in anchor order)."""
    H = inst.H
    masks = [to_mask(p) for p in h_parts]
    seen = 0
    for p in masks:
        if not p or p & seen:
            raise WitnessError("witness parts must be non-empty and disjoint")
        seen |= p
    if seen != H.all_mask:
        raise WitnessError("witness parts do not cover V(H)")
    if len(masks) != inst.r:
        raise WitnessError(f"witness needs {inst.r} parts, has {len(masks)}")
    ordered = []
    for a in inst.anchors:
        owner = [p for p in masks if p >> a & 1]
        ordered.append(owner[0])
    for a, p in zip(inst.anchors, ordered):
        names = sorted(H.labels[v] for v in bits(p))
        if p.bit_count() != inst.s:
            raise WitnessError(f"part {names} has {p.bit_count()} vertices, expected s={inst.s}")
        if sum(1 for b in inst.anchors if p >> b & 1) != 1:
            raise WitnessError(f"part {names} must contain exactly one anchor")
        if not is_connected(H, p):
            raise WitnessError(f"part {names} is not connected in H")
    return ordered


def witness_to_partition(inst: AECPInstance, out: GadgetOutput, h_parts) -> WitnessLift:
    """Lift an AECP witness to a partition of the gadget graph.

    Each anchor part absorbs its anchor's leaves; each isolated edge is a part.
    Every anchor part must come out with boundary 4 and volume ``2 sqrt(2m)``
    and the whole partition must score exactly ``q0``.
    """
    if out.G is None:
        raise ValueError("gadget graph was not materialized")
    ordered = check_witness(inst, h_parts)
    G = out.G
    parts = []
    report = []
    for i, p in enumerate(ordered):
        lifted = p | to_mask(out.leaves[i])
        _, vol, bd = set_stats(G, lifted)
        rel = per_unit_deficit(bd, vol, G.m).relation
        if bd != 4 or vol != 2 * out.root or rel != EQUAL:
            names = sorted(G.labels[v] for v in bits(p))
            raise WitnessError(f"lifted part {names}: boundary {bd}, volume {vol}, f {rel}")
        parts.append(lifted)
        report.append((bd, vol, rel))
    for x, y in out.isolated_edges:
        parts.append((1 << x) | (1 << y))
    q = ScaledScore(score_masks(G, parts), G.m)
    if q != out.q0:
        raise WitnessError(f"lifted partition scores {q}, expected q0 = {out.q0}")
    return WitnessLift(parts, q, report)


# ---------------------------------------------------------------------------
# reference instance

def subdivided_k4() -> tuple:
    """Fully subdivided K4 with two pendant leaves: ``(instance, witness_parts_by_label)``.

    Anchors a1..a4, subdivision vertices sij on edge aiaj, pendant p1 on s12
    and p2 on s23.  12 vertices, 14 edges, r = 4, s = 3.
    """
    pairs = []
    for i in range(1, 5):
        for j in range(i + 1, 5):
            pairs.append((f"a{i}", f"s{i}{j}"))
            pairs.append((f"s{i}{j}", f"a{j}"))
    pairs += [("s12", "p1"), ("s23", "p2")]
    from .graph import build_graph

    H = build_graph(pairs)
    anchors = tuple(H.index_of(f"a{i}") for i in range(1, 5))
    witness = [["a1", "s12", "p1"], ["a2", "s23", "p2"], ["a3", "s13", "s34"], ["a4", "s14", "s24"]]
    return AECPInstance(H, anchors), witness


def parts_from_labels(G: Graph, parts) -> list:
    try:
        return [to_mask(G.index_of(x) for x in p) for p in parts]
    except KeyError as exc:
        raise PartitionError(str(exc)) from None


def isqrt_exact(x: int) -> int | None:
    r = isqrt(x)
    return r if r * r == x else None

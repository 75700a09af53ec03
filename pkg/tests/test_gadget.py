from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from maxmod import gadget
from maxmod.graph import build_graph, score_partition, to_mask


@pytest.fixture(scope="module")
def k4():
    return gadget.subdivided_k4()


@pytest.mark.parametrize(
    "bd,vol,m,rel,value",
    [(4, 8, 8, gadget.EQUAL, Fraction(1)), (4, 24, 72, gadget.EQUAL, Fraction(1, 3)),
     (0, 2, 1, gadget.BELOW, Fraction(1)), (0, 2, 50, gadget.BELOW, Fraction(1, 50)),
     (5, 3, 10, gadget.ABOVE, Fraction(5, 3) + Fraction(3, 20))],
)
def test_per_unit_deficit(bd, vol, m, rel, value):
    cmp = gadget.per_unit_deficit(bd, vol, m)
    assert (cmp.relation, cmp.value) == (rel, value)


def test_per_unit_deficit_rejects_zero_volume():
    with pytest.raises(ValueError):
        gadget.per_unit_deficit(1, 0, 5)


@given(st.integers(0, 8), st.integers(1, 400), st.integers(1, 300))
def test_comparator_matches_exact_square_test(bd, vol, m):
    # f vs 2 sqrt(2/m): compare f^2 with 8/m (f > 0)
    f = Fraction(bd, vol) + Fraction(vol, 2 * m)
    expected = gadget.ABOVE if f * f > Fraction(8, m) else gadget.EQUAL if f * f == Fraction(8, m) else gadget.BELOW
    assert gadget.per_unit_deficit(bd, vol, m).relation == expected


@given(st.integers(0, 9), st.integers(1, 300), st.integers(1, 200))
def test_threshold_clauses_hold_in_their_windows(bd, vol, m):
    report = gadget.classify_threshold(bd, vol, m)
    assert report.consistent
    if bd >= 5:
        assert report.in_window and report.relation == gadget.ABOVE


@pytest.mark.parametrize(
    "bd,vol,m,clause,inside,rel",
    [(5, 1, 3, 5, True, gadget.ABOVE), (4, 24, 72, 4, True, gadget.EQUAL), (3, 40, 72, 3, True, gadget.ABOVE),
     (3, 20, 72, 3, False, gadget.BELOW), (0, 49, 72, 0, True, gadget.ABOVE), (1, 2, 72, 1, True, gadget.ABOVE)],
)
def test_threshold_clause_examples(bd, vol, m, clause, inside, rel):
    report = gadget.classify_threshold(bd, vol, m)
    assert (report.clause, report.in_window, report.relation) == (clause, inside, rel)
    assert "clause" in str(report)


def test_reference_instance_is_valid(k4):
    inst, _ = k4
    assert gadget.validate_aecp(inst.H, inst.anchors) == []
    assert (inst.H.n, inst.H.m, inst.r, inst.s) == (12, 14, 4, 3)


def test_odd_anchor_count(k4):
    inst, _ = k4
    problems = gadget.validate_aecp(inst.H, inst.anchors[:3])
    assert any(p.startswith("condition 4") for p in problems)


def test_anchor_of_degree_two():
    # cycle a-b-c-d with pendant on a: after stripping the pendant every vertex has degree 2
    H = build_graph([("a", "b"), ("b", "c"), ("c", "d"), ("d", "a"), ("a", "p")])
    problems = gadget.validate_aecp(H, [H.index_of(x) for x in "abcd"])
    assert any(p.startswith("condition 3") for p in problems)


def test_disconnected_and_non_caterpillar():
    H = build_graph([("a", "b"), ("c", "d")])
    problems = gadget.validate_aecp(H, [0, 1, 2, 3])
    assert any(p.startswith("condition 1") for p in problems)
    spider = build_graph([("x", "y1"), ("y1", "y2"), ("x", "z1"), ("z1", "z2"), ("x", "w1"), ("w1", "w2")])
    assert gadget.caterpillar_violations(spider, 0) != []
    cat = build_graph([("x", "y"), ("y", "z"), ("y", "p"), ("z", "q")])
    assert gadget.caterpillar_violations(cat, 0) == []


def test_override_arithmetic(k4):
    inst, _ = k4
    out = gadget.build_gadget(inst, alpha_override=8)
    assert (out.alpha, out.beta, out.m, out.root) == (8, 24, 72, 12)
    assert out.q0.fraction == Fraction(167, 216)
    assert out.q0.num == 4 * 72 ** 2 - 4 * 24 - 8 * 12 * (72 - 24)
    assert out.unsafe and out.warnings
    assert out.G.m == 72 and out.G.n == out.n == 4 * (3 + 8) + 48
    anchors = list(inst.anchors)
    assert (anchors[0], anchors[1]) in out.G.edges or (anchors[1], anchors[0]) in out.G.edges


def test_anchor_deletion_leaves_caterpillars(k4):
    inst, _ = k4
    out = gadget.build_gadget(inst, alpha_override=8)
    assert gadget.caterpillar_violations(out.G, to_mask(inst.anchors)) == []


@pytest.mark.parametrize("alpha", [7, 2])
def test_override_rejected(k4, alpha):
    inst, _ = k4
    with pytest.raises(ValueError):
        gadget.build_gadget(inst, alpha_override=alpha)


def test_default_alpha_symbolic(k4):
    inst, _ = k4
    out = gadget.build_gadget(inst)
    assert out.alpha == 6272 and out.G is None and not out.unsafe
    assert all(gadget.gadget_inequalities(out).values())
    assert 2 * out.m == out.root ** 2


@pytest.mark.parametrize("alpha", [8, 10, 12, 20])
def test_witness_lift(k4, alpha):
    inst, witness = k4
    out = gadget.build_gadget(inst, alpha_override=alpha)
    lift = gadget.witness_to_partition(inst, out, gadget.parts_from_labels(inst.H, witness))
    assert lift.q == out.q0 == score_partition(out.G, lift.partition).q
    assert all(r == (4, 2 * out.root, gadget.EQUAL) for r in lift.anchor_parts)


def test_witness_deficit_matches_hand_value(k4):
    inst, witness = k4
    out = gadget.build_gadget(inst, alpha_override=8)
    lift = gadget.witness_to_partition(inst, out, gadget.parts_from_labels(inst.H, witness))
    assert 1 - lift.q.fraction == Fraction(2, 9) + Fraction(1, 216)


@pytest.mark.parametrize(
    "parts,msg",
    [
        ([["a1", "s12"], ["a2", "s23", "p2", "p1"], ["a3", "s13", "s34"], ["a4", "s14", "s24"]], "vertices"),
        ([["a1", "a2", "s12"], ["p1", "s23", "p2"], ["a3", "s13", "s34"], ["a4", "s14", "s24"]], "anchor"),
        ([["a1", "s12", "p2"], ["a2", "s23", "p1"], ["a3", "s13", "s34"], ["a4", "s14", "s24"]], "connected"),
    ],
)
def test_bad_witnesses(k4, parts, msg):
    inst, _ = k4
    out = gadget.build_gadget(inst, alpha_override=8)
    with pytest.raises(gadget.WitnessError, match=msg):
        gadget.witness_to_partition(inst, out, gadget.parts_from_labels(inst.H, parts))

import json

import pytest
from hypothesis import given, settings, strategies as st

from kstab.errors import (AnnulusViolation, GluingError, InputError, KnotMismatch,
                          ManifoldMismatch, ProtocolError, SlopeMismatch, UnsupportedError)
from kstab.splitting import (FIGURE_EIGHT, UNKNOT, BoundaryLabel, ComponentSplitting,
                             DiskWitness, GeneralizedSplitting, Gluing, KnotInfo,
                             KSplittingRecord, StabilizationTrace, WeakReductionWitness,
                             all_orders, amalgamate_all, amalgamate_pair, common_stabilization,
                             connect_sum, decompose_three, dehn_twist, is_k_stabilized,
                             k_stabilize, peel_collar, realize_slope, replay, second_stabilize,
                             weak_reduce)

T23 = KnotInfo("T(2,3)", 1)


def doubly(r):
    r1, d1 = peel_collar(r)
    r2, d2 = second_stabilize(r1, d1)
    return r2, WeakReductionWitness.from_pair(d1, d2)


records = st.builds(
    lambda g, m, sep: KSplittingRecord(g, 0 if sep else m, T23, separating=sep),
    st.integers(1, 8), st.integers(-20, 20), st.booleans())


# -- records and simple moves ----------------------------------------------------
def test_record_invariants():
    with pytest.raises(InputError):
        KSplittingRecord(2, 3, separating=True)
    with pytest.raises(InputError):
        KSplittingRecord(-1, 0)
    KSplittingRecord(2, 3, manifold="L(5,1)", separating=True)  # only S3 forces slope 0


def test_knot_info_bounds():
    assert T23.h_genus_bounds == (1, 2)
    assert KnotInfo("x").h_genus_bounds is None
    with pytest.raises(InputError):
        KnotInfo("x", -1)


def test_k_stabilize_examples():
    assert k_stabilize(KSplittingRecord(1, 6, T23)) == KSplittingRecord(2, 6, T23)
    sphere = KSplittingRecord(0, 0, UNKNOT, separating=True)
    assert (k_stabilize(sphere).genus, k_stabilize(sphere).slope) == (1, 0)
    r = KSplittingRecord(3, -4, T23)
    for _ in range(5):
        r = k_stabilize(r)
    assert (r.genus, r.slope) == (8, -4)


def test_is_k_stabilized():
    v = DiskWitness("V", 0, 1)
    assert is_k_stabilized(None, v, DiskWitness("W", 3, 1))
    assert not is_k_stabilized(None, DiskWitness("V", 1, 1), DiskWitness("W", 0, 1))
    assert not is_k_stabilized(None, DiskWitness("V", 0, 2), DiskWitness("W", 0, 2))
    with pytest.raises(InputError):
        is_k_stabilized(None, v, DiskWitness("V", 0, 1))


def test_dehn_twist_examples():
    r = KSplittingRecord(2, 4, T23)
    assert dehn_twist(r, 0) == r
    assert dehn_twist(r, 1).slope - r.slope == 1
    assert dehn_twist(r, -7).slope == -3
    with pytest.raises(InputError):
        dehn_twist(KSplittingRecord(2, 0, separating=True), 1)


def test_connect_sum_examples():
    c = connect_sum(KSplittingRecord(2, -3, T23), KSplittingRecord(1, 7, UNKNOT))
    assert (c.genus, c.slope, c.knot) == (3, 4, T23)
    r = KSplittingRecord(2, 5, FIGURE_EIGHT)
    assert connect_sum(r, KSplittingRecord(1, 0)) == KSplittingRecord(3, 5, FIGURE_EIGHT)
    both = connect_sum(KSplittingRecord(1, 6, T23), KSplittingRecord(2, 0, FIGURE_EIGHT))
    assert both.knot.name == "T(2,3)#4_1"
    with pytest.raises(UnsupportedError):
        connect_sum(KSplittingRecord(1, 0, manifold="L(3,1)"), KSplittingRecord(1, 0))


@settings(max_examples=100)
@given(records, records)
def test_connect_sum_is_additive(a, b):
    c = connect_sum(a, b)
    assert (c.genus, c.slope) == (a.genus + b.genus, a.slope + b.slope)


def test_realize_slope_symbolic():
    r, n = realize_slope(FIGURE_EIGHT, 0)
    assert (r.genus, r.slope, n) == (2, 0, 0)
    r, n = realize_slope(UNKNOT, -4)
    assert (r.genus, r.slope, n) == (1, -4, 4)
    with pytest.raises(InputError):
        realize_slope(KnotInfo("mystery"), 1)


# -- pipeline pieces ------------------------------------------------------------------
def test_peel_collar_and_second_stabilize():
    r = KSplittingRecord(1, 6, T23)
    r1, d1 = peel_collar(r)
    assert (r1.genus, r1.slope) == (2, 6)
    assert d1 == DiskWitness("V", 0, 0, True)
    r2, d2 = second_stabilize(r1, d1)
    assert (r2.genus, r2.slope) == (3, 6)
    assert d2.side == "W" and d2.knot_intersections == 0
    WeakReductionWitness.from_pair(d1, d2)
    with pytest.raises(ProtocolError):
        second_stabilize(r, d1)
    with pytest.raises(ProtocolError):
        second_stabilize(r1, DiskWitness("V", 0, 0, False))


def test_genus_zero_collar():
    r1, _ = peel_collar(KSplittingRecord(0, 0, UNKNOT, separating=True))
    assert (r1.genus, r1.slope, r1.separating) == (1, 0, False)


def test_weak_reduce_requires_flag():
    r = KSplittingRecord(3, 6, T23)
    with pytest.raises(ProtocolError):
        weak_reduce(r, WeakReductionWitness((DiskWitness("V"),), (DiskWitness("W"),)))


def test_weak_reduction_witness_invariants():
    with pytest.raises(InputError):
        WeakReductionWitness((), (DiskWitness("W"),))
    with pytest.raises(InputError):
        WeakReductionWitness((DiskWitness("V", 1),), (DiskWitness("W"),))
    with pytest.raises(InputError):
        WeakReductionWitness((DiskWitness("W"),), (DiskWitness("W"),))


@pytest.mark.parametrize("g", [0, 1, 2, 3])
def test_census(g):
    r = KSplittingRecord(g, 0 if g == 0 else 6, separating=(g == 0))
    gs = weak_reduce(*doubly(r))
    kinds = [c.kind for c in gs.components]
    assert kinds == ["SolidTorus", "ProductT2xI", "CompressionBodyC3", "HandlebodyGenusG"]
    assert [c.plus_genus for c in gs.components] == [1, 2, g + 1, g]
    assert [sorted(b.genus for b in c.minus_boundaries) for c in gs.components] == [
        [1], [1, 1], sorted([1, g]), [g]]
    assert [c.carries_knot for c in gs.components] == [True, True, False, False]
    assert [g_.label.name for g_ in gs.knot_gluings] == ["T1"]


def test_amalgamate_pair_examples():
    gs = weak_reduce(*doubly(KSplittingRecord(1, 6, T23)))
    c1, c2, c3, c4 = gs.components
    comp = amalgamate_pair(c3, c4, BoundaryLabel("Sigma", 1))
    assert comp.plus_genus == 2 and [b.name for b in comp.minus_boundaries] == ["T2"]
    collar = amalgamate_pair(c1, c2, BoundaryLabel("T1", 1))
    assert (collar.plus_genus, collar.carries_knot, collar.slope) == (2, True, 6)
    h = BoundaryLabel("X", 3)
    trivial = ComponentSplitting("P", "Amalgamated", 3, (h, BoundaryLabel("Y", 3)))
    partner = ComponentSplitting("Q", "HandlebodyGenusG", 3, (h,))
    assert amalgamate_pair(trivial, partner, h).plus_genus == 3


def test_amalgamate_pair_errors():
    t = BoundaryLabel("T", 1)
    a = ComponentSplitting("A", "SolidTorus", 1, (t,), True, True, 3, ("T",))
    no_annulus = ComponentSplitting("B", "SolidTorus", 1, (t,), True, False, 3, ("T",))
    no_knot = ComponentSplitting("C", "SolidTorus", 1, (t,))
    other_slope = ComponentSplitting("D", "SolidTorus", 1, (t,), True, True, 4, ("T",))
    with pytest.raises(AnnulusViolation):
        amalgamate_pair(a, no_annulus, t)
    with pytest.raises(GluingError):
        amalgamate_pair(a, no_knot, t)
    with pytest.raises(GluingError):
        amalgamate_pair(a, other_slope, t)
    with pytest.raises(GluingError):
        amalgamate_pair(a, a, BoundaryLabel("T", 2))
    with pytest.raises(GluingError):
        amalgamate_pair(a, no_knot, BoundaryLabel("Z", 1))


def test_component_kind_invariants():
    with pytest.raises(InputError):
        ComponentSplitting("A", "SolidTorus", 2, (BoundaryLabel("T", 1),))
    with pytest.raises(InputError):
        ComponentSplitting("A", "ProductT2xI", 2, (BoundaryLabel("T", 1),))
    with pytest.raises(InputError):
        ComponentSplitting("A", "Pretzel", 2)


def test_generalized_splitting_invariants():
    t = BoundaryLabel("T", 1)
    a = ComponentSplitting("A", "SolidTorus", 1, (t,))
    b = ComponentSplitting("B", "SolidTorus", 1, (t,))
    with pytest.raises(GluingError):
        GeneralizedSplitting((a, b), ())
    with pytest.raises(GluingError):
        GeneralizedSplitting((a, b), (Gluing(BoundaryLabel("T", 2), "A", "B"),))
    gs = GeneralizedSplitting((a, b), (Gluing(t, "A", "B"),))
    assert amalgamate_all(gs).genus == 1


def test_single_component_amalgamates_to_itself():
    c = ComponentSplitting("A", "Amalgamated", 4, (), True, True, 2)
    rec = amalgamate_all(GeneralizedSplitting((c,), (), knot=T23))
    assert (rec.genus, rec.slope) == (4, 2)


def test_amalgamate_all_rejects_partial_orders():
    gs = weak_reduce(*doubly(KSplittingRecord(1, 6, T23)))
    with pytest.raises(GluingError):
        amalgamate_all(gs, ["T1", "T2"])


@settings(max_examples=100)
@given(records)
def test_round_trip_every_order(r):
    r2, w = doubly(r)
    gs = weak_reduce(r2, w)
    results = {amalgamate_all(gs, order) for order in all_orders(gs)}
    assert results == {r2}
    assert len(all_orders(gs)) == 6


@settings(max_examples=50)
@given(records)
def test_decompose_three(r):
    collar, product, complement = decompose_three(r)
    assert collar.kind == "SolidTorus" and collar.slope == r.slope
    assert product.kind == "ProductT2xI" and product.carries_knot
    assert complement.plus_genus == r.genus + 1
    assert [b.genus for b in complement.minus_boundaries] == [1]
    glued = amalgamate_pair(amalgamate_pair(collar, product, BoundaryLabel("T1", 1)),
                            complement, BoundaryLabel("T2", 1))
    assert (glued.plus_genus, glued.slope) == (r.genus + 2, r.slope)


@settings(max_examples=50)
@given(records)
def test_slope_invariance_along_moves(r):
    r1, d1 = peel_collar(k_stabilize(r))
    r2, _ = second_stabilize(r1, d1)
    assert r2.slope == r.slope


# -- common stabilization ---------------------------------------------------------------
def test_common_stabilization_example():
    a, b = KSplittingRecord(1, 6, T23), KSplittingRecord(2, 6, T23)
    rec, ta, tb = common_stabilization(a, b)
    assert (rec.genus, rec.slope) == (4, 6)
    assert replay(a, ta) == replay(b, tb) == rec


def test_common_stabilization_identical_inputs_have_minimal_traces():
    a = KSplittingRecord(3, 2, T23)
    rec, ta, tb = common_stabilization(a, a)
    assert ta == tb and len(ta) == 4
    assert rec.genus == 5


def test_common_stabilization_errors():
    a = KSplittingRecord(1, 6, T23)
    with pytest.raises(SlopeMismatch) as info:
        common_stabilization(a, KSplittingRecord(1, 7, T23))
    assert (info.value.slope_a, info.value.slope_b) == (6, 7)
    with pytest.raises(KnotMismatch):
        common_stabilization(a, KSplittingRecord(1, 6, FIGURE_EIGHT))
    with pytest.raises(ManifoldMismatch):
        common_stabilization(a, KSplittingRecord(1, 6, T23, manifold="L(7,2)"))
    with pytest.raises(InputError):
        common_stabilization(a, a, -1)


@settings(max_examples=100)
@given(records, records, st.integers(0, 3))
def test_common_stabilization_properties(a, b, extra):
    b = KSplittingRecord(b.genus, a.slope, a.knot, separating=a.separating)
    rec, ta, tb = common_stabilization(a, b, extra)
    assert rec.genus == max(a.genus, b.genus) + 2 + extra
    assert replay(a, ta).serialize() == replay(b, tb).serialize() == rec.serialize()
    swapped, tb2, ta2 = common_stabilization(b, a, extra)
    assert swapped == rec and ta2 == ta and tb2 == tb


def test_other_manifolds_are_symbolic_only():
    a = KSplittingRecord(2, 1, T23, manifold="L(5,2)")
    rec, _, _ = common_stabilization(a, KSplittingRecord(4, 1, T23, manifold="L(5,2)"))
    assert rec.manifold == "L(5,2)" and rec.genus == 6


# -- serialization ------------------------------------------------------------------------
def test_record_json_round_trip():
    r, d = peel_collar(KSplittingRecord(2, -3, T23))
    back = KSplittingRecord.from_json(json.loads(r.serialize()))
    assert back == r and back.stage == r.stage and back.witnesses == r.witnesses
    assert back.serialize() == r.serialize()


def test_malformed_record():
    with pytest.raises(InputError):
        KSplittingRecord.from_json({"slope": 1})


def test_trace_replay_is_bit_identical():
    a = KSplittingRecord(1, 6, T23)
    rec, ta, _ = common_stabilization(a, KSplittingRecord(3, 6, T23), 2)
    text = json.dumps(ta.to_json(), sort_keys=True)
    back = StabilizationTrace.from_json(json.loads(text))
    assert json.dumps(back.to_json(), sort_keys=True) == text
    assert replay(a, back).serialize() == rec.serialize()


def test_generalized_splitting_json_round_trip():
    gs = weak_reduce(*doubly(KSplittingRecord(2, 5, T23)))
    back = GeneralizedSplitting.from_json(json.loads(json.dumps(gs.to_json())))
    assert back == gs


def test_replay_rejects_bad_sequences():
    bad = StabilizationTrace.from_json({"moves": [{"kind": "WeakReduce"}]})
    with pytest.raises(ProtocolError):
        replay(KSplittingRecord(2, 1, T23), bad)
    with pytest.raises(InputError):
        StabilizationTrace.from_json({"moves": [{"kind": "Teleport"}]})


# -- geometry-backed records ----------------------------------------------------------------
@pytest.fixture(scope="module")
def geometric_trefoil():
    import kstab.fixtures as fx
    from kstab.splitting import record_from_geometry
    return record_from_geometry(fx.standard_torus(), fx.torus_knot_on_torus(2, 3, 160), T23)


def test_record_from_geometry(geometric_trefoil):
    assert (geometric_trefoil.genus, geometric_trefoil.slope) == (1, 6)
    assert not geometric_trefoil.separating


def test_geometric_k_stabilize_reverifies(geometric_trefoil):
    import numpy as np
    out = k_stabilize(geometric_trefoil, rng=np.random.default_rng(3))
    assert (out.genus, out.slope) == (2, 6)
    assert out.geometric_ref.surface.genus == 2


def test_geometric_twist_needs_single_crossing(geometric_trefoil):
    with pytest.raises(InputError):
        dehn_twist(geometric_trefoil, 1)


def test_geometric_twist_on_unknot():
    import kstab.fixtures as fx
    from kstab.splitting import record_from_geometry
    r = record_from_geometry(fx.standard_torus(), fx.torus_knot_on_torus(1, 0, 120), UNKNOT)
    out = dehn_twist(r, 5)
    assert out.slope == 5 and out.geometric_ref is not None


def test_attach_geometry_checks_consistency():
    import kstab.fixtures as fx
    from kstab.errors import EngineDisagreement
    from kstab.splitting import attach_geometry
    knot = fx.torus_knot_on_torus(1, 1, 120)
    assert attach_geometry(KSplittingRecord(1, 1), fx.standard_torus(), knot).geometric_ref
    with pytest.raises(EngineDisagreement):
        attach_geometry(KSplittingRecord(1, 2), fx.standard_torus(), knot)


def test_realize_slope_geometric_unknot():
    from kstab.fixtures import standard_torus_graph
    r, n = realize_slope(UNKNOT, 4, standard_torus_graph())
    assert (r.genus, r.slope, n) == (1, 4, 4)
    assert r.geometric_ref.surface.genus == 1


def test_realize_slope_rejects_wrong_genus_graph():
    from kstab.fixtures import dumbbell_graph
    with pytest.raises(InputError):
        realize_slope(UNKNOT, 1, dumbbell_graph())


def test_pipeline_moves_drop_geometry(geometric_trefoil):
    r1, _ = peel_collar(geometric_trefoil)
    assert r1.geometric_ref is None

"""Quick invariant suite behind ``kstab selftest``; deterministic for a given seed."""
from __future__ import annotations

import time
import traceback

import numpy as np


def _engines_agree(rng):
    from .linking import linking_number_crossings, linking_number_gauss
    from .samples import random_link_pair
    for _ in range(20):
        a, b, expect = random_link_pair(rng)
        x = linking_number_crossings(a, b, seed=int(rng.integers(1 << 30)))
        y = linking_number_gauss(a, b)
        assert x == y and abs(x) == expect, (x, y, expect)


def _symmetry(rng):
    from .linking import linking_number
    from .samples import random_link_pair
    for _ in range(10):
        a, b, _ = random_link_pair(rng)
        assert linking_number(a, b) == linking_number(b, a)
        assert linking_number(a.reversed(), b) == -linking_number(a, b)


def _subdivision(rng):
    from .linking import linking_number
    from .samples import random_link_pair
    for _ in range(10):
        a, b, _ = random_link_pair(rng)
        assert linking_number(a.subdivided(1), b.subdivided(2)) == linking_number(a, b)


def _torus_slopes(rng):
    from .fixtures import torus_knot_on_torus
    from .linking import surface_slope
    for p, q in ((1, 0), (1, 1), (2, 3)):
        assert surface_slope(torus_knot_on_torus(p, q, 120), 0.05).m == p * q


def _belt(rng):
    from .fixtures import dumbbell_belt
    from .geom.surface_curves import is_separating
    from .linking import surface_slope
    belt = dumbbell_belt()
    assert is_separating(belt)
    assert surface_slope(belt, 0.02).m == 0


def _twist(rng):
    from .fixtures import torus_knot_on_torus
    from .geom.surface_curves import dehn_twist_curve
    from .linking import surface_slope
    c = torus_knot_on_torus(1, 0, 120)
    m0 = surface_slope(c, 0.05).m
    for k in (-1, 1, 2):
        assert surface_slope(dehn_twist_curve(c, k), 0.05).m - m0 == k


def _stabilization(rng):
    from .fixtures import standard_torus, torus_knot_on_torus
    from .geom.mesh import euler_characteristic
    from .geom.stabilize import k_stabilize_random
    from .linking import surface_slope
    knot = torus_knot_on_torus(2, 3, 120)
    surface, moved, _ = k_stabilize_random(standard_torus(), knot, rng)
    surface.mesh.validate()
    assert euler_characteristic(surface.mesh) == euler_characteristic(standard_torus().mesh) - 2
    assert surface_slope(moved, 0.05).m == 6


def _meshes(rng):
    from .fixtures import dumbbell_graph, standard_torus, unknot_tunnel_graph
    from .geom.mesh import genus
    from .geom.tubes import make_tube_surface
    assert genus(standard_torus().mesh) == 1
    for graph in (dumbbell_graph(), unknot_tunnel_graph()):
        s = make_tube_surface(graph)
        s.mesh.validate()
        assert genus(s.mesh) == graph.expected_genus() == 2


def _census(rng):
    from .splitting import KSplittingRecord, decompose_three, peel_collar, second_stabilize, \
        weak_reduce, WeakReductionWitness
    for g in range(4):
        r = KSplittingRecord(g, 0, separating=(g == 0))
        r1, d1 = peel_collar(r)
        r2, d2 = second_stabilize(r1, d1)
        gs = weak_reduce(r2, WeakReductionWitness.from_pair(d1, d2))
        assert [c.kind for c in gs.components] == ["SolidTorus", "ProductT2xI",
                                                   "CompressionBodyC3", "HandlebodyGenusG"]
        assert [c.plus_genus for c in gs.components] == [1, 2, g + 1, g]
        assert [c.carries_knot for c in gs.components] == [True, True, False, False]
        assert decompose_three(r)[2].plus_genus == g + 1


def _round_trip(rng):
    from .splitting import (KSplittingRecord, WeakReductionWitness, all_orders, amalgamate_all,
                            peel_collar, second_stabilize, weak_reduce)
    for _ in range(10):
        r = KSplittingRecord(int(rng.integers(1, 6)), int(rng.integers(-9, 10)))
        r1, d1 = peel_collar(r)
        r2, d2 = second_stabilize(r1, d1)
        gs = weak_reduce(r2, WeakReductionWitness.from_pair(d1, d2))
        assert all(amalgamate_all(gs, o) == r2 for o in all_orders(gs))


def _common(rng):
    from .errors import SlopeMismatch
    from .splitting import KSplittingRecord, common_stabilization, replay
    for _ in range(10):
        m = int(rng.integers(-9, 10))
        a = KSplittingRecord(int(rng.integers(1, 6)), m)
        b = KSplittingRecord(int(rng.integers(1, 6)), m)
        extra = int(rng.integers(0, 3))
        rec, ta, tb = common_stabilization(a, b, extra)
        assert rec.genus == max(a.genus, b.genus) + 2 + extra
        assert replay(a, ta).serialize() == replay(b, tb).serialize() == rec.serialize()
        try:
            common_stabilization(a, KSplittingRecord(b.genus, m + 1), extra)
        except SlopeMismatch:
            pass
        else:
            raise AssertionError("unequal slopes were accepted")


def _connect_sum(rng):
    from .splitting import KSplittingRecord, connect_sum
    for _ in range(20):
        a = KSplittingRecord(int(rng.integers(1, 5)), int(rng.integers(-9, 10)))
        b = KSplittingRecord(int(rng.integers(1, 5)), int(rng.integers(-9, 10)))
        c = connect_sum(a, b)
        assert (c.genus, c.slope) == (a.genus + b.genus, a.slope + b.slope)


def _framing(rng):
    from .fixtures import standard_torus
    from .linking import canonical_framing
    assert canonical_framing(standard_torus()).framing_offset == 0
    twisted = standard_torus().replace_chart(standard_torus().chart(0).twisted(2))
    assert canonical_framing(twisted).framing_offset == -2


PROPERTIES = (
    ("linking engines agree with each other and with the known |lk|", _engines_agree),
    ("linking number is symmetric and odd under reversal", _symmetry),
    ("linking number is invariant under subdivision", _subdivision),
    ("(p,q) torus curves have slope p*q", _torus_slopes),
    ("dumbbell belt separates and has slope 0", _belt),
    ("meridian twists move the slope by k", _twist),
    ("K-stabilization keeps the slope and lowers chi by 2", _stabilization),
    ("tube surfaces are closed, oriented, embedded with the expected genus", _meshes),
    ("weak reduction gives the four-piece census", _census),
    ("amalgamation inverts weak reduction in every order", _round_trip),
    ("common stabilization replays and rejects unequal slopes", _common),
    ("connected sum adds genus and slope", _connect_sum),
    ("canonical framing of the torus chart", _framing),
)


def run_selftest(seed: int = 0) -> dict:
    results = []
    for k, (name, fn) in enumerate(PROPERTIES):
        rng = np.random.default_rng([seed, k])
        t = time.perf_counter()
        try:
            fn(rng)
            ok, detail = True, ""
        except Exception as exc:  # report content, not a crash
            ok, detail = False, "".join(traceback.format_exception_only(type(exc), exc)).strip()
        results.append({"property": name, "passed": ok, "detail": detail,
                        "seconds": round(time.perf_counter() - t, 3)})
    return {"seed": seed, "passed": all(r["passed"] for r in results),
            "count": len(results), "results": results}

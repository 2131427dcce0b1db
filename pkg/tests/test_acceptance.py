"""Acceptance gate: one test per criterion, each printing a single PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v -s`` to see the lines inline; they
are also repeated in the terminal summary.
"""
import time
from contextlib import contextmanager

import numpy as np
import pytest

from kstab import (KnotInfo, KSplittingRecord, SlopeMismatch,
                   amalgamate_all, common_stabilization, connect_sum, dehn_twist_curve,
                   euler_characteristic, gauss_raw, genus, is_separating,
                   linking_number_crossings, linking_number_gauss, make_torus_knot_curve,
                   realize_slope, replay, surface_slope)
from kstab.fixtures import (GRAPHS, FIGURE_EIGHT, UNKNOT, _surface, dumbbell_belt,
                            figure_eight_graph, standard_torus, standard_torus_graph,
                            torus_knot_on_torus, unknot_tunnel_graph, unknot_two_tunnels_graph)
from kstab.geom.stabilize import k_stabilize_random
from kstab.geom.surface_curves import longitude_curve, surface_pushoffs
from kstab.geom.tubes import make_tube_surface
from kstab.samples import random_link_pair
from kstab.splitting import (WeakReductionWitness, all_orders, peel_collar, record_from_geometry,
                             second_stabilize, weak_reduce, k_stabilize)

EPS = 0.05


@contextmanager
def criterion(request, number: int, title: str):
    """Print ``criterion N: PASS|FAIL`` whatever happens inside the block."""
    t0 = time.perf_counter()
    lines = request.config.stash.setdefault(REPORT, [])
    capman = request.config.pluginmanager.getplugin("capturemanager")
    try:
        yield
    except BaseException as exc:
        line = f"criterion {number}: FAIL {title} ({type(exc).__name__}: {exc})"
        raise
    else:
        line = f"criterion {number}: PASS {title} ({time.perf_counter() - t0:.1f} s)"
    finally:
        lines.append(line)
        with capman.global_and_fixture_disabled():
            print("\n" + line)


REPORT = pytest.StashKey[list]()


def test_criterion_01_torus_curve_slopes(request):
    with criterion(request, 1, "torus curve slopes equal p*q by both engines"):
        surface_slope(torus_knot_on_torus(1, 1, 120), EPS)  # compile kernels before timing
        r = standard_torus().radius
        for p, q in ((1, 0), (1, 1), (2, 3), (3, 2), (2, 5)):
            n = max(120, 24 * (p + q))
            assert n <= 500
            curve = torus_knot_on_torus(p, q, n)
            t0 = time.perf_counter()
            res = surface_slope(curve, EPS)
            elapsed = time.perf_counter() - t0
            assert res.methods_used == {"gauss", "crossings"}
            # oracle: a torus knot and its normal pushoff off the torus, counted by crossings
            k0 = make_torus_knot_curve(p, q, 2.0, r, n)
            k1 = make_torus_knot_curve(p, q, 2.0, r + 0.1, n)
            oracle = linking_number_crossings(k0, k1, seed=7)
            assert oracle == p * q, (p, q, oracle)
            assert res.m == oracle, (p, q, res.m, oracle)
            assert elapsed < 5.0, (p, q, elapsed)


def test_criterion_02_separating_belt(request):
    with criterion(request, 2, "dumbbell belt separates and has slope 0"):
        belt = dumbbell_belt()
        assert is_separating(belt)
        pair = surface_pushoffs(belt, 0.02)
        knot = belt.polyline()
        for c1, c2 in ((pair.alpha1, pair.alpha2), (knot, pair.alpha1), (knot, pair.alpha2)):
            assert linking_number_gauss(c1, c2) == 0
            assert linking_number_crossings(c1, c2) == 0
        assert surface_slope(belt, 0.02).m == 0


def test_criterion_03_twist_action(request):
    with criterion(request, 3, "meridian twists move the slope by k*sigma, one sigma"):
        base = torus_knot_on_torus(1, 0, 120)
        m0 = surface_slope(base, EPS).m
        sigmas = set()
        for k in range(-3, 4):
            if k == 0:
                continue
            d = surface_slope(dehn_twist_curve(base, k), EPS).m - m0
            assert abs(d) == abs(k), (k, d)
            sigmas.add(d // k)
        assert len(sigmas) == 1 and sigmas <= {1, -1}, sigmas


def test_criterion_04_stabilization_invariance(request):
    with criterion(request, 4, "10 random K-stabilizations of torus-(2,3) keep slope 6"):
        torus = standard_torus()
        knot = torus_knot_on_torus(2, 3, 120)
        rec = record_from_geometry(torus, knot, KnotInfo("T(2,3)", 1))
        assert (rec.genus, rec.slope) == (1, 6)
        chi0 = euler_characteristic(torus.mesh)
        for s in range(10):
            new = k_stabilize(rec, rng=np.random.default_rng([4, s]))
            mesh = new.geometric_ref.surface.mesh
            mesh.validate()
            assert euler_characteristic(mesh) == chi0 - 2
            assert new.genus == genus(mesh) == rec.genus + 1
            assert new.slope == surface_slope(new.geometric_ref.knot, EPS).m == 6


@pytest.mark.parametrize("name, graph_fn, knot, g", [
    ("unknot", standard_torus_graph, UNKNOT, 1),
    ("figure-eight", figure_eight_graph, FIGURE_EIGHT, 2),
])
def test_criterion_05_realize_slope(request, name, graph_fn, knot, g):
    with criterion(request, 5, f"realize_slope covers [-5, 5] for the {name} at genus {g}"):
        graph = graph_fn()
        base = surface_slope(longitude_curve(make_tube_surface(graph), 0), EPS).m
        for m in range(-5, 6):
            rec, count = realize_slope(knot, m, graph)
            assert (rec.genus, rec.slope) == (g, m)
            assert count == abs(m - base)
            assert rec.geometric_ref is not None
            assert genus(rec.geometric_ref.surface.mesh) == g


def test_criterion_05_connect_sum_additivity(request):
    with criterion(request, 5, "connect_sum adds genus and slope on 100 pairs"):
        rng = np.random.default_rng(5)
        for _ in range(100):
            a = KSplittingRecord(int(rng.integers(1, 8)), int(rng.integers(-20, 21)))
            b = KSplittingRecord(int(rng.integers(1, 8)), int(rng.integers(-20, 21)))
            c = connect_sum(a, b)
            assert (c.genus, c.slope) == (a.genus + b.genus, a.slope + b.slope)


def _reduced(r):
    r1, d1 = peel_collar(r)
    r2, d2 = second_stabilize(r1, d1)
    return r2, weak_reduce(r2, WeakReductionWitness.from_pair(d1, d2))


def test_criterion_06_census(request):
    with criterion(request, 6, "weak reduction gives the four-piece census for g = 0..3"):
        for g in range(4):
            _, gs = _reduced(KSplittingRecord(g, 0, separating=(g == 0)))
            comps = gs.components
            assert [c.kind for c in comps] == ["SolidTorus", "ProductT2xI",
                                               "CompressionBodyC3", "HandlebodyGenusG"]
            assert [c.plus_genus for c in comps] == [1, 2, g + 1, g]
            assert [[b.name for b in c.minus_boundaries] for c in comps] == [
                ["T1"], ["T1", "T2"], ["T2", "Sigma"], ["Sigma"]]
            assert [c.carries_knot for c in comps] == [True, True, False, False]


def test_criterion_07_round_trip(request):
    with criterion(request, 7, "amalgamation inverts weak reduction for 100 records, all orders"):
        rng = np.random.default_rng(7)
        for _ in range(100):
            g = int(rng.integers(0, 7))
            r = KSplittingRecord(g, 0 if g == 0 else int(rng.integers(-15, 16)),
                                 separating=(g == 0))
            r_hat, gs = _reduced(r)
            orders = all_orders(gs)
            assert len(orders) == 6
            outs = [amalgamate_all(gs, o) for o in orders]
            assert len({o.serialize() for o in outs}) == 1
            assert all(o == r_hat for o in outs)
            assert amalgamate_all(gs) == r_hat


def test_criterion_08_common_stabilization(request):
    with criterion(request, 8, "common stabilization: genus ledger, replay, SlopeMismatch"):
        rng = np.random.default_rng(8)
        for _ in range(100):
            m = int(rng.integers(-15, 16))
            a = KSplittingRecord(int(rng.integers(1, 8)), m)
            b = KSplittingRecord(int(rng.integers(1, 8)), m)
            extra = int(rng.integers(0, 4))
            rec, ta, tb = common_stabilization(a, b, extra)
            assert rec.genus == max(a.genus, b.genus) + 2 + extra
            assert replay(a, ta).serialize() == replay(b, tb).serialize() == rec.serialize()
        failures = 0
        for _ in range(100):
            m = int(rng.integers(-15, 16))
            a = KSplittingRecord(int(rng.integers(1, 8)), m)
            b = KSplittingRecord(int(rng.integers(1, 8)), m + int(rng.choice([-3, -2, -1, 1, 2, 3])))
            with pytest.raises(SlopeMismatch):
                common_stabilization(a, b, int(rng.integers(0, 4)))
            failures += 1
        assert failures == 100


def test_criterion_09_linking_engine_properties(request):
    with criterion(request, 9, "linking engines on 200 random link pairs"):
        rng = np.random.default_rng(9)
        for _ in range(200):
            a, b, expect = random_link_pair(rng)
            raw = gauss_raw(a, b)
            assert abs(raw - round(raw)) < 0.1
            x = linking_number_gauss(a, b)
            y = linking_number_crossings(a, b, seed=int(rng.integers(1 << 30)))
            assert x == y and abs(x) == expect
            assert linking_number_gauss(b, a) == x == linking_number_crossings(b, a)
            sa, sb = a.subdivided(int(rng.integers(1, 3))), b.subdivided(int(rng.integers(1, 3)))
            assert linking_number_gauss(sa, sb) == x == linking_number_crossings(sa, sb)


def test_criterion_10_mesh_validity(request):
    with criterion(request, 10, "tube and stabilized meshes are valid with genus 1 + #tunnels"):
        for name in GRAPHS:
            s = _surface(name, 16)
            s.mesh.validate()
            assert genus(s.mesh) == GRAPHS[name]().expected_genus()
        for graph_fn, tunnels in ((unknot_tunnel_graph, 1), (figure_eight_graph, 1),
                                  (unknot_two_tunnels_graph, 2)):
            graph = graph_fn()
            assert len(graph.arcs) == tunnels
            mesh = make_tube_surface(graph).mesh
            mesh.validate()
            assert genus(mesh) == 1 + tunnels
        surface, knot = standard_torus(), torus_knot_on_torus(2, 3, 120)
        rng = np.random.default_rng(10)
        for step in range(3):
            surface, knot, _ = k_stabilize_random(surface, knot, rng)
            surface.mesh.validate()
            assert genus(surface.mesh) == 2 + step

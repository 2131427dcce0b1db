import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kstab import kernels
from kstab.errors import EpsilonError, InputError, UnsupportedError
from kstab.geom.curves import PolyCurve3
from kstab.fixtures import dumbbell_belt, standard_torus, torus_knot_on_torus
from kstab.geom.mesh import make_sphere_mesh
from kstab.geom.surface_curves import (curve_on_tube, cut_and_count, dehn_twist_curve, edge_path,
                                       is_separating, longitude_curve, meridian_curve,
                                       surface_pushoffs)
from kstab.linking import linking_number, surface_slope

TORUS_CURVES = [(1, 0), (0, 1), (1, 1), (2, 3), (3, 2)]


@pytest.mark.parametrize("p,q", TORUS_CURVES)
def test_torus_curves_do_not_separate(p, q):
    res = cut_and_count(torus_knot_on_torus(p, q, 160))
    assert res.components == 1
    assert res.chi_after == res.chi_before == 0


def test_belt_separates_and_cutting_keeps_chi():
    res = cut_and_count(dumbbell_belt())
    assert res.components == 2
    assert res.chi_after == res.chi_before == -2


def test_chart_meridians_and_longitudes_of_dumbbell_do_not_separate():
    host = dumbbell_belt().host
    assert not is_separating(meridian_curve(host, 0, 0.3))
    assert not is_separating(longitude_curve(host, 1))


def test_edge_path_on_sphere_separates():
    m = make_sphere_mesh()
    tri = m.triangles[0]
    curve = edge_path(m, tri)
    assert is_separating(curve)


def test_edge_path_must_follow_edges():
    m = make_sphere_mesh()
    with pytest.raises(InputError):
        edge_path(m, [0, 1, 2, 3])


def test_self_crossing_chart_curve_is_rejected():
    s = standard_torus()
    t = np.arange(200) / 200
    coords = np.column_stack([2 * t, 0.1 + 4 * np.pi * t + 0.3 * np.sin(2 * np.pi * t)])
    with pytest.raises(InputError):
        curve_on_tube(s, 0, coords)


@pytest.mark.parametrize("p,q", TORUS_CURVES)
def test_pushoffs_are_disjoint_and_parallel(p, q):
    c = torus_knot_on_torus(p, q, 160)
    pair = surface_pushoffs(c, 0.05)
    k = c.polyline()
    for x, y in ((k, pair.alpha1), (k, pair.alpha2), (pair.alpha1, pair.alpha2)):
        assert kernels.curve_clearance(x.vertices, True, y.vertices, True)[0] > 1e-3
    for side in (pair.curve1, pair.curve2):
        assert (side.longitude, side.meridian) == (c.longitude, c.meridian)


def test_pushoffs_reject_large_epsilon():
    c = torus_knot_on_torus(1, 1, 120)
    with pytest.raises(EpsilonError) as info:
        surface_pushoffs(c, c.chart.radius)
    assert info.value.suggested == pytest.approx(c.chart.radius / 2)
    with pytest.raises(InputError):
        surface_pushoffs(c, 0.0)


def test_pushoffs_need_chart_curves():
    m = make_sphere_mesh()
    with pytest.raises(UnsupportedError):
        surface_pushoffs(edge_path(m, m.triangles[0]), 0.01)


def test_slope_is_stable_across_epsilon():
    c = torus_knot_on_torus(2, 3, 200)
    assert {surface_slope(c, e).m for e in (0.01, 0.05, 0.15)} == {6}


@settings(max_examples=8)
@given(st.integers(-3, 3))
def test_twist_moves_slope_by_k(k):
    c = torus_knot_on_torus(1, 0, 120)
    m0 = surface_slope(c, 0.05).m
    assert surface_slope(dehn_twist_curve(c, k), 0.05).m == m0 + k


def test_twist_changes_meridian_count_only():
    c = torus_knot_on_torus(1, 2, 120)
    t = dehn_twist_curve(c, 3)
    assert (t.longitude, t.meridian) == (1, 5)


def test_twist_keeps_linking_with_the_central_axis():
    # a long rectangle through the hole of the torus, closed far away
    loop = PolyCurve3([[0, 0, -50.0], [0, 0, 50.0], [0, 60.0, 50.0], [0, 60.0, -50.0]])
    c = torus_knot_on_torus(1, 0, 120)
    before = linking_number(loop, c.polyline())
    after = linking_number(loop, dehn_twist_curve(c, 2).polyline())
    assert abs(before) == 1 and after == before

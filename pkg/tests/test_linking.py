import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kstab import kernels, linking
from kstab.errors import (DegenerateProjection, EngineDisagreement, InputError, PrecisionError)
from kstab.fixtures import standard_torus, torus_knot_on_torus
from kstab.geom.curves import PolyCurve3, make_circle
from kstab.linking import (canonical_framing, gauss_raw, linking_number,
                           linking_number_crossings, linking_number_gauss,
                           slope_in_canonical_basis, surface_slope)
from kstab.samples import random_link_pair, winding_pair

from conftest import biot_savart

seeds = st.integers(0, 2**31 - 1)


@settings(max_examples=60)
@given(seeds)
def test_engines_agree_and_match_construction(seed):
    rng = np.random.default_rng(seed)
    a, b, expect = random_link_pair(rng)
    raw = gauss_raw(a, b)
    assert abs(raw - round(raw)) < 0.1
    x = linking_number_crossings(a, b, seed=seed)
    assert x == linking_number_gauss(a, b)
    assert abs(x) == expect


@settings(max_examples=40)
@given(seeds)
def test_symmetry_and_reversal(seed):
    a, b, _ = random_link_pair(np.random.default_rng(seed))
    lk = linking_number(a, b)
    assert linking_number(b, a) == lk
    assert linking_number(a.reversed(), b) == -lk
    assert linking_number(a.reversed(), b.reversed()) == lk


@settings(max_examples=40)
@given(seeds, st.integers(1, 2), st.integers(0, 2))
def test_subdivision_invariance(seed, ka, kb):
    a, b, _ = random_link_pair(np.random.default_rng(seed))
    assert linking_number(a.subdivided(ka), b.subdivided(kb)) == linking_number(a, b)
    assert gauss_raw(a.subdivided(ka), b) == pytest.approx(gauss_raw(a, b), abs=1e-9)


@settings(max_examples=20)
@given(seeds)
def test_projection_direction_does_not_matter(seed):
    rng = np.random.default_rng(seed)
    a, b, _ = winding_pair(rng)
    values = {linking_number_crossings(a, b, direction=rng.normal(size=3)) for _ in range(4)}
    assert len(values) == 1


def test_sign_convention_matches_quadrature():
    rng = np.random.default_rng(7)
    for q in (-2, 1, 3):
        a, b, _ = winding_pair(rng, q)
        dense_a, dense_b = a.subdivided(3), b.subdivided(3)
        oracle = biot_savart(dense_a.vertices, dense_b.vertices)
        assert linking_number(a, b) == round(oracle)


def test_axis_aligned_projection_of_planar_curves_is_retried():
    # the rectangle has sides parallel to z, so projecting along z is degenerate
    a = make_circle((0, 0, 0), 1.0, 32)
    b = PolyCurve3([[0.5, 0, -1], [0.5, 0, 1], [3, 0, 1], [3, 0, -1]])
    e1, e2, d = kernels.projection_basis((0, 0, 1))
    assert kernels.crossing_sum(a.vertices, b.vertices, d, 1e-7)[1] > 0
    lk = linking_number_crossings(a, b, direction=(0, 0, 1))
    assert lk == linking_number_gauss(a, b) and abs(lk) == 1


def test_touching_curves_are_rejected():
    a = make_circle((0, 0, 0), 1.0, 32)
    b = make_circle((2, 0, 0), 1.0, 32)
    with pytest.raises(InputError):
        linking_number(a, b)


def test_open_curves_are_rejected():
    a = PolyCurve3([[0, 0, 0], [1, 0, 0]], closed=False)
    with pytest.raises(InputError):
        linking_number(a, make_circle())


def test_bad_direction_is_rejected():
    a, b, _ = winding_pair(np.random.default_rng(0), 1)
    with pytest.raises(InputError):
        linking_number_crossings(a, b, direction=(0, 0, 0))


def test_precision_window(monkeypatch):
    a, b, _ = winding_pair(np.random.default_rng(0), 1)
    monkeypatch.setattr(kernels, "gauss_raw", lambda x, y: 0.5)
    with pytest.raises(PrecisionError):
        linking_number_gauss(a, b)


def test_degenerate_projection_after_all_attempts(monkeypatch):
    a, b, _ = winding_pair(np.random.default_rng(0), 1)
    monkeypatch.setattr(kernels, "crossing_sum", lambda *args: (0, 1))
    with pytest.raises(DegenerateProjection):
        linking_number_crossings(a, b)


def test_engine_disagreement_is_reported(monkeypatch):
    a, b, _ = winding_pair(np.random.default_rng(0), 2)
    monkeypatch.setattr(linking, "linking_number_gauss", lambda x, y: 99)
    with pytest.raises(EngineDisagreement):
        linking.linking_number(a, b)


@pytest.mark.parametrize("p,q", [(1, 0), (1, 1), (2, 3), (3, 2), (2, 5)])
def test_torus_slopes(p, q):
    res = surface_slope(torus_knot_on_torus(p, q, 200), 0.05)
    assert res.m == res.lk_pushoffs == res.lk_knot_pushoff == res.lk_knot_pushoff2 == p * q
    assert res.methods_used == frozenset({"crossings", "gauss"})


def test_reversing_the_knot_keeps_the_slope():
    c = torus_knot_on_torus(2, 3, 200)
    from kstab.geom.surface_curves import curve_on_tube
    rev = curve_on_tube(c.host, c.chart_id, c.coords[::-1])
    assert surface_slope(rev, 0.05).m == 6


def test_canonical_framing():
    s = standard_torus()
    f = canonical_framing(s)
    assert f.framing_offset == 0 and f.lk_at_zero == 0
    for k in (-1, 2):
        twisted = s.replace_chart(s.charts[0].twisted(k))
        assert canonical_framing(twisted).framing_offset == -k


def test_slope_in_canonical_basis():
    assert slope_in_canonical_basis(torus_knot_on_torus(2, 3, 200), 0.05) == 6

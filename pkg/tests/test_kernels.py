import numpy as np
import pytest
from hypothesis import given, strategies as st

from kstab import kernels
from kstab.samples import random_link_pair, winding_pair

from conftest import biot_savart


def hopf(n=200):
    t = np.arange(n) * 2 * np.pi / n
    a = np.column_stack([np.cos(t), np.sin(t), 0 * t])
    b = np.column_stack([1 + np.cos(t), 0 * t, np.sin(t)])
    return a, b


def test_hopf_gauss_matches_quadrature_oracle():
    a, b = hopf()
    oracle = biot_savart(a, b)
    # frozen from the quadrature: this configuration links with -1
    assert abs(oracle - (-1.0)) < 1e-2
    assert abs(kernels._gauss_raw_nb(a, b) - (-1.0)) < 1e-9
    assert abs(kernels._gauss_raw_np(a, b) - (-1.0)) < 1e-9


def test_gauss_coarse_polygon_is_exact():
    # a square through a triangle: exact solid angles give an integer even at low resolution
    a = np.array([[-1, -1, 0], [1, -1, 0], [1, 1, 0], [-1, 1, 0]], float)
    b = np.array([[0, 0, -1], [3, 0, -1], [0, 0, 1]], float) + [0.1, 0.2, 0]
    raw = kernels._gauss_raw_nb(a, b)
    assert abs(abs(raw) - 1) < 1e-12
    assert raw == pytest.approx(kernels._gauss_raw_np(a, b), abs=1e-12)


@given(st.integers(0, 10_000))
def test_backends_agree_on_random_pairs(seed):
    rng = np.random.default_rng(seed)
    a, b, _ = random_link_pair(rng)
    A, B = a.vertices, b.vertices
    assert kernels._gauss_raw_nb(A, B) == pytest.approx(kernels._gauss_raw_np(A, B), abs=1e-9)
    d = rng.normal(size=3)
    e1, e2, dd = kernels.projection_basis(d)
    assert kernels._crossings_nb(A, B, e1, e2, dd, 1e-7) == tuple(
        int(x) for x in kernels._crossings_np(A, B, e1, e2, dd, 1e-7))
    a0, a1 = kernels.segments(A, True)
    b0, b1 = kernels.segments(B, True)
    assert kernels._cross_clearance_nb(a0, a1, b0, b1)[0] == pytest.approx(
        kernels._cross_clearance_np(a0, a1, b0, b1)[0], abs=1e-12)
    assert kernels._self_clearance_nb(A, True)[0] == pytest.approx(
        kernels._self_clearance_np(A, True)[0], abs=1e-12)


def test_crossing_sum_is_twice_linking_number(rng):
    for q in (-3, -1, 0, 2):
        a, b, _ = winding_pair(rng, q)
        raw = kernels.gauss_raw(a.vertices, b.vertices)
        total, degenerate = kernels.crossing_sum(a.vertices, b.vertices, rng.normal(size=3), 1e-7)
        assert degenerate == 0
        assert total == 2 * round(raw)


def _sampled_seg_distance(p1, q1, p2, q2, n=400):
    s = np.linspace(0, 1, n)
    x = p1 + s[:, None] * (q1 - p1)
    y = p2 + s[:, None] * (q2 - p2)
    return np.min(np.linalg.norm(x[:, None] - y[None], axis=-1))


@given(st.integers(0, 10_000))
def test_segment_distance_against_sampling(seed):
    rng = np.random.default_rng(seed)
    p1, q1, p2, q2 = rng.normal(size=(4, 3))
    exact = kernels._seg_seg_nb(p1, q1, p2, q2)
    brute = _sampled_seg_distance(p1, q1, p2, q2)
    assert exact <= brute + 1e-12
    assert brute - exact < 0.02
    assert exact == pytest.approx(float(kernels._seg_seg_np(p1[None], q1[None], p2[None], q2[None])[0]),
                                  abs=1e-12)


def test_parallel_and_degenerate_segments():
    p = np.array([0.0, 0, 0])
    assert kernels._seg_seg_nb(p, p + [1, 0, 0], p + [0, 1, 0], p + [1, 1, 0]) == pytest.approx(1.0)
    assert kernels._seg_seg_nb(p, p, p + [0, 0, 2], p + [0, 0, 2]) == pytest.approx(2.0)
    assert kernels._seg_seg_nb(p, p + [1, 0, 0], p + [2, 0, 0], p + [3, 0, 0]) == pytest.approx(1.0)


def test_triangle_pair_distance_and_crossing():
    t1 = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], float)
    t2 = t1 + [0, 0, 0.5]
    t3 = np.array([[0.2, 0.2, -1], [0.3, 0.2, 1], [0.2, 0.3, 1]], float)
    tris = np.stack([t1, t2, t3])
    pairs = np.array([[0, 1], [0, 2], [1, 2]])
    for fn in (kernels._tri_pair_nb, kernels._tri_pair_np):
        d = fn(tris, pairs)
        assert d[0] == pytest.approx(0.5)
        assert d[1] == 0.0
        assert d[2] == 0.0


def test_plane_self_crossing_backends():
    t = np.arange(120) / 120
    # (2,3) line on the unit torus: embedded
    good = np.column_stack([2 * t, 3 * t])
    good_end = np.vstack([good[1:], good[-1:] + [2 / 120, 3 / 120]])
    # figure-eight shaped loop in one fundamental domain: crosses itself
    loop = np.column_stack([0.5 + 0.3 * np.sin(2 * np.pi * t), 0.5 + 0.1 * np.sin(4 * np.pi * t)])
    loop_end = np.vstack([loop[1:], loop[:1]])
    for a, b, expect_hit in ((good, good_end, False), (loop, loop_end, True)):
        hit_nb = kernels._plane_cross_nb(a, b, True, 1e-12)
        hit_np = kernels._plane_cross_np(a, b, True, 1e-12)
        assert (hit_nb[0] >= 0) == (hit_np[0] >= 0) == expect_hit


def test_backend_flag_reported():
    from kstab._accel import backend
    assert backend() in ("numba", "numpy")

"""Compare the numba kernels with their numpy fallbacks.

Run with ``python3 benchmarks/bench_kernels.py``.  Both variants are called
directly, so the KSTAB_NO_NUMBA flag does not matter here.  Each pair of
results is checked for agreement before timing.
"""
import argparse
import time

import numpy as np

from kstab import kernels
from kstab._accel import USE_NUMBA
from kstab.fixtures import torus_knot_on_torus
from kstab.geom.surface_curves import _segments_plane, surface_pushoffs
from kstab.linking import _random_direction


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--n", type=int, default=400, help="samples of the (2,3) torus curve")
    args = ap.parse_args()
    if not USE_NUMBA:
        print("KSTAB_NO_NUMBA is set; the numba variants still run directly below")

    knot = torus_knot_on_torus(2, 3, args.n)
    pair = surface_pushoffs(knot, 0.05)
    a, b = pair.alpha1.vertices, pair.alpha2.vertices
    d = _random_direction(np.random.default_rng(1))
    e1, e2, dd = kernels.projection_basis(d)
    a0, a1 = kernels.segments(a, True)
    b0, b1 = kernels.segments(b, True)

    pa, pb = _segments_plane(knot.chart, knot.coords)
    cases = [
        ("gauss_raw", lambda: kernels._gauss_raw_nb(a, b), lambda: kernels._gauss_raw_np(a, b)),
        ("crossings", lambda: kernels._crossings_nb(a, b, e1, e2, dd, 1e-7),
         lambda: kernels._crossings_np(a, b, e1, e2, dd, 1e-7)),
        ("self_clearance", lambda: kernels._self_clearance_nb(a, True),
         lambda: kernels._self_clearance_np(a, True)),
        ("curve_clearance", lambda: kernels._cross_clearance_nb(a0, a1, b0, b1),
         lambda: kernels._cross_clearance_np(a0, a1, b0, b1)),
        ("plane_self_crossing", lambda: kernels._plane_cross_nb(pa, pb, True, 1e-12),
         lambda: kernels._plane_cross_np(pa, pb, True, 1e-12)),
    ]
    print(f"curves: {len(a)} and {len(b)} vertices")
    print(f"{'kernel':<22}{'numba s':>12}{'numpy s':>12}{'speedup':>10}")
    for name, nb, npf in cases:
        nb()  # compile
        t_nb, r_nb = best_of(nb, args.repeat)
        t_np, r_np = best_of(npf, args.repeat)
        x, y = np.ravel(np.asarray(r_nb, dtype=float))[0], np.ravel(np.asarray(r_np, dtype=float))[0]
        assert abs(x - y) <= 1e-6 * max(1.0, abs(x)), (name, r_nb, r_np)
        print(f"{name:<22}{t_nb:>12.4f}{t_np:>12.4f}{t_np / t_nb:>10.1f}")


if __name__ == "__main__":
    main()

"""Linking numbers of PL curves and surface slopes of knots on surfaces.

Sign convention (used by both engines): at a crossing of the projections
of segment ``p1 + a*t1`` (first curve) and ``p2 + b*t2`` (second curve),
the sign is ``sign det[t1, t2, p1 - p2]`` where ``p1``, ``p2`` are the two
points over the crossing.  This agrees with the Gauss integral
``(1/4pi) ∮∮ (r1 - r2)·(dr1 × dr2) / |r1 - r2|^3``, so a right-handed Hopf
link has linking number +1.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .constants import GAUSS_WINDOW, PROJECTION_ATTEMPTS, TOL_GEOM, TOL_PROJ
from .errors import (DegenerateProjection, EngineDisagreement, InputError,
                     PrecisionError)
from .geom.charts import TWO_PI
from .geom.curves import PolyCurve3
from .geom.surface_curves import (CurveOnSurface, PushoffPair, free_column,
                                  longitude_curve, surface_pushoffs)
from .geom.tubes import TubeSurface

ENGINES = ("crossings", "gauss")


def _check_pair(c1: PolyCurve3, c2: PolyCurve3) -> None:
    if not (c1.closed and c2.closed):
        raise InputError("linking numbers need closed curves")
    d = kernels.curve_clearance(c1.vertices, True, c2.vertices, True)[0]
    if d <= TOL_GEOM:
        raise InputError(f"curves are not disjoint (distance {d:.3g})")


def gauss_raw(c1: PolyCurve3, c2: PolyCurve3) -> float:
    """Unrounded Gauss linking integral, exact for polygons."""
    _check_pair(c1, c2)
    return kernels.gauss_raw(c1.vertices, c2.vertices)


def linking_number_gauss(c1: PolyCurve3, c2: PolyCurve3) -> int:
    raw = gauss_raw(c1, c2)
    m = round(raw)
    if abs(raw - m) >= GAUSS_WINDOW:
        raise PrecisionError(f"Gauss sum {raw:.4f} is not within {GAUSS_WINDOW} of an integer")
    return int(m)


def _random_direction(rng: np.random.Generator) -> np.ndarray:
    while True:
        v = rng.normal(size=3)
        n = np.linalg.norm(v)
        if n > 1e-3:
            return v / n


def linking_number_crossings(c1: PolyCurve3, c2: PolyCurve3, direction="auto",
                             seed: int = 0) -> int:
    """Half the signed crossing count of the two projections.

    A projection direction is degenerate when some segment pair is nearly
    parallel to it or a crossing lands near a segment end; such directions
    are replaced by fresh seeded random ones.
    """
    _check_pair(c1, c2)
    rng = np.random.default_rng(seed)
    a, b = c1.vertices, c2.vertices
    for attempt in range(PROJECTION_ATTEMPTS):
        if attempt == 0 and not (isinstance(direction, str) and direction == "auto"):
            d = np.asarray(direction, dtype=float)
            if d.shape != (3,) or not np.linalg.norm(d) > 0:
                raise InputError("projection direction must be a nonzero 3-vector")
            d = d / np.linalg.norm(d)
        else:
            d = _random_direction(rng)
        total, degenerate = kernels.crossing_sum(a, b, d, TOL_PROJ)
        if degenerate == 0 and total % 2 == 0:
            return int(total // 2)
    raise DegenerateProjection(f"no generic projection found in {PROJECTION_ATTEMPTS} attempts")


def linking_number(c1: PolyCurve3, c2: PolyCurve3, seed: int = 0) -> int:
    """Linking number confirmed by both engines."""
    x = linking_number_crossings(c1, c2, seed=seed)
    y = linking_number_gauss(c1, c2)
    if x != y:
        raise EngineDisagreement(f"crossing count gives {x}, Gauss sum gives {y}")
    return x


# -- surface slopes --------------------------------------------------------
@dataclass(frozen=True)
class SlopeResult:
    m: int
    lk_pushoffs: int
    lk_knot_pushoff: int
    lk_knot_pushoff2: int
    methods_used: frozenset = field(default_factory=lambda: frozenset(ENGINES))
    epsilon: float = 0.0

    def to_json(self) -> dict:
        return {"slope": self.m, "lk_pushoffs": self.lk_pushoffs,
                "lk_knot_pushoff": self.lk_knot_pushoff, "engines": sorted(self.methods_used),
                "epsilon": self.epsilon}


def _both(c1, c2, seed, label):
    x = linking_number_crossings(c1, c2, seed=seed)
    y = linking_number_gauss(c1, c2)
    if x != y:
        raise EngineDisagreement(f"{label}: crossing count gives {x}, Gauss sum gives {y}")
    return x


def slope_from_pushoffs(knot: PolyCurve3, pair: PushoffPair, seed: int = 0) -> SlopeResult:
    l12 = _both(pair.alpha1, pair.alpha2, seed, "lk(alpha1, alpha2)")
    lk1 = _both(knot, pair.alpha1, seed, "lk(K, alpha1)")
    lk2 = _both(knot, pair.alpha2, seed, "lk(K, alpha2)")
    if not l12 == lk1 == lk2:
        raise EngineDisagreement(
            f"pushoff identity fails: lk(a1,a2)={l12}, lk(K,a1)={lk1}, lk(K,a2)={lk2}")
    return SlopeResult(l12, l12, lk1, lk2, frozenset(ENGINES), pair.epsilon)


def surface_slope(curve: CurveOnSurface, epsilon: float, seed: int = 0) -> SlopeResult:
    """Surface slope: the linking number of the two in-surface pushoffs."""
    pair = surface_pushoffs(curve, epsilon)
    return slope_from_pushoffs(curve.polyline(), pair, seed)


def slope_in_canonical_basis(curve: CurveOnSurface, epsilon: float, seed: int = 0) -> int:
    """Slope as the integer ``p/q`` with ``q = 1`` in the (meridian, preferred longitude) basis."""
    m = surface_slope(curve, epsilon, seed).m
    num, den = int(m), 1
    assert den == 1 and num == m
    return num


# -- canonical framing -------------------------------------------------------
@dataclass(frozen=True)
class CanonicalFraming:
    chart_id: int
    framing_offset: int
    lk_at_zero: int


def canonical_framing(surface: TubeSurface, chart_id: int = 0, seed: int = 0) -> CanonicalFraming:
    """Meridional offset ``f`` making the chart longitude a preferred longitude.

    ``lk(core, pushoff_f) = lk(core, pushoff_0) + f``, so ``f = -lk(core, pushoff_0)``;
    the zero is then checked directly.
    """
    chart = surface.chart(chart_id)
    if not chart.periodic:
        raise InputError("canonical framing needs a closed core")
    core = chart.core
    theta0 = (free_column(chart) + 0.5) * TWO_PI / chart.n_circ
    p0 = longitude_curve(surface, chart_id, 0, theta0).polyline()
    w = _both(core, p0, seed, "lk(core, pushoff_0)")
    f = -w
    pf = longitude_curve(surface, chart_id, f, theta0).polyline()
    check = _both(core, pf, seed, "lk(core, pushoff_f)")
    if check != 0:
        raise EngineDisagreement(f"framing correction failed: lk = {check} at f = {f}")
    return CanonicalFraming(chart_id, f, w)

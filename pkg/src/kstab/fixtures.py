"""Named test geometries: spatial graphs, their tube surfaces and standard knots on them."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InputError
from .geom.curves import PolyCurve3, SpatialGraph, make_circle
from .geom.mesh import SurfaceMesh, make_sphere_mesh
from .geom.surface_curves import CurveOnSurface, longitude_curve, meridian_curve, torus_curve
from .geom.tubes import TubeSurface, make_tube_surface
from .splitting import FIGURE_EIGHT, UNKNOT, KnotInfo


@dataclass(frozen=True, eq=False)
class Fixture:
    name: str
    graph: SpatialGraph | None
    surface: TubeSurface | SurfaceMesh
    curve: CurveOnSurface | None
    knot: KnotInfo


def standard_torus_graph() -> SpatialGraph:
    return SpatialGraph([make_circle((0.0, 0.0, 0.0), 2.0, 64)])


def dumbbell_graph() -> SpatialGraph:
    c1 = make_circle((-2.0, 0.0, 0.0), 1.0, 64)
    c2 = make_circle((2.0, 0.0, 0.0), 1.0, 64)
    x = np.linspace(-1.0, 1.0, 9)
    arc = PolyCurve3(np.column_stack([x, np.zeros(9), np.zeros(9)]), closed=False)
    return SpatialGraph([c1, c2], [arc])


def unknot_tunnel_graph() -> SpatialGraph:
    t = np.linspace(0.0, np.pi, 33)
    arc = PolyCurve3(np.column_stack([2 * np.cos(t), np.zeros_like(t), 2 * np.sin(t)]), closed=False)
    return SpatialGraph([make_circle((0.0, 0.0, 0.0), 2.0, 64)], [arc])


def unknot_two_tunnels_graph() -> SpatialGraph:
    """Round unknot with an arch over it and a second arch under it, in perpendicular planes."""
    t = np.linspace(0.0, np.pi, 33)
    over = PolyCurve3(np.column_stack([2 * np.cos(t), np.zeros_like(t), 2 * np.sin(t)]), closed=False)
    under = PolyCurve3(np.column_stack([np.zeros_like(t), 2 * np.cos(t), -2 * np.sin(t)]), closed=False)
    return SpatialGraph([make_circle((0.0, 0.0, 0.0), 2.0, 64)], [over, under])


def figure_eight_curve(n: int = 360) -> PolyCurve3:
    t = np.arange(n) * (2 * np.pi / n)
    r = 2 + np.cos(2 * t)
    return PolyCurve3(np.column_stack([r * np.cos(3 * t), r * np.sin(3 * t), np.sin(4 * t)]))


def figure_eight_graph(n: int = 360) -> SpatialGraph:
    """Figure-eight knot plus one unknotting tunnel joining the two strands of a crossing."""
    knot = figure_eight_curve(n)
    a = knot.vertices[n // 12]
    b = knot.vertices[5 * n // 12]
    arc = PolyCurve3(np.linspace(a, b, 13), closed=False)
    return SpatialGraph([knot], [arc])


@lru_cache(maxsize=None)
def _surface(name: str, n_circ: int) -> TubeSurface:
    return make_tube_surface(GRAPHS[name](), n_circ=n_circ)


GRAPHS = {
    "torus": standard_torus_graph,
    "dumbbell": dumbbell_graph,
    "unknot_tunnel": unknot_tunnel_graph,
    "figure_eight": figure_eight_graph,
    "unknot_two_tunnels": unknot_two_tunnels_graph,
}


def standard_torus(n_circ: int = 16) -> TubeSurface:
    return _surface("torus", n_circ)


def torus_knot_on_torus(p: int, q: int, n: int = 240, theta0: float = 0.1) -> CurveOnSurface:
    return torus_curve(standard_torus(), p, q, n, theta0=theta0)


def dumbbell_belt() -> CurveOnSurface:
    """Meridian of the connecting tube: a separating curve on the genus-2 dumbbell."""
    return meridian_curve(_surface("dumbbell", 16), 2, 0.5)


def fixture(name: str) -> Fixture:
    """Look up a named fixture; ``torus-P-Q`` selects a torus curve."""
    if name.startswith("torus-") or name.startswith("torus_"):
        try:
            p, q = (int(x) for x in name[6:].replace("_", "-").split("-"))
        except ValueError:
            raise InputError(f"bad torus fixture {name!r}; use torus-P-Q") from None
        return Fixture(name, standard_torus_graph(), standard_torus(),
                       torus_knot_on_torus(p, q), KnotInfo(f"T({p},{q})") if min(p, q) > 1 else UNKNOT)
    if name in ("torus", "unknot"):
        s = standard_torus()
        return Fixture(name, standard_torus_graph(), s, longitude_curve(s, 0), UNKNOT)
    if name in ("dumbbell", "dumbbell-belt", "dumbbell_belt"):
        belt = dumbbell_belt()
        return Fixture(name, dumbbell_graph(), belt.host, belt, UNKNOT)
    if name in ("unknot-tunnel", "unknot_tunnel"):
        s = _surface("unknot_tunnel", 16)
        return Fixture(name, unknot_tunnel_graph(), s, longitude_curve(s, 0), UNKNOT)
    if name in ("figure-eight", "figure_eight", "4_1"):
        s = _surface("figure_eight", 16)
        return Fixture(name, figure_eight_graph(), s, longitude_curve(s, 0), FIGURE_EIGHT)
    if name == "sphere":
        return Fixture(name, None, make_sphere_mesh(), None, UNKNOT)
    raise InputError(f"unknown fixture {name!r}")


FIXTURE_NAMES = ("torus", "torus-P-Q", "dumbbell-belt", "unknot-tunnel", "figure-eight", "sphere")

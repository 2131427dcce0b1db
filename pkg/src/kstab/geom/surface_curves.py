"""Curves drawn on tube surfaces, and what can be done with them."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .. import kernels
from ..constants import TOL_GEOM
from ..errors import (EpsilonError, InputError, MeshError, RefinementError,
                      UnsupportedError)
from .charts import TWO_PI, TubeChart
from .curves import PolyCurve3
from .mesh import SurfaceMesh, euler_characteristic
from .tubes import TubeSurface

_MERGE = 10 * TOL_GEOM


@dataclass(frozen=True, eq=False)
class CurveOnSurface:
    """A closed curve on a surface.

    Tube curves carry lifted label coordinates on one chart; their geometry
    is the chart image, refined so that every segment lies in one triangle.
    Edge paths are closed walks along mesh edges.
    """

    host: object                      # TubeSurface, or SurfaceMesh for edge paths
    chart_id: int | None = None
    coords: np.ndarray | None = None  # (n, 2) lifted label coordinates
    path: tuple | None = None         # closed vertex walk
    longitude: int = 0
    meridian: int = 0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def is_tube(self) -> bool:
        return self.coords is not None

    @property
    def mesh(self) -> SurfaceMesh:
        return self.host.mesh if isinstance(self.host, TubeSurface) else self.host

    @property
    def chart(self) -> TubeChart:
        if not self.is_tube:
            raise InputError("edge-path curves have no chart")
        return self.host.chart(self.chart_id)

    def base_coords(self) -> np.ndarray:
        return self.chart.to_base(self.coords)

    def refinement(self, strict: bool = False):
        key = ("ref", strict)
        if key not in self._cache:
            self._cache[key] = self.chart.refine(self.base_coords(), strict=strict)
        return self._cache[key]

    def polyline(self) -> PolyCurve3:
        """The curve as a PL curve lying exactly on the host mesh."""
        if "poly" not in self._cache:
            if self.is_tube:
                pts = self.refinement().points3d()
            else:
                pts = self.mesh.vertices[list(self.path)]
            self._cache["poly"] = PolyCurve3(_merge_close(pts), closed=True)
        return self._cache["poly"]

    def rehosted(self, host) -> "CurveOnSurface":
        """Same chart coordinates on an updated surface."""
        if self.is_tube:
            return curve_on_tube(host, self.chart_id, self.coords, check=False)
        return edge_path(host.mesh if isinstance(host, TubeSurface) else host, self.path)

    def to_json(self) -> dict:
        if self.is_tube:
            return {"chart": int(self.chart_id), "coords": self.coords.tolist()}
        return {"path": [int(v) for v in self.path]}


def _merge_close(pts: np.ndarray) -> np.ndarray:
    keep = [0]
    for k in range(1, len(pts)):
        if np.linalg.norm(pts[k] - pts[keep[-1]]) > _MERGE:
            keep.append(k)
    if len(keep) > 1 and np.linalg.norm(pts[keep[-1]] - pts[keep[0]]) <= _MERGE:
        keep.pop()
    return pts[keep]


# -- construction ------------------------------------------------------------
def _segments_plane(chart: TubeChart, lifted: np.ndarray):
    a = np.array(lifted, dtype=float)
    step = chart.closing_step(a)
    b = np.vstack([a[1:], a[-1:] + step])
    a[:, 1] /= TWO_PI
    b[:, 1] /= TWO_PI
    return a, b


def chart_self_crossing(chart: TubeChart, lifted: np.ndarray, tol: float = 1e-12):
    """First pair of non-adjacent segments that meet in the chart, or ``None``.

    Chart coordinates are periodic in theta, and in ``s`` on circle charts,
    so every pair is tested against nearby lattice translates.
    """
    a, b = _segments_plane(chart, lifted)
    return kernels.plane_self_crossing(a, b, chart.periodic, tol)


def curve_on_tube(surface: TubeSurface, chart, coords, *, check: bool = True) -> CurveOnSurface:
    """Place a closed curve given by label coordinates ``(s, theta)`` on a chart."""
    chart_id = chart.chart_id if isinstance(chart, TubeChart) else int(chart)
    ch = surface.chart(chart_id)
    c = np.asarray(coords, dtype=float)
    if c.ndim != 2 or c.shape[1] != 2 or len(c) < 3:
        raise InputError("a chart curve needs at least three (s, theta) pairs")
    if not np.all(np.isfinite(c)):
        raise InputError("chart coordinates must be finite")
    lifted = ch.lift(c)
    total = lifted[-1] + ch.closing_step(lifted) - lifted[0]
    longitude = int(round(total[0])) if ch.periodic else 0
    meridian = int(round(total[1] / TWO_PI))
    if check:
        bad = chart_self_crossing(ch, lifted)
        if bad is not None:
            raise InputError(f"chart curve crosses itself (segments {bad[0]} and {bad[1]})")
    curve = CurveOnSurface(surface, chart_id, lifted, None, longitude, meridian)
    if check:
        try:
            curve.polyline()
        except RefinementError as exc:
            raise InputError(f"chart curve is not on the surface: {exc}") from None
    return curve


def edge_path(mesh: SurfaceMesh, path) -> CurveOnSurface:
    path = tuple(int(v) for v in path)
    if len(path) > 1 and path[0] == path[-1]:
        path = path[:-1]
    if len(path) < 3 or len(set(path)) != len(path):
        raise InputError("an edge path must visit at least three distinct vertices, each once")
    faces = mesh.edge_faces()
    for u, v in zip(path, path[1:] + path[:1]):
        if (min(u, v), max(u, v)) not in faces:
            raise InputError(f"({u}, {v}) is not a mesh edge")
    return CurveOnSurface(mesh, path=path)


def free_column(chart: TubeChart) -> int:
    """A column of cells that is live along the whole chart, far from removed cells."""
    cols = chart.live_columns()
    if len(cols) == 0:
        raise InputError(f"chart {chart.chart_id} has no fully live column")
    live = np.zeros(chart.n_circ, dtype=bool)
    live[cols] = True
    # prefer the centre of the longest cyclic run
    best, best_len = int(cols[0]), -1
    C = chart.n_circ
    for j in cols:
        if live[(j - 1) % C]:
            continue
        run = 0
        while run < C and live[(j + run) % C]:
            run += 1
        if run > best_len:
            best, best_len = (j + run // 2) % C, run
    return int(best)


def longitude_curve(surface: TubeSurface, chart_id: int = 0, meridians: int = 0,
                    theta0: float | None = None, samples: int | None = None) -> CurveOnSurface:
    """The chart curve ``(t, theta0 + 2*pi*meridians*t)``, ``t in [0, 1)``."""
    ch = surface.chart(chart_id)
    if not ch.periodic:
        raise InputError("longitudes live on circle charts")
    if theta0 is None:
        theta0 = (free_column(ch) + 0.5) * TWO_PI / ch.n_circ
    n = samples or max(2 * ch.n_rings, 24 * (abs(meridians) + 1))
    t = (np.arange(n) + 0.5) / n
    coords = np.column_stack([t, theta0 + TWO_PI * meridians * t])
    return curve_on_tube(surface, chart_id, coords)


def meridian_curve(surface: TubeSurface, chart_id: int, s0: float, samples: int = 48) -> CurveOnSurface:
    th = np.arange(samples) * (TWO_PI / samples)
    return curve_on_tube(surface, chart_id, np.column_stack([np.full(samples, s0), th]))


def torus_curve(surface: TubeSurface, p: int, q: int, n: int, chart_id: int = 0,
                theta0: float = 0.0) -> CurveOnSurface:
    """The ``(p, q)`` curve ``s = p*t, theta = theta0 + 2*pi*q*t`` on a circle chart."""
    t = np.arange(n) / n
    return curve_on_tube(surface, chart_id, np.column_stack([p * t, theta0 + TWO_PI * q * t]))


# -- separation by cut-and-count ----------------------------------------------
@dataclass(frozen=True)
class CutResult:
    components: int
    chi_before: int
    chi_after: int
    crossings: int


def _beta(corners, edge) -> float:
    va, vb, t = edge
    for k in range(3):
        c0, c1 = corners[k], corners[(k + 1) % 3]
        if (c0, c1) == (va, vb):
            return k + t
        if (c0, c1) == (vb, va):
            return k + 1.0 - t
    raise MeshError("crossing edge does not bound its triangle")


class _TriangleRegions:
    """Regions of one triangle cut by non-crossing chords between boundary points."""

    def __init__(self, chords):
        pts = sorted(b for ch in chords for b in ch)
        self.points = np.array(pts)
        sigs = []
        for q in range(len(pts)):
            lo = pts[q]
            hi = pts[q + 1] if q + 1 < len(pts) else pts[0] + 3.0
            mid = (lo + hi) / 2 % 3.0
            sigs.append(tuple(min(c) < mid < max(c) for c in chords))
        uniq = sorted(set(sigs))
        self.arc_region = [uniq.index(s) for s in sigs]
        self.n_regions = len(uniq)
        if self.n_regions != len(chords) + 1:
            raise MeshError("curve pieces inside a triangle cross each other")

    def region_at(self, beta: float) -> int:
        q = int(np.searchsorted(self.points, beta)) - 1
        return self.arc_region[q % len(self.points)]


def cut_and_count(curve: CurveOnSurface, attempts: int = 8) -> CutResult:
    """Cut the host mesh along the curve and count connected components."""
    mesh = curve.mesh
    chi = euler_characteristic(mesh)
    if not curve.is_tube:
        path = curve.path
        cut = [(u, v) for u, v in zip(path, path[1:] + path[:1])]
        labels = mesh.face_components(cut)
        # each cut edge is doubled along with its endpoints: chi unchanged
        return CutResult(int(labels.max()) + 1, chi, chi, 0)
    last = None
    for attempt in range(attempts):
        shift = np.array([0.6180339887, 0.4142135623]) * 1e-7 * (attempt + 1)
        shift[1] *= TWO_PI / curve.chart.n_circ * 10
        base = curve.base_coords() + shift
        try:
            ref = curve.chart.refine(base, strict=True)
            return _cut_refined(mesh, curve.chart, ref, chi)
        except RefinementError as exc:
            last = exc
    raise RefinementError(f"could not put the curve in general position: {last}")


def _cut_refined(mesh: SurfaceMesh, chart: TubeChart, ref, chi: int) -> CutResult:
    edges = ref.edges
    m = len(edges)
    crossing_idx = [k for k in range(m) if edges[k] is not None]
    n_tris = len(mesh.triangles)
    if not crossing_idx:
        # the curve bounds a disk inside one triangle
        return CutResult(2, chi, chi, 0)
    start = crossing_idx[0]
    order = [(start + k) % m for k in range(m)]
    pieces: dict[int, list] = {}
    corners_of: dict[int, tuple] = {}
    k = 0
    while k < m:
        a = order[k]
        i, j, half = ref.seg_tri[a]
        tri = int(chart.cell_tris[i, j, half])
        corners = chart.triangle_vertices(i, j, half)
        corners_of[tri] = corners
        k += 1
        while k < m and edges[order[k]] is None:
            k += 1
        b = order[k % m]
        pieces.setdefault(tri, []).append((_beta(corners, edges[a]), _beta(corners, edges[b])))
    regions = {tri: _TriangleRegions(ch) for tri, ch in pieces.items()}
    offset = np.zeros(n_tris + 1, dtype=np.int64)
    counts = np.ones(n_tris, dtype=np.int64)
    for tri, reg in regions.items():
        counts[tri] = reg.n_regions
    offset[1:] = np.cumsum(counts)

    on_edge: dict[tuple, list] = {}
    for e in edges:
        if e is not None:
            on_edge.setdefault((e[0], e[1]), []).append(e[2])

    def node(tri, va, vb, t):
        reg = regions.get(tri)
        if reg is None:
            return offset[tri]
        return offset[tri] + reg.region_at(_beta(corners_of[tri], (va, vb, t)))

    rows, cols = [], []
    for (va, vb), faces in mesh.edge_faces().items():
        f1, f2 = faces
        ts = sorted(on_edge.get((va, vb), ()))
        bounds = [0.0, *ts, 1.0]
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            tm = (lo + hi) / 2
            rows.append(node(f1, va, vb, tm))
            cols.append(node(f2, va, vb, tm))
    total = int(offset[-1])
    graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(total, total))
    n_comp = connected_components(graph, directed=False)[0]
    n_cross = len(crossing_idx)
    n_pieces = sum(len(p) for p in pieces.values())
    v_cut = mesh.n_vertices + 2 * m
    e_cut = len(mesh.edges) + n_cross + 2 * m
    f_cut = n_tris + n_pieces
    return CutResult(int(n_comp), chi, v_cut - e_cut + f_cut, n_cross)


def is_separating(curve: CurveOnSurface) -> bool:
    """True iff cutting the surface along the curve leaves two pieces."""
    return cut_and_count(curve).components == 2


# -- pushoffs -----------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class PushoffPair:
    alpha1: PolyCurve3
    alpha2: PolyCurve3
    epsilon: float
    curve1: CurveOnSurface | None = None
    curve2: CurveOnSurface | None = None


def _offset_coords(chart: TubeChart, base: np.ndarray, eps: float) -> np.ndarray:
    """Per-vertex parameter offsets moving ``eps`` along (surface normal x tangent)."""
    n = len(base)
    closing = base[-1] + chart.closing_step(base)
    nxt = np.vstack([base[1:], closing[None]])
    prev_closing = base[0] - chart.closing_step(base)
    prv = np.vstack([prev_closing[None], base[:-1]])
    delta = np.empty_like(base)
    for k in range(n):
        J = chart.jacobian(base[k, 0], base[k, 1])
        normal = np.cross(J[:, 0], J[:, 1])
        tangent = J @ (nxt[k] - prv[k])
        side = np.cross(normal, tangent)
        norm = np.linalg.norm(side)
        if norm == 0:
            raise InputError("degenerate tangent on chart curve")
        delta[k] = np.linalg.lstsq(J, eps * side / norm, rcond=None)[0]
    return delta


def surface_pushoffs(curve: CurveOnSurface, epsilon: float) -> PushoffPair:
    """Push the curve off itself to both sides within the surface."""
    if not curve.is_tube:
        raise UnsupportedError("pushoffs are computed for chart curves only")
    chart = curve.chart
    eps = float(epsilon)
    if not eps > 0:
        raise InputError("epsilon must be positive")
    if eps >= chart.radius:
        raise EpsilonError(f"epsilon {eps:.3g} is not below the tube radius {chart.radius:.3g}",
                           chart.radius / 2)
    base = curve.base_coords()
    delta = _offset_coords(chart, base, eps)
    host = curve.host
    out = []
    for sign in (1.0, -1.0):
        coords = chart.from_base(base + sign * delta)
        try:
            c = curve_on_tube(host, curve.chart_id, coords, check=False)
            c.polyline()
        except (RefinementError, InputError) as exc:
            raise EpsilonError(f"pushoff leaves the chart ({exc})", eps / 2) from None
        if (c.longitude, c.meridian) != (curve.longitude, curve.meridian):
            raise EpsilonError("pushoff changed its chart class", eps / 2)
        out.append(c)
    k = curve.polyline()
    a1, a2 = out[0].polyline(), out[1].polyline()
    for x, y in ((k, a1), (k, a2), (a1, a2)):
        d = kernels.curve_clearance(x.vertices, True, y.vertices, True)[0]
        if d <= TOL_GEOM:
            raise EpsilonError("pushoffs collide with the curve or each other", eps / 2)
    return PushoffPair(a1, a2, eps, out[0], out[1])


# -- twisting -----------------------------------------------------------------
def twist_window(chart: TubeChart, s_center: float | None = None, width: float | None = None):
    """A band of rings ``[s_lo, s_lo + width]`` made of fully live cells."""
    live_rings = chart.live_ring_cells()
    if len(live_rings) == 0:
        raise InputError("chart has no fully live ring band for a twist")
    if s_center is None:
        mask = np.zeros(chart.cells_s, dtype=bool)
        mask[live_rings] = True
        best, best_len = None, -1
        R = chart.cells_s
        for i in live_rings:
            if chart.periodic and mask[(i - 1) % R] and len(live_rings) < R:
                continue
            if not chart.periodic and i > 0 and mask[i - 1]:
                continue
            run = 0
            while run < R and mask[(i + run) % R] and (chart.periodic or i + run < R):
                run += 1
            if run > best_len:
                best, best_len = i, run
        lo_s = float(chart.s[best])
        hi_idx = best + best_len - 1
        hi_s = chart.s_upper(hi_idx % R) + (1.0 if chart.periodic and hi_idx >= R else 0.0)
        span = hi_s - lo_s
        w = width if width is not None else min(0.5 * span, 0.25)
        return lo_s + (span - w) / 2, w
    w = width if width is not None else 0.1
    return s_center - w / 2, w


def twist_coords(chart: TubeChart, lifted: np.ndarray, k: int, s_lo: float, width: float,
                 max_step: float | None = None) -> np.ndarray:
    """Apply ``k`` meridian twists along the band ``[s_lo, s_lo + width]``."""
    pts = np.asarray(lifted, dtype=float)
    closing = pts[-1] + chart.closing_step(pts)
    nxt = np.vstack([pts[1:], closing[None]])
    if max_step is None:
        max_step = width / (8 * max(1, abs(k)))
    out = []
    for P, Q in zip(pts, nxt):
        n = max(1, math.ceil(abs(Q[0] - P[0]) / max_step))
        for m in range(n):
            out.append(P + (Q - P) * m / n)
    out = np.array(out)
    x = (out[:, 0] - s_lo)
    if chart.periodic:
        x = np.mod(x, 1.0)
    ramp = np.clip(x / width, 0.0, 1.0)
    out[:, 1] += TWO_PI * k * ramp
    return out


def dehn_twist_curve(curve: CurveOnSurface, k: int, s_center: float | None = None,
                     width: float | None = None) -> CurveOnSurface:
    """Image of the curve under ``k`` Dehn twists about a meridian of its chart."""
    chart = curve.chart
    if not chart.periodic:
        raise UnsupportedError("meridian twists act on circle charts")
    if k == 0:
        return curve
    s_lo, w = twist_window(chart, s_center, width)
    coords = twist_coords(chart, curve.coords, int(k), s_lo, w)
    return curve_on_tube(curve.host, curve.chart_id, coords)

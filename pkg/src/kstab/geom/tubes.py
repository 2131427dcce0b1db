"""Boundary surfaces of regular neighbourhoods of spatial graphs.

Every circle and arc of the graph gets a swept tube with a parallel-transport
frame.  Where an arc meets a circle, a square ``k x k`` block of cells is cut
from the circle tube and a funnel joins the block's boundary loop to the end
ring of the (thinner) arc tube.  Stabilizing handles are attached the same
way, with an arch tube between two blocks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ..constants import TOL_GEOM
from ..errors import InputError, MeshError, PlacementError, TubeOverlapError
from .charts import TWO_PI, TubeChart
from .curves import PolyCurve3, SpatialGraph, _arclength_at
from .mesh import SurfaceMesh, euler_characteristic, genus, outward

ARC_RADIUS_RATIO = 0.5     # arc tube radius / circle tube radius
STANDOFF_RATIO = 0.75      # funnel height beyond the tube / circle tube radius


@dataclass(frozen=True, eq=False)
class TubeSurface:
    """A closed surface together with the tube charts that cover most of it."""

    mesh: SurfaceMesh
    charts: tuple
    radius: float
    graph: SpatialGraph | None = None
    handles: int = 0

    def __iter__(self):
        yield self.mesh
        yield list(self.charts)

    def chart(self, chart_id: int) -> TubeChart:
        for c in self.charts:
            if c.chart_id == chart_id:
                return c
        raise InputError(f"no chart with id {chart_id}")

    def replace_chart(self, chart: TubeChart) -> "TubeSurface":
        charts = tuple(chart if c.chart_id == chart.chart_id else c for c in self.charts)
        return replace(self, charts=charts)

    @property
    def genus(self) -> int:
        return genus(self.mesh)


# -- frames ------------------------------------------------------------------
def _unit(v):
    n = np.linalg.norm(v)
    if n == 0:
        raise InputError("zero-length direction")
    return v / n


def _tangents(c: np.ndarray, closed: bool, start=None, end=None) -> np.ndarray:
    if closed:
        t = np.roll(c, -1, axis=0) - np.roll(c, 1, axis=0)
    else:
        t = np.empty_like(c)
        t[1:-1] = c[2:] - c[:-2]
        t[0] = c[1] - c[0] if start is None else start
        t[-1] = c[-1] - c[-2] if end is None else end
    return t / np.linalg.norm(t, axis=1, keepdims=True)


def _reflect_step(x0, x1, t0, t1, n0):
    """One double-reflection step of a rotation-minimising frame."""
    v1 = x1 - x0
    c1 = v1 @ v1
    rl = n0 - (2.0 / c1) * (v1 @ n0) * v1
    tl = t0 - (2.0 / c1) * (v1 @ t0) * v1
    v2 = t1 - tl
    c2 = v2 @ v2
    n1 = rl - (2.0 / c2) * (v2 @ rl) * v2 if c2 > 1e-30 else rl
    n1 = n1 - (n1 @ t1) * t1
    return n1 / np.linalg.norm(n1)


def _perp(t, hint=None):
    if hint is not None:
        w = hint - (hint @ t) * t
        if np.linalg.norm(w) > 1e-6 * max(1.0, np.linalg.norm(hint)):
            return w / np.linalg.norm(w)
    ref = np.array([0.0, 0.0, 1.0]) if abs(t[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    w = ref - (ref @ t) * t
    return w / np.linalg.norm(w)


def _rotate_about(v, axis, angle):
    return v * math.cos(angle) + np.cross(axis, v) * math.sin(angle) + axis * (axis @ v) * (1 - math.cos(angle))


def transport_frames(c: np.ndarray, closed: bool, start=None, end=None, hint=None):
    """Parallel-transport frames ``(N, B, T)`` along ring centres.

    For closed cores the closing mismatch is spread evenly by arclength and
    returned as the holonomy angle.
    """
    T = _tangents(c, closed, start, end)
    N = np.empty_like(c)
    N[0] = _perp(T[0], hint)
    for i in range(len(c) - 1):
        N[i + 1] = _reflect_step(c[i], c[i + 1], T[i], T[i + 1], N[i])
    hol = 0.0
    if closed:
        n_close = _reflect_step(c[-1], c[0], T[-1], T[0], N[-1])
        hol = math.atan2(np.cross(N[0], n_close) @ T[0], N[0] @ n_close)
        seg = np.linalg.norm(np.diff(np.vstack([c, c[:1]]), axis=0), axis=1)
        lam = np.concatenate([[0.0], np.cumsum(seg)[:-1]]) / seg.sum()
        for i in range(1, len(c)):
            N[i] = _rotate_about(N[i], T[i], -hol * lam[i])
    B = np.cross(T, N)
    return N, B, T, hol


def ring_points(c, N, B, radius, angles):
    """``(R, C, 3)`` ring vertices; ``angles`` is ``(C,)`` or ``(R, C)``."""
    ang = np.broadcast_to(np.asarray(angles, dtype=float), (len(c), np.shape(angles)[-1]))
    return (c[:, None, :] + radius * (np.cos(ang)[:, :, None] * N[:, None, :]
                                      + np.sin(ang)[:, :, None] * B[:, None, :]))


# -- curve sampling ------------------------------------------------------------
def _point_at(curve: PolyCurve3, a: np.ndarray) -> np.ndarray:
    v = curve.vertices
    pts = np.vstack([v, v[:1]]) if curve.closed else v
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    a = np.asarray(a, dtype=float)
    if curve.closed:
        a = np.mod(a, cum[-1])
    k = np.clip(np.searchsorted(cum, a, side="right") - 1, 0, len(seg) - 1)
    f = (a - cum[k]) / seg[k]
    return pts[k] + f[:, None] * (pts[k + 1] - pts[k])


def _ring_spacing(curve: PolyCurve3, n_long_per_unit: float) -> float:
    mean = curve.length() / curve.n_segments
    return min(1.0 / n_long_per_unit, mean)


def _circle_positions(L, windows, k, h, spacing):
    """Ring arclengths in ``[0, L)`` and the first ring index of each window."""
    if not windows:
        n = max(3, math.ceil(L / spacing - 1e-9))
        return np.arange(n) * (L / n), []
    order = sorted(range(len(windows)), key=lambda w: windows[w])
    pos = []
    starts = {}
    for idx, w in enumerate(order):
        a0 = windows[w] - k * h / 2
        a1 = windows[w] + k * h / 2
        nxt = windows[order[(idx + 1) % len(order)]] - k * h / 2
        if idx == len(order) - 1:
            nxt += L
        gap = nxt - a1
        if gap < h:
            raise TubeOverlapError("junctions on one circle are too close for the tube radius")
        starts[w] = a0
        pos.extend(a0 + m * h for m in range(k + 1))
        n = max(1, math.ceil(gap / spacing - 1e-9))
        pos.extend(a1 + m * gap / n for m in range(1, n))
    pos = np.mod(np.array(pos), L)
    perm = np.argsort(pos)
    pos = pos[perm]
    first = []
    for w in range(len(windows)):
        first.append(int(np.argmin(np.abs(((pos - np.mod(starts[w], L)) + L / 2) % L - L / 2))))
    return pos, first


def _arc_core(arc: PolyCurve3, Es, ds, Ee, de, trim, spacing):
    """Arc tube centres: tangent-matched cubic bridges from the funnel ends to the arc."""
    v = arc.vertices
    seg = np.linalg.norm(np.diff(v, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = cum[-1]
    if total <= 4.5 * trim:
        raise TubeOverlapError("arc is too short for its junction funnels")

    def at(a):
        k = min(int(np.searchsorted(cum, a, side="right")) - 1, len(seg) - 1)
        t = (v[k + 1] - v[k]) / seg[k]
        return v[k] + (a - cum[k]) * t, t

    Qs, ts = at(2 * trim)
    Qe, te = at(total - 2 * trim)
    inner = v[(cum > 2 * trim + spacing * 0.25) & (cum < total - 2 * trim - spacing * 0.25)]

    def bridge(E, d, Q, t):
        ell = np.linalg.norm(Q - E)
        n = max(3, math.ceil(1.5 * ell / spacing))
        return _bezier(E, E + d * ell / 3, Q - t * ell / 3, Q, n + 1)

    head = bridge(Es, ds, Qs, ts)
    tail = bridge(Ee, de, Qe, -te)[::-1]
    pts = [*head, *inner, *tail]
    out = [pts[0]]
    for a, b in zip(pts[:-1], pts[1:]):
        n = max(1, math.ceil(np.linalg.norm(b - a) / spacing - 1e-9))
        for m in range(1, n + 1):
            out.append(a + (b - a) * m / n)
    return np.array(out)


# -- blocks and funnels -----------------------------------------------------
def block_loop(chart_rings: int, n_circ: int, i0: int, j0: int, k: int):
    """Boundary loop ``[(i, j), ...]`` and interior vertices of a ``k x k`` block."""
    wrap_i = lambda i: i % chart_rings
    wrap_j = lambda j: j % n_circ
    loop = [(i0, j0 + b) for b in range(k)]
    loop += [(i0 + a, j0 + k) for a in range(k)]
    loop += [(i0 + k, j0 + k - b) for b in range(k)]
    loop += [(i0 + k - a, j0) for a in range(k)]
    loop = [(wrap_i(i), wrap_j(j)) for i, j in loop]
    inner = [(wrap_i(i0 + a), wrap_j(j0 + b)) for a in range(1, k) for b in range(1, k)]
    cells = [(wrap_i(i0 + a), wrap_j(j0 + b)) for a in range(k) for b in range(k)]
    return loop, inner, cells


def _loop_angles(pts, centre, N, B):
    w = pts - centre
    return np.arctan2(w @ B, w @ N)


def _increasing(ids, psi):
    """Reorder a cyclic loop so its projected angles increase; returns (ids, unwrapped psi)."""
    steps = np.angle(np.exp(1j * (np.roll(psi, -1) - psi)))
    if steps.sum() < 0:
        ids = ids[::-1]
        psi = psi[::-1]
        steps = np.angle(np.exp(1j * (np.roll(psi, -1) - psi)))
    if np.any(steps <= 0) or abs(steps.sum() - TWO_PI) > 1e-6:
        raise MeshError("junction loop does not wind once around the attaching tube")
    return list(ids), psi[0] + np.concatenate([[0.0], np.cumsum(steps[:-1])])


def _match_end(psi_s, psi_e):
    """Cyclic shift of the end loop that least twists the connecting tube."""
    n = len(psi_s)
    best, best_cost = 0, np.inf
    for sh in range(n):
        off = np.angle(np.exp(1j * (np.roll(psi_e, -sh) - psi_s)))
        cost = np.abs(off).max()
        if cost < best_cost:
            best, best_cost = sh, cost
    off = np.angle(np.exp(1j * (np.roll(psi_e, -best) - psi_s)))
    return best, psi_s + off


def _funnel(loop_ids, ring_ids):
    tris = []
    n = len(loop_ids)
    for m in range(n):
        a, b = loop_ids[m], loop_ids[(m + 1) % n]
        c, d = ring_ids[(m + 1) % n], ring_ids[m]
        tris.append((a, b, c))
        tris.append((a, c, d))
    return tris


def _grid_triangles(grid, periodic, live):
    R, C = grid.shape
    cells = R if periodic else R - 1
    tris = []
    cell_tris = -np.ones((cells, C, 2), dtype=np.int64)
    for i in range(cells):
        i1 = (i + 1) % R
        for j in range(C):
            if not live[i, j]:
                continue
            j1 = (j + 1) % C
            cell_tris[i, j, 0] = len(tris)
            tris.append((grid[i, j], grid[i1, j], grid[i1, j1]))
            cell_tris[i, j, 1] = len(tris)
            tris.append((grid[i, j], grid[i1, j1], grid[i, j1]))
    return tris, cell_tris


class _Builder:
    """Accumulates vertices and triangles, then orients, compacts and validates."""

    def __init__(self):
        self.verts: list[np.ndarray] = []
        self.count = 0
        self.tris: list[tuple] = []

    def add_points(self, pts: np.ndarray) -> np.ndarray:
        flat = pts.reshape(-1, 3)
        ids = np.arange(self.count, self.count + len(flat)).reshape(pts.shape[:-1])
        self.verts.append(flat)
        self.count += len(flat)
        return ids

    def add_tris(self, tris) -> int:
        start = len(self.tris)
        self.tris.extend(tuple(int(x) for x in t) for t in tris)
        return start

    def finish(self, charts_raw, expected_genus, overlap_error, radius_note=""):
        mesh = outward(np.vstack(self.verts), np.array(self.tris, dtype=np.int64))
        mesh, remap = mesh.compacted()
        charts = []
        for chart, tri_offset in charts_raw:
            grid = np.where(chart.grid >= 0, remap[np.maximum(chart.grid, 0)], -1)
            ct = np.where(chart.cell_tris >= 0, chart.cell_tris + tri_offset, -1)
            pts = np.array(chart.points, copy=True)
            pts[grid < 0] = np.nan
            charts.append(chart.with_surface(grid, ct, pts))
        if not mesh.is_closed():
            raise MeshError("assembled surface is not closed")
        bad = mesh.embedding_defects(TOL_GEOM)
        if bad:
            i, j, d = bad[0]
            raise overlap_error(
                f"surface self-intersects: triangles {i} and {j} are {d:.3g} apart{radius_note}")
        mesh.validate(embedded=False)
        g = genus(mesh)
        if expected_genus is not None and g != expected_genus:
            raise MeshError(f"surface has genus {g}, expected {expected_genus}")
        return mesh, tuple(charts)


# -- public construction ------------------------------------------------------
def default_radius(graph: SpatialGraph) -> float:
    return 0.25 * graph.clearance()


def make_tube_surface(graph: SpatialGraph, radius: float | None = None, n_circ: int = 16,
                      n_long_per_unit: float = 4.0) -> TubeSurface:
    """Mesh the boundary of a regular neighbourhood of ``graph``.

    ``radius`` defaults to a quarter of the graph clearance and may only be
    lowered.  Unpacks as ``(mesh, charts)``.  Chart ids number the circles
    first, then the arcs.
    """
    if not graph.is_connected():
        raise InputError("spatial graph is not connected")
    r_max = default_radius(graph)
    if radius is None:
        radius = r_max
    elif not 0 < radius <= r_max * (1 + 1e-12):
        raise InputError(f"tube radius must lie in (0, {r_max:.4g}]")
    radius = float(radius)
    C = int(n_circ)
    if C < 8:
        raise InputError("n_circ must be at least 8")
    if graph.arcs and C % 4:
        raise InputError("n_circ must be divisible by 4 when the graph has arcs")
    if n_long_per_unit <= 0:
        raise InputError("n_long_per_unit must be positive")
    k = C // 4
    h = radius * TWO_PI / C
    rho = ARC_RADIUS_RATIO * radius
    standoff = STANDOFF_RATIO * radius
    theta = np.arange(C) * (TWO_PI / C)

    # junctions grouped by circle: (arc, end) -> arclength
    per_circle: dict[int, list] = {}
    for ai, ends in enumerate(graph.attachments):
        for e, att in enumerate(ends):
            circ = graph.circles[att.circle]
            pos = _arclength_at(circ, att.segment, att.fraction) % circ.length()
            per_circle.setdefault(att.circle, []).append(((ai, e), pos))

    b = _Builder()
    charts_raw = []
    loops = {}
    for ci, circ in enumerate(graph.circles):
        L = circ.length()
        junc = per_circle.get(ci, [])
        pos, first = _circle_positions(L, [p for _, p in junc], k, h,
                                       _ring_spacing(circ, n_long_per_unit))
        c = _point_at(circ, pos)
        N, B, T, hol = transport_frames(c, True, hint=c[0] - circ.vertices.mean(axis=0))
        pts = ring_points(c, N, B, radius, theta)
        grid = b.add_points(pts)
        R = len(c)
        live = np.ones((R, C), dtype=bool)
        removed = np.zeros((R, C), dtype=bool)
        for (key, a_j), i0 in zip(junc, first):
            ai, e = key
            arc = graph.arcs[ai].vertices
            d = _unit(arc[1] - arc[0]) if e == 0 else _unit(arc[-2] - arc[-1])
            ic = (i0 + k // 2) % R
            if abs(d @ T[ic]) > 0.5:
                raise InputError(f"arc {ai} leaves its circle too obliquely")
            dp = _unit(d - (d @ T[ic]) * T[ic])
            phi = math.atan2(dp @ B[ic], dp @ N[ic])
            j0 = int(round(phi * C / TWO_PI - k / 2)) % C
            loop, inner, cells = block_loop(R, C, i0, j0, k)
            for i, j in cells:
                if not live[i, j]:
                    raise TubeOverlapError("junction blocks overlap")
                live[i, j] = False
            for i, j in inner:
                removed[i, j] = True
            P = graph.arcs[ai].vertices[0 if e == 0 else -1]
            loops[key] = ([int(grid[i, j]) for i, j in loop],
                          np.array([pts[i, j] for i, j in loop]), P, dp)
        tris, cell_tris = _grid_triangles(grid, True, live)
        offset = b.add_tris(tris)
        g = np.where(removed, -1, grid)
        chart = TubeChart(ci, "circle", PolyCurve3(c, closed=True, check=False), pos / L,
                          pts, g, cell_tris, radius, frame_holonomy=hol, source=ci,
                          frames=np.stack([N, B, T], axis=1))
        charts_raw.append((chart, offset))

    nc = len(graph.circles)
    for ai, arc in enumerate(graph.arcs):
        ids_s, loop_s, P_s, d_s = loops[(ai, 0)]
        ids_e, loop_e, P_e, d_e = loops[(ai, 1)]
        Es = P_s + (radius + standoff) * d_s
        Ee = P_e + (radius + standoff) * d_e
        core = _arc_core(arc, Es, d_s, Ee, d_e, radius + standoff,
                         min(_ring_spacing(arc, n_long_per_unit), 2 * rho))
        N, B, T, _ = transport_frames(core, False, start=d_s, end=-d_e)
        ids_s, psi_s = _increasing(np.array(ids_s), _loop_angles(loop_s, Es, N[0], B[0]))
        ids_e, psi_e = _increasing(np.array(ids_e), _loop_angles(loop_e, Ee, N[-1], B[-1]))
        sh, psi_e = _match_end(psi_s, psi_e)
        ids_e = list(np.roll(ids_e, -sh))
        seg = np.linalg.norm(np.diff(core, axis=0), axis=1)
        lam = np.concatenate([[0.0], np.cumsum(seg)]) / seg.sum()
        ang = (1 - lam)[:, None] * psi_s[None, :] + lam[:, None] * psi_e[None, :]
        if np.any(np.diff(ang, axis=1) <= 0):
            raise MeshError(f"arc tube {ai} twists too much between its junctions")
        pts = ring_points(core, N, B, rho, ang)
        grid = b.add_points(pts)
        tris, cell_tris = _grid_triangles(grid, False, np.ones((len(core) - 1, len(ids_s)), bool))
        offset = b.add_tris(tris)
        b.add_tris(_funnel(ids_s, list(grid[0])))
        b.add_tris(_funnel(ids_e, list(grid[-1])))
        chart = TubeChart(nc + ai, "arc", PolyCurve3(core, closed=False, check=False), lam,
                          pts, grid, cell_tris, rho, source=ai,
                          frames=np.stack([N, B, T], axis=1))
        charts_raw.append((chart, offset))

    note = f" (tube radius {radius:.4g}, graph clearance {graph.clearance():.4g})"
    mesh, charts = b.finish(charts_raw, graph.expected_genus(), TubeOverlapError, note)
    return TubeSurface(mesh, charts, radius, graph)


# -- stabilizing handles -----------------------------------------------------
@dataclass(frozen=True)
class HandleSite:
    """Two ``block x block`` cell blocks on circle charts, given by their corner cells."""

    chart_a: int
    i_a: int
    j_a: int
    chart_b: int
    i_b: int
    j_b: int
    block: int = 2
    height: float | None = None


def _bezier(p0, p1, p2, p3, n):
    t = np.linspace(0.0, 1.0, n)[:, None]
    return ((1 - t) ** 3 * p0 + 3 * (1 - t) ** 2 * t * p1 + 3 * (1 - t) * t ** 2 * p2 + t ** 3 * p3)


def attach_handle(surface: TubeSurface, site: HandleSite, forbidden=None) -> TubeSurface:
    """Add an unknotted handle joining the two site blocks by an arch tube.

    ``forbidden`` maps chart id to a boolean cell mask the blocks must avoid.
    Raises :class:`PlacementError` if the blocks are unusable or the handle
    collides with the surface.
    """
    kb = int(site.block)
    if kb < 1:
        raise InputError("handle block size must be at least 1")
    ca, cb = surface.chart(site.chart_a), surface.chart(site.chart_b)
    for ch in (ca, cb):
        if not ch.periodic:
            raise PlacementError("handles attach to circle charts only")
    verts = surface.mesh.vertices
    blocks = []
    for ch, i0, j0 in ((ca, site.i_a, site.j_a), (cb, site.i_b, site.j_b)):
        loop, inner, cells = block_loop(ch.n_rings, ch.n_circ, i0, j0, kb)
        for i, j in cells:
            if not ch.cell_is_live(i, j):
                raise PlacementError(f"site cell ({i}, {j}) of chart {ch.chart_id} is already removed")
            if forbidden is not None and ch.chart_id in forbidden and forbidden[ch.chart_id][i, j]:
                raise PlacementError(f"site cell ({i}, {j}) of chart {ch.chart_id} touches the knot corridor")
        for i, j in loop:
            if ch.grid[i, j] < 0:
                raise PlacementError("site block touches a removed vertex")
        blocks.append((ch, loop, inner, cells))
    if site.chart_a == site.chart_b:
        if set(blocks[0][3]) & set(blocks[1][3]) or set(blocks[0][1]) & set(blocks[1][1]):
            raise PlacementError("the two site blocks overlap")
        ring_a = {i for i, _ in blocks[0][1]}
        ring_b = {i for i, _ in blocks[1][1]}
        col_a = {j for _, j in blocks[0][1]}
        col_b = {j for _, j in blocks[1][1]}
        if (ring_a & ring_b) and (col_a & col_b):
            raise PlacementError("the two site blocks share boundary vertices")

    # geometry of the two ends
    ends = []
    for ch, loop, inner, cells in blocks:
        ids = [int(ch.grid[i, j]) for i, j in loop]
        P = verts[ids]
        centre = P.mean(axis=0)
        i0, j0 = loop[0]
        ic = (i0 + kb // 2) % ch.n_rings
        jc = (j0 + kb / 2)
        ang = jc * TWO_PI / ch.n_circ
        N, B = ch.frames[ic, 0], ch.frames[ic, 1]
        normal = _unit(math.cos(ang) * N + math.sin(ang) * B)
        span = min(np.ptp(P @ ch.frames[ic, 2]), np.linalg.norm(P[kb] - P[0]))
        ends.append((ids, P, centre, normal, span))
    rho = 0.3 * min(e[4] for e in ends)
    standoff = 0.75 * max(e[4] for e in ends)
    n_h = 4 * kb
    Ea = ends[0][2] + standoff * ends[0][3]
    Eb = ends[1][2] + standoff * ends[1][3]
    H = site.height if site.height is not None else max(2.0 * surface.radius, 0.5 * np.linalg.norm(Eb - Ea))
    pa = Ea + H * ends[0][3]
    pb = Eb + H * ends[1][3]
    length_est = np.linalg.norm(pa - Ea) + np.linalg.norm(pb - pa) + np.linalg.norm(Eb - pb)
    n_core = max(12, math.ceil(length_est / (1.5 * rho)))
    core = _bezier(Ea, pa, pb, Eb, n_core + 1)
    try:
        N, B, T, _ = transport_frames(core, False, start=ends[0][3], end=-ends[1][3])
        ids_s, psi_s = _increasing(np.array(ends[0][0]), _loop_angles(ends[0][1], Ea, N[0], B[0]))
        ids_e, psi_e = _increasing(np.array(ends[1][0]), _loop_angles(ends[1][1], Eb, N[-1], B[-1]))
    except MeshError as exc:
        raise PlacementError(f"handle site is not usable: {exc}") from None
    sh, psi_e = _match_end(psi_s, psi_e)
    ids_e = list(np.roll(ids_e, -sh))
    seg = np.linalg.norm(np.diff(core, axis=0), axis=1)
    lam = np.concatenate([[0.0], np.cumsum(seg)]) / seg.sum()
    ang = (1 - lam)[:, None] * psi_s[None, :] + lam[:, None] * psi_e[None, :]
    if np.any(np.diff(ang, axis=1) <= 0):
        raise PlacementError("handle tube would twist through itself")

    # rebuild: existing triangles minus the two blocks, plus handle geometry
    dead = set()
    new_charts = {}
    for ch, loop, inner, cells in blocks:
        ct = new_charts.get(ch.chart_id, ch).cell_tris.copy()
        for i, j in cells:
            dead.update(int(x) for x in ct[i, j])
            ct[i, j] = -1
        grid = new_charts.get(ch.chart_id, ch).grid.copy()
        for i, j in inner:
            grid[i, j] = -1
        new_charts[ch.chart_id] = new_charts.get(ch.chart_id, ch).with_surface(grid, ct, ch.points)
    old_tris = surface.mesh.triangles
    keep = np.array([t not in dead for t in range(len(old_tris))])
    tri_map = -np.ones(len(old_tris), dtype=np.int64)
    tri_map[keep] = np.arange(int(keep.sum()))

    b = _Builder()
    b.add_points(np.asarray(verts))
    b.add_tris(old_tris[keep])
    pts = ring_points(core, N, B, rho, ang)
    grid = b.add_points(pts)
    tris, _ = _grid_triangles(grid, False, np.ones((len(core) - 1, n_h), bool))
    b.add_tris(tris)
    b.add_tris(_funnel(ids_s, list(grid[0])))
    b.add_tris(_funnel(ids_e, list(grid[-1])))

    charts_raw = []
    for ch in surface.charts:
        ch = new_charts.get(ch.chart_id, ch)
        ct = np.where(ch.cell_tris >= 0, tri_map[np.maximum(ch.cell_tris, 0)], -1)
        charts_raw.append((ch.with_surface(ch.grid, ct, ch.points), 0))
    expected = genus(surface.mesh) + 1
    mesh, charts = b.finish(charts_raw, expected, PlacementError)
    return replace(surface, mesh=mesh, charts=charts, handles=surface.handles + 1)


def chi_drop(before: SurfaceMesh, after: SurfaceMesh) -> int:
    return euler_characteristic(before) - euler_characteristic(after)

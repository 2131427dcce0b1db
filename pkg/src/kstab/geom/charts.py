"""Tube charts: the (s, theta) parameterisation of a swept tube.

A chart owns a ring grid of mesh vertices.  Ring ``i`` sits at longitude
``s[i]``; column ``j`` at meridian angle ``2*pi*j/n_circ``.  Each grid cell is
split along its ``(i, j) -> (i+1, j+1)`` diagonal into a *lower* triangle
(``u >= v``) and an *upper* one, and the chart map is affine on each
triangle, so chart points lie exactly on the mesh.

Circle charts are periodic in ``s`` (ring ``R`` is ring ``0``); arc charts
cover ``s in [0, 1]``.  Cells removed for junctions or handles are *dead*;
chart coordinates are undefined there.

``twist`` relabels meridians: label ``(s, theta)`` maps to base
``(s, theta + 2*pi*twist*s)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import InputError, RefinementError
from .curves import PolyCurve3

TWO_PI = 2.0 * math.pi
_EPS_T = 1e-12
_GENERIC = 1e-9

LOWER, UPPER = 0, 1


@dataclass(frozen=True, eq=False)
class TubeChart:
    chart_id: int
    kind: str                 # "circle" | "arc"
    core: PolyCurve3          # ring centres
    s: np.ndarray             # (R,) ring longitudes, increasing
    points: np.ndarray        # (R, C, 3) ring vertex positions (nan where removed)
    grid: np.ndarray          # (R, C) mesh vertex index, -1 where removed
    cell_tris: np.ndarray     # (cells_s, C, 2) mesh triangle index, -1 where dead
    radius: float
    frame_holonomy: float = 0.0
    twist: int = 0
    source: int = -1          # index of the circle or arc this chart sweeps
    frames: np.ndarray = field(default=None, repr=False)

    # -- shape --------------------------------------------------------------
    @property
    def n_circ(self) -> int:
        return self.grid.shape[1]

    @property
    def n_rings(self) -> int:
        return self.grid.shape[0]

    @property
    def periodic(self) -> bool:
        return self.kind == "circle"

    @property
    def cells_s(self) -> int:
        return self.n_rings if self.periodic else self.n_rings - 1

    def ring_after(self, i: int) -> int:
        return (i + 1) % self.n_rings if self.periodic else i + 1

    def s_upper(self, i: int) -> float:
        if self.periodic and i == self.n_rings - 1:
            return float(self.s[0]) + 1.0
        return float(self.s[i + 1])

    def live(self) -> np.ndarray:
        """``(cells_s, C)`` boolean mask of cells still on the surface."""
        return self.cell_tris[:, :, 0] >= 0

    def live_columns(self) -> np.ndarray:
        return np.nonzero(self.live().all(axis=0))[0]

    def live_ring_cells(self) -> np.ndarray:
        return np.nonzero(self.live().all(axis=1))[0]

    def twisted(self, k: int) -> "TubeChart":
        """Same surface with meridians relabelled by ``k`` extra turns per longitude."""
        if not self.periodic:
            raise InputError("only circle charts can be relabelled by twisting")
        return replace(self, twist=self.twist + int(k))

    def with_surface(self, grid, cell_tris, points) -> "TubeChart":
        return replace(self, grid=grid, cell_tris=cell_tris, points=points)

    # -- label <-> base coordinates ----------------------------------------
    def to_base(self, coords: np.ndarray) -> np.ndarray:
        c = np.array(coords, dtype=float, copy=True)
        if self.twist:
            c[:, 1] = c[:, 1] + TWO_PI * self.twist * c[:, 0]
        return c

    def from_base(self, coords: np.ndarray) -> np.ndarray:
        c = np.array(coords, dtype=float, copy=True)
        if self.twist:
            c[:, 1] = c[:, 1] - TWO_PI * self.twist * c[:, 0]
        return c

    # -- point location -----------------------------------------------------
    def locate(self, s: float, theta: float) -> tuple[int, int, float, float]:
        """Cell ``(i, j)`` and local ``(u, v)`` of a base-coordinate point."""
        if self.periodic:
            sm = s - math.floor(s)
            i = int(np.searchsorted(self.s, sm, side="right")) - 1
            if i < 0:
                i = self.n_rings - 1
                sm += 1.0
        else:
            if s < self.s[0] - _GENERIC or s > self.s[-1] + _GENERIC:
                raise InputError(f"s = {s:.6g} is outside the arc chart")
            sm = s
            i = min(max(int(np.searchsorted(self.s, sm, side="right")) - 1, 0), self.n_rings - 2)
        lo = float(self.s[i])
        u = (sm - lo) / (self.s_upper(i) - lo)
        tau = theta * self.n_circ / TWO_PI
        fj = math.floor(tau)
        j = int(fj) % self.n_circ
        return i, j, u, tau - fj

    def corners(self, i: int, j: int) -> tuple[int, int, int, int]:
        """Grid indices as ``(i, j, i+1, j+1)`` with wrap-around."""
        return i, j, self.ring_after(i), (j + 1) % self.n_circ

    def _cell_points(self, i, j):
        i0, j0, i1, j1 = self.corners(i, j)
        P = self.points
        return P[i0, j0], P[i1, j0], P[i1, j1], P[i0, j1]

    def triangle_vertices(self, i: int, j: int, half: int) -> tuple[int, int, int]:
        """Mesh vertex ids of a cell triangle, in chart (u, v) corner order."""
        i0, j0, i1, j1 = self.corners(i, j)
        g = self.grid
        if half == LOWER:
            return int(g[i0, j0]), int(g[i1, j0]), int(g[i1, j1])
        return int(g[i0, j0]), int(g[i1, j1]), int(g[i0, j1])

    def cell_is_live(self, i: int, j: int) -> bool:
        return bool(self.cell_tris[i, j, 0] >= 0)

    def eval_base(self, coords) -> np.ndarray:
        coords = np.atleast_2d(np.asarray(coords, dtype=float))
        out = np.empty((len(coords), 3))
        for k, (s, th) in enumerate(coords):
            i, j, u, v = self.locate(s, th)
            if not self.cell_is_live(i, j):
                raise InputError(f"chart point ({s:.4g}, {th:.4g}) lies in a removed cell")
            p00, p10, p11, p01 = self._cell_points(i, j)
            if u >= v:
                out[k] = p00 + u * (p10 - p00) + v * (p11 - p10)
            else:
                out[k] = p00 + v * (p01 - p00) + u * (p11 - p01)
        return out

    def __call__(self, coords) -> np.ndarray:
        """Map label coordinates ``(s, theta)`` to points on the mesh."""
        coords = np.atleast_2d(np.asarray(coords, dtype=float))
        return self.eval_base(self.to_base(coords))

    def jacobian(self, s: float, theta: float) -> np.ndarray:
        """``3 x 2`` derivative of the base chart map on the triangle holding the point."""
        i, j, u, v = self.locate(s, theta)
        p00, p10, p11, p01 = self._cell_points(i, j)
        if u >= v:
            du, dv = p10 - p00, p11 - p10
        else:
            du, dv = p11 - p01, p01 - p00
        ds = self.s_upper(i) - float(self.s[i])
        return np.column_stack([du / ds, dv * self.n_circ / TWO_PI])

    # -- lifting and refinement --------------------------------------------
    def lift(self, coords) -> np.ndarray:
        """Unwrap a closed label-coordinate loop by shortest steps."""
        c = np.array(coords, dtype=float)
        if c.ndim != 2 or c.shape[1] != 2 or len(c) < 2:
            raise InputError("chart coordinates must be a list of (s, theta) pairs")
        steps = np.diff(c, axis=0)
        if self.periodic:
            steps[:, 0] -= np.round(steps[:, 0])
        steps[:, 1] -= TWO_PI * np.round(steps[:, 1] / TWO_PI)
        out = np.vstack([c[:1], c[:1] + np.cumsum(steps, axis=0)])
        return out

    def closing_step(self, lifted: np.ndarray) -> np.ndarray:
        step = lifted[0] - lifted[-1]
        if self.periodic:
            step[0] -= round(step[0])
        step[1] -= TWO_PI * round(step[1] / TWO_PI)
        return step

    def refine(self, base_lifted: np.ndarray, strict: bool = False) -> "Refinement":
        """Split a closed base-coordinate loop at every grid line and diagonal.

        Each output segment then lies in a single triangle.  With ``strict``
        the loop must be in general position (no vertex on a grid line, no
        crossing through a grid vertex) and :class:`RefinementError` is
        raised otherwise.
        """
        pts = np.asarray(base_lifted, dtype=float)
        closing = pts[-1] + self.closing_step(pts)
        nxt = np.vstack([pts[1:], closing[None]])
        out_pts: list[np.ndarray] = []
        out_edge: list[tuple | None] = []
        seg_tri: list[tuple[int, int, int]] = []
        C = self.n_circ
        for P, Q in zip(pts, nxt):
            ts = [0.0, 1.0]
            ds = Q[0] - P[0]
            if abs(ds) > 0:
                lo, hi = min(P[0], Q[0]), max(P[0], Q[0])
                if self.periodic:
                    for n in range(math.floor(lo), math.floor(hi) + 1):
                        lines = self.s + n
                        sel = lines[(lines > lo) & (lines < hi)]
                        ts.extend((sel - P[0]) / ds)
                else:
                    sel = self.s[(self.s > lo) & (self.s < hi)]
                    ts.extend((sel - P[0]) / ds)
            tauP, tauQ = P[1] * C / TWO_PI, Q[1] * C / TWO_PI
            if tauQ != tauP:
                lo, hi = min(tauP, tauQ), max(tauP, tauQ)
                for m in range(math.floor(lo), math.floor(hi) + 1):
                    if lo < m < hi:
                        ts.append((m - tauP) / (tauQ - tauP))
            ts = np.unique(np.clip(ts, 0.0, 1.0))
            if strict and len(ts) > 2 and np.min(np.diff(ts)) < _EPS_T:
                raise RefinementError("loop crosses the grid through a grid vertex")
            ts = ts[np.concatenate([[True], np.diff(ts) > _EPS_T])]
            if ts[-1] < 1.0:
                ts[-1] = 1.0
            # split at diagonals inside each cell piece
            pieces = []
            for ta, tb in zip(ts[:-1], ts[1:]):
                mid = P + (ta + tb) / 2 * (Q - P)
                i, j, _, _ = self.locate(mid[0], mid[1])
                ua, va = self._local(P + ta * (Q - P), i, j, mid)
                ub, vb = self._local(P + tb * (Q - P), i, j, mid)
                fa, fb = ua - va, ub - vb
                if fa * fb < 0:
                    td = ta + (tb - ta) * fa / (fa - fb)
                    if strict and (min(td - ta, tb - td) < _EPS_T):
                        raise RefinementError("loop crosses a diagonal at a grid vertex")
                    pieces.append((ta, td, i, j))
                    pieces.append((td, tb, i, j))
                else:
                    pieces.append((ta, tb, i, j))
            for k, (ta, tb, i, j) in enumerate(pieces):
                if not self.cell_is_live(i, j):
                    raise RefinementError(
                        f"curve enters removed cell ({i}, {j}) of chart {self.chart_id}")
                x = P + ta * (Q - P)
                mid = P + (ta + tb) / 2 * (Q - P)
                um, vm = self._local(mid, i, j, mid)
                half = LOWER if um >= vm else UPPER
                if k == 0:
                    edge = None
                    if strict:
                        u0, v0 = self._local(x, i, j, mid)
                        if (min(abs(u0), abs(1 - u0), abs(v0), abs(1 - v0), abs(u0 - v0))
                                < _GENERIC):
                            raise RefinementError("loop vertex lies on a grid line")
                else:
                    edge = self._edge_at(x, i, j, mid, pieces[k - 1], (ta, tb, i, j))
                out_pts.append(x)
                out_edge.append(edge)
                seg_tri.append((i, j, half))
        return Refinement(self, np.array(out_pts), out_edge, seg_tri)

    def _local(self, x, i, j, ref):
        """Local cell coordinates of ``x`` in cell (i, j), unwrapped near ``ref``."""
        if self.periodic:
            n = math.floor(ref[0] - float(self.s[i]) + 1e-12)
            lo = float(self.s[i]) + n
        else:
            lo = float(self.s[i])
        u = (x[0] - lo) / (self.s_upper(i) - float(self.s[i]))
        tau_ref = ref[1] * self.n_circ / TWO_PI
        v = x[1] * self.n_circ / TWO_PI - math.floor(tau_ref)
        return u, v

    def _edge_at(self, x, i, j, ref, prev_piece, piece):
        """Identify the mesh edge crossed at breakpoint ``x`` as ``(va, vb, t)``."""
        u, v = self._local(x, i, j, ref)
        pi_, pj = prev_piece[2], prev_piece[3]
        i0, j0, i1, j1 = self.corners(i, j)
        g = self.grid
        if (pi_, pj) == (i, j):
            # diagonal inside the same cell
            return _edge(g[i0, j0], g[i1, j1], u)
        if pj == j:
            # crossed a ring line
            ring = i0 if abs(u) < abs(1 - u) else i1
            return _edge(g[ring, j0], g[ring, j1], v)
        col = j0 if abs(v) < abs(1 - v) else j1
        return _edge(g[i0, col], g[i1, col], u)


def _edge(a, b, t):
    a, b = int(a), int(b)
    return (a, b, float(t)) if a < b else (b, a, 1.0 - float(t))


@dataclass
class Refinement:
    """A chart loop split so that every segment lies in one mesh triangle."""

    chart: TubeChart
    base_points: np.ndarray            # (m, 2) lifted base coordinates
    edges: list                        # per point: None or (va, vb, t) crossing
    seg_tri: list                      # per segment: (i, j, half)

    def points3d(self) -> np.ndarray:
        return self.chart.eval_base(self.base_points)

    def triangle_of(self, k: int) -> int:
        i, j, half = self.seg_tri[k]
        return int(self.chart.cell_tris[i, j, half])

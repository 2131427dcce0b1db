"""Piecewise-linear curves and spatial graphs in Euclidean 3-space."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from .. import kernels
from ..constants import TOL_GEOM
from ..errors import InputError, RefinementError


class PolyCurve3:
    """Closed or open polyline, validated on construction.

    Closed curves store each vertex once; the closing segment is implicit.
    The vertex array is read-only.
    """

    __slots__ = ("vertices", "closed")

    def __init__(self, vertices, closed: bool = True, *, check: bool = True):
        v = np.array(vertices, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] != 3:
            raise InputError(f"vertices must have shape (n, 3), got {v.shape}")
        if closed and len(v) > 3 and np.linalg.norm(v[0] - v[-1]) <= TOL_GEOM:
            v = v[:-1]
        v.setflags(write=False)
        self.vertices = v
        self.closed = bool(closed)
        if check:
            self.validate()

    def __len__(self) -> int:
        return len(self.vertices)

    def __repr__(self) -> str:
        kind = "closed" if self.closed else "open"
        return f"PolyCurve3({len(self)} vertices, {kind})"

    @property
    def n_segments(self) -> int:
        return len(self.vertices) if self.closed else len(self.vertices) - 1

    def segments(self) -> tuple[np.ndarray, np.ndarray]:
        return kernels.segments(self.vertices, self.closed)

    def length(self) -> float:
        a, b = self.segments()
        return float(np.linalg.norm(b - a, axis=1).sum())

    def validate(self) -> None:
        v = self.vertices
        if not np.all(np.isfinite(v)):
            raise InputError("curve has non-finite coordinates")
        if self.closed and len(v) < 3:
            raise InputError("closed curves need at least 3 vertices")
        if not self.closed and len(v) < 2:
            raise InputError("open curves need at least 2 vertices")
        a, b = self.segments()
        short = np.nonzero(np.linalg.norm(b - a, axis=1) <= TOL_GEOM)[0]
        if len(short):
            raise InputError(f"consecutive vertices coincide at segment {int(short[0])}")
        d, i, j = kernels.self_clearance(v, self.closed)
        if d <= TOL_GEOM:
            raise RefinementError(
                f"curve is not simple: segments {i} and {j} are {d:.3g} apart")

    def subdivided(self, times: int = 1) -> "PolyCurve3":
        """Insert segment midpoints ``times`` times; the point set is unchanged."""
        v = self.vertices
        for _ in range(times):
            a, b = kernels.segments(v, self.closed)
            mids = (a + b) / 2
            out = np.empty((len(a) * 2 + (0 if self.closed else 1), 3))
            out[0:2 * len(a):2] = a
            out[1:2 * len(a):2] = mids
            if not self.closed:
                out[-1] = v[-1]
            v = out
        return PolyCurve3(v, self.closed, check=False)

    def reversed(self) -> "PolyCurve3":
        return PolyCurve3(self.vertices[::-1], self.closed, check=False)

    def to_json(self) -> dict:
        return {"closed": self.closed, "vertices": self.vertices.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> "PolyCurve3":
        try:
            return cls(data["vertices"], bool(data.get("closed", True)))
        except (KeyError, TypeError) as exc:
            raise InputError(f"bad curve record: {exc}") from exc


def min_distance(c1: PolyCurve3, c2: PolyCurve3) -> float:
    return kernels.curve_clearance(c1.vertices, c1.closed, c2.vertices, c2.closed)[0]


def make_torus_knot_curve(p: int, q: int, major_radius: float, minor_radius: float,
                          n: int) -> PolyCurve3:
    """PL (p, q) curve on the standard torus.

    The curve winds ``p`` times along the core circle (counter-clockwise in
    the xy-plane) and ``q`` times around it, with the meridian angle measured
    right-handedly about the core tangent.  This is the convention of the
    tube chart of a planar circle, so parallel pushoffs link ``p*q`` times.
    """
    p, q, n = int(p), int(q), int(n)
    if (p, q) not in ((1, 0), (0, 1)) and math.gcd(p, q) != 1:
        raise InputError(f"gcd({p}, {q}) != 1: not a simple closed curve")
    if not 0 < minor_radius < major_radius:
        raise InputError("need 0 < minor_radius < major_radius")
    if n < 12 * (abs(p) + abs(q)):
        raise InputError(f"n must be at least 12*(|p|+|q|) = {12 * (abs(p) + abs(q))}")
    t = np.arange(n) * (2 * np.pi / n)
    rho = major_radius + minor_radius * np.cos(q * t)
    pts = np.column_stack([rho * np.cos(p * t), rho * np.sin(p * t),
                           -minor_radius * np.sin(q * t)])
    return PolyCurve3(pts, closed=True)


def make_circle(center=(0.0, 0.0, 0.0), radius: float = 1.0, n: int = 64,
                normal=(0.0, 0.0, 1.0)) -> PolyCurve3:
    """Round circle, counter-clockwise about ``normal``."""
    c = np.asarray(center, dtype=float)
    nz = np.asarray(normal, dtype=float)
    nz = nz / np.linalg.norm(nz)
    ref = np.array([1.0, 0.0, 0.0]) if abs(nz[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    ex = ref - nz * (ref @ nz)
    ex /= np.linalg.norm(ex)
    ey = np.cross(nz, ex)
    t = np.arange(n) * (2 * np.pi / n)
    return PolyCurve3(c + radius * (np.cos(t)[:, None] * ex + np.sin(t)[:, None] * ey))


@dataclass(frozen=True)
class Attachment:
    """Where an arc end meets a circle: segment index and fraction along it."""

    circle: int
    segment: int
    fraction: float
    point: np.ndarray = field(compare=False, repr=False)


def _locate_on_curve(curve: PolyCurve3, x: np.ndarray) -> tuple[int, float, float]:
    a, b = curve.segments()
    ab = b - a
    t = np.clip(np.einsum("ij,ij->i", x - a, ab) / np.einsum("ij,ij->i", ab, ab), 0.0, 1.0)
    d = np.linalg.norm(a + t[:, None] * ab - x, axis=1)
    k = int(np.argmin(d))
    return k, float(t[k]), float(d[k])


class SpatialGraph:
    """Connected graph made of closed circles plus arcs ending on circles.

    This is the shape of a knot together with a tunnel system.
    """

    def __init__(self, circles, arcs=(), *, check: bool = True):
        self.circles = tuple(circles)
        self.arcs = tuple(arcs)
        if not self.circles:
            raise InputError("a spatial graph needs at least one circle")
        for c in self.circles:
            if not c.closed:
                raise InputError("circles must be closed curves")
        for a in self.arcs:
            if a.closed:
                raise InputError("arcs must be open curves")
        self.attachments = tuple(
            (self._attach(arc.vertices[0]), self._attach(arc.vertices[-1]))
            for arc in self.arcs)
        if check:
            self.validate()

    def _attach(self, x: np.ndarray) -> Attachment:
        best = None
        for ci, c in enumerate(self.circles):
            k, t, d = _locate_on_curve(c, x)
            if best is None or d < best[3]:
                best = (ci, k, t, d)
        ci, k, t, d = best
        if d > TOL_GEOM:
            raise InputError(f"arc endpoint {x.tolist()} is {d:.3g} away from every circle")
        return Attachment(ci, k, t, np.array(x, dtype=float))

    # -- topology ---------------------------------------------------------
    def junctions(self) -> list[tuple[int, float]]:
        """Distinct junction points as ``(circle, arclength position)``."""
        out = []
        for ends in self.attachments:
            for att in ends:
                pos = _arclength_at(self.circles[att.circle], att.segment, att.fraction)
                if not any(c == att.circle and abs(p - pos) <= TOL_GEOM for c, p in out):
                    out.append((att.circle, pos))
        return out

    def euler_characteristic(self) -> int:
        """V - E of the graph; a circle without junctions counts as one loop."""
        junctions = self.junctions()
        v = len(junctions)
        e = len(self.arcs)
        for ci in range(len(self.circles)):
            count = sum(1 for c, _ in junctions if c == ci)
            if count == 0:
                v += 1
                e += 1
            else:
                e += count
        return v - e

    def expected_genus(self) -> int:
        return 1 - self.euler_characteristic()

    def is_connected(self) -> bool:
        n = len(self.circles)
        if n == 1:
            return True
        rows = [a.circle for a, _ in self.attachments]
        cols = [b.circle for _, b in self.attachments]
        adj = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
        return connected_components(adj, directed=False)[0] == 1

    # -- validation -------------------------------------------------------
    def validate(self) -> None:
        if not self.is_connected():
            raise InputError("spatial graph is not connected")
        pieces = list(self.circles) + list(self.arcs)
        touching = self._touching_segments()
        for i in range(len(pieces)):
            for j in range(i + 1, len(pieces)):
                a, b = pieces[i], pieces[j]
                a0, a1 = a.segments()
                b0, b1 = b.segments()
                d = kernels._seg_seg_np(a0[:, None], a1[:, None], b0[None], b1[None])
                for si, sj in touching.get((i, j), ()):
                    d[si, sj] = np.inf
                if d.size and d.min() <= TOL_GEOM:
                    si, sj = np.unravel_index(np.argmin(d), d.shape)
                    raise InputError(
                        f"graph pieces {i} and {j} meet away from a declared endpoint "
                        f"(segments {si}, {sj})")

    def _touching_segments(self) -> dict:
        """Segment pairs allowed to touch because they share a junction point."""
        nc = len(self.circles)
        out: dict = {}
        ends = []
        for ai, arc in enumerate(self.arcs):
            for end, att in zip((0, -1), self.attachments[ai]):
                seg = 0 if end == 0 else arc.n_segments - 1
                circ = self.circles[att.circle]
                near = {att.segment}
                if att.fraction <= TOL_GEOM:
                    near.add((att.segment - 1) % circ.n_segments)
                if att.fraction >= 1 - TOL_GEOM:
                    near.add((att.segment + 1) % circ.n_segments)
                for s in near:
                    out.setdefault((att.circle, nc + ai), []).append((s, seg))
                ends.append((nc + ai, seg, att))
        for x in range(len(ends)):
            for y in range(x + 1, len(ends)):
                (pa, sa, ta), (pb, sb, tb) = ends[x], ends[y]
                if np.linalg.norm(ta.point - tb.point) <= TOL_GEOM and pa != pb:
                    out.setdefault((pa, pb), []).append((sa, sb))
        return out

    def clearance(self) -> float:
        """Thickness estimate: min of curvature radius and far-pair distance.

        A segment pair counts as *far* when the path between them inside the
        graph is more than 1.5 times their Euclidean distance plus their
        lengths; nearby pairs along the graph are governed by curvature.
        """
        pieces = list(self.circles) + list(self.arcs)
        pts, seg_a, seg_b = [], [], []
        index_of = {}
        offset = 0
        for pi, piece in enumerate(pieces):
            v = piece.vertices
            pts.append(v)
            idx = np.arange(len(v)) + offset
            index_of[pi] = idx
            seg_a.append(idx if piece.closed else idx[:-1])
            seg_b.append(np.roll(idx, -1) if piece.closed else idx[1:])
            offset += len(v)
        P = np.vstack(pts)
        sa = np.concatenate(seg_a)
        sb = np.concatenate(seg_b)
        # glue arc endpoints onto their circles with zero-length links
        rows = list(sa)
        cols = list(sb)
        w = list(np.linalg.norm(P[sb] - P[sa], axis=1))
        nc = len(self.circles)
        for ai, ends in enumerate(self.attachments):
            idx = index_of[nc + ai]
            for end, att in zip((idx[0], idx[-1]), ends):
                circ_idx = index_of[att.circle]
                for k in (att.segment, (att.segment + 1) % len(circ_idx)):
                    rows.append(end)
                    cols.append(circ_idx[k])
                    w.append(float(np.linalg.norm(P[end] - P[circ_idx[k]])) + 1e-12)
        graph = coo_matrix((w, (rows, cols)), shape=(len(P), len(P))).tocsr()
        path = shortest_path(graph, directed=False)
        a0, a1 = P[sa], P[sb]
        seg_len = np.linalg.norm(a1 - a0, axis=1)
        d = kernels._seg_seg_np(a0[:, None], a1[:, None], a0[None], a1[None])
        along = np.minimum.reduce([path[np.ix_(sa, sa)], path[np.ix_(sa, sb)],
                                   path[np.ix_(sb, sa)], path[np.ix_(sb, sb)]])
        far = along > 1.5 * d + seg_len[:, None] + seg_len[None, :]
        far_min = float(d[far].min()) if np.any(far) else np.inf
        return min(far_min, self.curvature_radius())

    def curvature_radius(self) -> float:
        best = np.inf
        for piece in list(self.circles) + list(self.arcs):
            v = piece.vertices
            if piece.closed:
                prev, nxt = np.roll(v, 1, axis=0), np.roll(v, -1, axis=0)
                cur = v
            else:
                prev, cur, nxt = v[:-2], v[1:-1], v[2:]
            if len(cur) == 0:
                continue
            u = cur - prev
            w = nxt - cur
            lu = np.linalg.norm(u, axis=1)
            lw = np.linalg.norm(w, axis=1)
            cosang = np.clip(np.einsum("ij,ij->i", u, w) / (lu * lw), -1.0, 1.0)
            ang = np.arccos(cosang)
            with np.errstate(divide="ignore"):
                rad = np.where(ang > 1e-12, 0.5 * (lu + lw) / ang, np.inf)
            best = min(best, float(rad.min()))
        return best

    def to_json(self) -> dict:
        return {"circles": [c.to_json() for c in self.circles],
                "arcs": [a.to_json() for a in self.arcs]}

    @classmethod
    def from_json(cls, data: dict) -> "SpatialGraph":
        if not isinstance(data, dict) or "circles" not in data:
            raise InputError("graph record needs a 'circles' list")
        circles = [PolyCurve3.from_json(c) for c in data["circles"]]
        arcs = [PolyCurve3.from_json(a) for a in data.get("arcs", [])]
        return cls(circles, arcs)


def _arclength_at(curve: PolyCurve3, segment: int, fraction: float) -> float:
    a, b = curve.segments()
    lengths = np.linalg.norm(b - a, axis=1)
    pos = float(lengths[:segment].sum() + fraction * lengths[segment])
    total = float(lengths.sum())
    return pos - total if curve.closed and pos >= total - TOL_GEOM else pos

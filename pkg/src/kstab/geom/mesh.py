"""Triangulated closed surfaces: validation, Euler characteristic, OBJ i/o."""
from __future__ import annotations

from collections import deque
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .. import kernels
from ..constants import TOL_GEOM
from ..errors import InputError, MeshError


class SurfaceMesh:
    """Immutable triangle mesh.

    Triangles are vertex-index triples; counter-clockwise order (seen from
    outside) gives the outward normal.
    """

    __slots__ = ("vertices", "triangles", "_edge_cache")

    def __init__(self, vertices, triangles):
        v = np.array(vertices, dtype=np.float64).reshape(-1, 3)
        t = np.array(triangles, dtype=np.int64).reshape(-1, 3)
        if len(t) and (t.min() < 0 or t.max() >= len(v)):
            raise InputError("triangle references a missing vertex")
        v.setflags(write=False)
        t.setflags(write=False)
        self.vertices = v
        self.triangles = t
        self._edge_cache = None

    def __repr__(self) -> str:
        return f"SurfaceMesh(V={self.n_vertices}, F={len(self.triangles)})"

    @property
    def n_vertices(self) -> int:
        """Vertices referenced by at least one triangle."""
        return int(len(np.unique(self.triangles)))

    def _edges(self):
        if self._edge_cache is None:
            t = self.triangles
            directed = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
            face = np.tile(np.arange(len(t)), 3)
            undirected = np.sort(directed, axis=1)
            uniq, inverse, counts = np.unique(undirected, axis=0, return_inverse=True,
                                              return_counts=True)
            self._edge_cache = (directed, face, uniq, inverse.ravel(), counts)
        return self._edge_cache

    @property
    def edges(self) -> np.ndarray:
        return self._edges()[2]

    def edge_faces(self) -> dict[tuple[int, int], list[int]]:
        directed, face, uniq, inverse, _ = self._edges()
        out: dict[tuple[int, int], list[int]] = {}
        for k, e in enumerate(inverse):
            key = (int(uniq[e, 0]), int(uniq[e, 1]))
            out.setdefault(key, []).append(int(face[k]))
        return out

    # -- invariants -------------------------------------------------------
    def is_closed(self) -> bool:
        counts = self._edges()[4]
        return bool(len(counts)) and bool(np.all(counts == 2))

    def is_oriented(self) -> bool:
        directed = self._edges()[0]
        uniq = np.unique(directed, axis=0)
        return len(uniq) == len(directed)

    def triangle_coords(self) -> np.ndarray:
        return self.vertices[self.triangles]

    def embedding_defects(self, tol: float = TOL_GEOM, limit: int = 1) -> list[tuple[int, int, float]]:
        """Pairs of vertex-disjoint triangles closer than ``tol``."""
        tris = self.triangle_coords()
        if len(tris) < 2:
            return []
        centroid = tris.mean(axis=1)
        reach = np.linalg.norm(tris - centroid[:, None], axis=2).max(axis=1)
        tree = cKDTree(centroid)
        pairs = tree.query_pairs(2 * float(reach.max()) + tol, output_type="ndarray")
        if len(pairs) == 0:
            return []
        i, j = pairs[:, 0], pairs[:, 1]
        gap = np.linalg.norm(centroid[i] - centroid[j], axis=1) - reach[i] - reach[j]
        pairs = pairs[gap <= tol]
        t = self.triangles
        shared = (t[pairs[:, 0], :, None] == t[pairs[:, 1], None, :]).any(axis=(1, 2))
        pairs = pairs[~shared]
        if len(pairs) == 0:
            return []
        dist = kernels.tri_pair_distance(tris, pairs)
        bad = np.nonzero(dist <= tol)[0]
        return [(int(pairs[k, 0]), int(pairs[k, 1]), float(dist[k])) for k in bad[:limit]]

    def min_triangle_clearance(self) -> float:
        """Smallest gap between vertex-disjoint triangles near each other."""
        tris = self.triangle_coords()
        centroid = tris.mean(axis=1)
        reach = np.linalg.norm(tris - centroid[:, None], axis=2).max(axis=1)
        pairs = cKDTree(centroid).query_pairs(2 * float(reach.max()) * 1.5, output_type="ndarray")
        t = self.triangles
        if len(pairs) == 0:
            return np.inf
        shared = (t[pairs[:, 0], :, None] == t[pairs[:, 1], None, :]).any(axis=(1, 2))
        pairs = pairs[~shared]
        if len(pairs) == 0:
            return np.inf
        return float(kernels.tri_pair_distance(tris, pairs).min())

    def signed_volume(self) -> float:
        tris = self.triangle_coords()
        return float(np.einsum("ij,ij->i", tris[:, 0], np.cross(tris[:, 1], tris[:, 2])).sum() / 6.0)

    def face_components(self, cut_edges=()) -> np.ndarray:
        """Component label per triangle, not crossing the given undirected edges."""
        cut = {tuple(sorted(map(int, e))) for e in cut_edges}
        labels = -np.ones(len(self.triangles), dtype=np.int64)
        adj: dict[int, list[int]] = {}
        for key, faces in self.edge_faces().items():
            if key in cut:
                continue
            for a in faces:
                for b in faces:
                    if a != b:
                        adj.setdefault(a, []).append(b)
        comp = 0
        for start in range(len(self.triangles)):
            if labels[start] >= 0:
                continue
            labels[start] = comp
            queue = deque([start])
            while queue:
                f = queue.popleft()
                for g in adj.get(f, ()):
                    if labels[g] < 0:
                        labels[g] = comp
                        queue.append(g)
            comp += 1
        return labels

    def validate(self, *, embedded: bool = True) -> None:
        """Raise :class:`MeshError` unless closed, oriented, embedded, integer genus."""
        if not self.is_closed():
            raise MeshError("mesh is not closed: some edge is not shared by exactly two triangles")
        if not self.is_oriented():
            raise MeshError("mesh orientation is inconsistent")
        if embedded:
            bad = self.embedding_defects()
            if bad:
                i, j, d = bad[0]
                raise MeshError(f"mesh is not embedded: triangles {i} and {j} are {d:.3g} apart")
        if (2 - euler_characteristic(self)) % 2:
            raise MeshError("2 - chi is odd")

    # -- i/o ----------------------------------------------------------------
    def compacted(self) -> tuple["SurfaceMesh", np.ndarray]:
        """Drop unreferenced vertices; returns the mesh and the old->new index map."""
        used = np.unique(self.triangles)
        remap = -np.ones(len(self.vertices), dtype=np.int64)
        remap[used] = np.arange(len(used))
        return SurfaceMesh(self.vertices[used], remap[self.triangles]), remap

    def to_obj(self) -> str:
        mesh, _ = self.compacted()
        lines = [f"v {x:.12g} {y:.12g} {z:.12g}" for x, y, z in mesh.vertices]
        lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in mesh.triangles]
        return "\n".join(lines) + "\n"

    def write_obj(self, path) -> None:
        Path(path).write_text(self.to_obj())

    @classmethod
    def from_obj(cls, text: str) -> "SurfaceMesh":
        verts, faces = [], []
        for line in text.splitlines():
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                verts.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                idx = [int(p.split("/")[0]) - 1 for p in parts[1:]]
                for k in range(1, len(idx) - 1):
                    faces.append([idx[0], idx[k], idx[k + 1]])
        return cls(verts, faces)


def euler_characteristic(mesh: SurfaceMesh) -> int:
    if not mesh.is_closed():
        raise InputError("euler characteristic requested for a mesh that is not closed")
    return mesh.n_vertices - len(mesh.edges) + len(mesh.triangles)


def genus(mesh: SurfaceMesh) -> int:
    chi = euler_characteristic(mesh)
    if (2 - chi) % 2:
        raise InputError(f"chi = {chi} is odd: not a closed orientable surface")
    return (2 - chi) // 2


def orient_triangles(triangles) -> np.ndarray:
    """Flip triangles so neighbours agree; raises if the surface is non-orientable."""
    tris = np.array(triangles, dtype=np.int64)
    edge_faces: dict[tuple[int, int], list[int]] = {}
    for f, (a, b, c) in enumerate(tris):
        for u, v in ((a, b), (b, c), (c, a)):
            edge_faces.setdefault((min(u, v), max(u, v)), []).append(f)
    done = np.zeros(len(tris), dtype=bool)
    for seed in range(len(tris)):
        if done[seed]:
            continue
        done[seed] = True
        queue = deque([seed])
        while queue:
            f = queue.popleft()
            a, b, c = tris[f]
            for u, v in ((a, b), (b, c), (c, a)):
                for g in edge_faces[(min(u, v), max(u, v))]:
                    if g == f:
                        continue
                    tg = list(tris[g])
                    # g must traverse the shared edge as v -> u
                    same_dir = any(tg[k] == u and tg[(k + 1) % 3] == v for k in range(3))
                    if done[g]:
                        if same_dir:
                            raise MeshError("surface is not orientable")
                        continue
                    if same_dir:
                        tris[g] = tris[g][::-1]
                    done[g] = True
                    queue.append(g)
    return tris


def outward(vertices, triangles) -> SurfaceMesh:
    """Consistently orient, then make normals point out of the enclosed volume."""
    tris = orient_triangles(triangles)
    mesh = SurfaceMesh(vertices, tris)
    if mesh.signed_volume() < 0:
        mesh = SurfaceMesh(vertices, tris[:, ::-1])
    return mesh


def make_sphere_mesh(radius: float = 1.0, center=(0.0, 0.0, 0.0), subdivisions: int = 1) -> SurfaceMesh:
    """Icosphere."""
    t = (1 + 5 ** 0.5) / 2
    verts = [(-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0), (0, -1, t), (0, 1, t),
             (0, -1, -t), (0, 1, -t), (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1)]
    faces = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11), (1, 5, 9), (5, 11, 4),
             (11, 10, 2), (10, 7, 6), (7, 1, 8), (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8),
             (3, 8, 9), (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    verts = [np.array(v, dtype=float) / np.linalg.norm(v) for v in verts]
    for _ in range(subdivisions):
        cache: dict[tuple[int, int], int] = {}

        def mid(a, b):
            key = (min(a, b), max(a, b))
            if key not in cache:
                m = verts[a] + verts[b]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new
    pts = np.asarray(center, dtype=float) + radius * np.array(verts)
    return outward(pts, faces)

"""Hot numeric kernels: linking sums, segment clearances, triangle distances.

Every kernel exists twice: a scalar-loop version compiled with numba
(``*_nb``) and a vectorised numpy version (``*_np``).  The public names
dispatch on :data:`kstab._accel.USE_NUMBA`.  Both paths are exercised by the
test-suite and compared in ``benchmarks/bench_kernels.py``.

Closed polylines are passed as ``(n, 3)`` vertex arrays without a repeated
endpoint; segment ``i`` runs from vertex ``i`` to vertex ``(i + 1) % n``.
"""
import math

import numpy as np

from ._accel import USE_NUMBA, njit

_CHUNK = 256


def segments(points: np.ndarray, closed: bool) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(points, dtype=np.float64)
    if closed:
        return p, np.roll(p, -1, axis=0)
    return p[:-1], p[1:]


# ---------------------------------------------------------------------------
# Gauss linking sum (exact solid angle of a segment pair)
# ---------------------------------------------------------------------------

@njit
def _cross3(ax, ay, az, bx, by, bz):
    return ay * bz - az * by, az * bx - ax * bz, ax * by - ay * bx


@njit
def _gauss_raw_nb(a, b):
    n = a.shape[0]
    m = b.shape[0]
    total = 0.0
    for i in range(n):
        i2 = (i + 1) % n
        x1, y1, z1 = a[i, 0], a[i, 1], a[i, 2]
        x2, y2, z2 = a[i2, 0], a[i2, 1], a[i2, 2]
        for j in range(m):
            j2 = (j + 1) % m
            x3, y3, z3 = b[j, 0], b[j, 1], b[j, 2]
            x4, y4, z4 = b[j2, 0], b[j2, 1], b[j2, 2]
            r13 = (x3 - x1, y3 - y1, z3 - z1)
            r14 = (x4 - x1, y4 - y1, z4 - z1)
            r23 = (x3 - x2, y3 - y2, z3 - z2)
            r24 = (x4 - x2, y4 - y2, z4 - z2)
            n1 = _cross3(r13[0], r13[1], r13[2], r14[0], r14[1], r14[2])
            n2 = _cross3(r14[0], r14[1], r14[2], r24[0], r24[1], r24[2])
            n3 = _cross3(r24[0], r24[1], r24[2], r23[0], r23[1], r23[2])
            n4 = _cross3(r23[0], r23[1], r23[2], r13[0], r13[1], r13[2])
            l1 = math.sqrt(n1[0] * n1[0] + n1[1] * n1[1] + n1[2] * n1[2])
            l2 = math.sqrt(n2[0] * n2[0] + n2[1] * n2[1] + n2[2] * n2[2])
            l3 = math.sqrt(n3[0] * n3[0] + n3[1] * n3[1] + n3[2] * n3[2])
            l4 = math.sqrt(n4[0] * n4[0] + n4[1] * n4[1] + n4[2] * n4[2])
            if l1 == 0.0 or l2 == 0.0 or l3 == 0.0 or l4 == 0.0:
                continue
            d12 = (n1[0] * n2[0] + n1[1] * n2[1] + n1[2] * n2[2]) / (l1 * l2)
            d23 = (n2[0] * n3[0] + n2[1] * n3[1] + n2[2] * n3[2]) / (l2 * l3)
            d34 = (n3[0] * n4[0] + n3[1] * n4[1] + n3[2] * n4[2]) / (l3 * l4)
            d41 = (n4[0] * n1[0] + n4[1] * n1[1] + n4[2] * n1[2]) / (l4 * l1)
            omega = (math.asin(min(1.0, max(-1.0, d12))) + math.asin(min(1.0, max(-1.0, d23)))
                     + math.asin(min(1.0, max(-1.0, d34))) + math.asin(min(1.0, max(-1.0, d41))))
            c = _cross3(x4 - x3, y4 - y3, z4 - z3, x2 - x1, y2 - y1, z2 - z1)
            sgn = c[0] * r13[0] + c[1] * r13[1] + c[2] * r13[2]
            if sgn > 0.0:
                total += omega
            elif sgn < 0.0:
                total -= omega
    return total / (4.0 * math.pi)


def _unit_rows(v):
    norm = np.linalg.norm(v, axis=-1)
    ok = norm > 0.0
    out = np.zeros_like(v)
    out[ok] = v[ok] / norm[ok, None]
    return out, ok


def _gauss_raw_np(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    a0, a1 = segments(a, True)
    b0, b1 = segments(b, True)
    total = 0.0
    for start in range(0, len(a0), _CHUNK):
        p1 = a0[start:start + _CHUNK, None, :]
        p2 = a1[start:start + _CHUNK, None, :]
        p3 = b0[None, :, :]
        p4 = b1[None, :, :]
        r13, r14, r23, r24 = p3 - p1, p4 - p1, p3 - p2, p4 - p2
        n1, ok1 = _unit_rows(np.cross(r13, r14))
        n2, ok2 = _unit_rows(np.cross(r14, r24))
        n3, ok3 = _unit_rows(np.cross(r24, r23))
        n4, ok4 = _unit_rows(np.cross(r23, r13))

        def asin_dot(u, v):
            return np.arcsin(np.clip(np.sum(u * v, axis=-1), -1.0, 1.0))

        omega = asin_dot(n1, n2) + asin_dot(n2, n3) + asin_dot(n3, n4) + asin_dot(n4, n1)
        sign = np.sign(np.sum(np.cross(p4 - p3, p2 - p1) * r13, axis=-1))
        omega = np.where(ok1 & ok2 & ok3 & ok4, omega * sign, 0.0)
        total += float(omega.sum())
    return total / (4.0 * math.pi)


# ---------------------------------------------------------------------------
# Signed crossings of a projection
# ---------------------------------------------------------------------------

def projection_basis(direction):
    d = np.asarray(direction, dtype=np.float64)
    d = d / np.linalg.norm(d)
    helper = np.array([1.0, 0.0, 0.0]) if abs(d[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(d, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(d, e1)
    return e1, e2, d


@njit
def _crossings_nb(a, b, e1, e2, d, tol):
    n = a.shape[0]
    m = b.shape[0]
    ax = a @ e1
    ay = a @ e2
    bx = b @ e1
    by = b @ e2
    total = 0
    degenerate = 0
    for i in range(n):
        i2 = (i + 1) % n
        ax0 = ax[i]
        ay0 = ay[i]
        rx = ax[i2] - ax0
        ry = ay[i2] - ay0
        rl = math.sqrt(rx * rx + ry * ry)
        for j in range(m):
            j2 = (j + 1) % m
            bx0 = bx[j]
            by0 = by[j]
            sx = bx[j2] - bx0
            sy = by[j2] - by0
            sl = math.sqrt(sx * sx + sy * sy)
            qx = bx0 - ax0
            qy = by0 - ay0
            denom = rx * sy - ry * sx
            if abs(denom) <= tol * rl * sl:
                # near-parallel: degenerate only if the projected segments nearly touch
                if rl == 0.0 or sl == 0.0:
                    degenerate += 1
                    continue
                offset = abs(qx * ry - qy * rx) / rl
                if offset > tol * (rl + sl):
                    continue
                t0 = (qx * rx + qy * ry) / (rl * rl)
                t1 = ((qx + sx) * rx + (qy + sy) * ry) / (rl * rl)
                if max(t0, t1) < -tol or min(t0, t1) > 1.0 + tol:
                    continue
                degenerate += 1
                continue
            u = (qx * sy - qy * sx) / denom
            v = (qx * ry - qy * rx) / denom
            if u < -tol or u > 1.0 + tol or v < -tol or v > 1.0 + tol:
                continue
            if u < tol or u > 1.0 - tol or v < tol or v > 1.0 - tol:
                degenerate += 1
                continue
            t1x, t1y, t1z = a[i2, 0] - a[i, 0], a[i2, 1] - a[i, 1], a[i2, 2] - a[i, 2]
            t2x, t2y, t2z = b[j2, 0] - b[j, 0], b[j2, 1] - b[j, 1], b[j2, 2] - b[j, 2]
            wx = a[i, 0] + u * t1x - b[j, 0] - v * t2x
            wy = a[i, 1] + u * t1y - b[j, 1] - v * t2y
            wz = a[i, 2] + u * t1z - b[j, 2] - v * t2z
            c = _cross3(t1x, t1y, t1z, t2x, t2y, t2z)
            det = c[0] * wx + c[1] * wy + c[2] * wz
            if det > 0.0:
                total += 1
            elif det < 0.0:
                total -= 1
            else:
                degenerate += 1
    return total, degenerate


def _crossings_np(a, b, e1, e2, d, tol):
    a0, a1 = segments(a, True)
    b0, b1 = segments(b, True)
    total = 0
    degenerate = 0
    bx0, by0 = b0 @ e1, b0 @ e2
    sx, sy = b1 @ e1 - bx0, b1 @ e2 - by0
    sl = np.hypot(sx, sy)
    for start in range(0, len(a0), _CHUNK):
        A0 = a0[start:start + _CHUNK]
        A1 = a1[start:start + _CHUNK]
        ax0, ay0 = (A0 @ e1)[:, None], (A0 @ e2)[:, None]
        rx, ry = (A1 @ e1)[:, None] - ax0, (A1 @ e2)[:, None] - ay0
        rl = np.hypot(rx, ry)
        qx, qy = bx0[None, :] - ax0, by0[None, :] - ay0
        denom = rx * sy[None, :] - ry * sx[None, :]
        parallel = np.abs(denom) <= tol * rl * sl[None, :]

        with np.errstate(divide="ignore", invalid="ignore"):
            rl2 = np.where(rl > 0, rl * rl, 1.0)
            offset = np.abs(qx * ry - qy * rx) / np.where(rl > 0, rl, 1.0)
            t0 = (qx * rx + qy * ry) / rl2
            t1 = ((qx + sx) * rx + (qy + sy) * ry) / rl2
            near = (offset <= tol * (rl + sl)) & ~(
                (np.maximum(t0, t1) < -tol) | (np.minimum(t0, t1) > 1.0 + tol))
            zero_len = (rl == 0.0) | (sl[None, :] == 0.0)
            degenerate += int(np.count_nonzero(parallel & (zero_len | near)))

            safe = np.where(parallel, 1.0, denom)
            u = (qx * sy[None, :] - qy * sx[None, :]) / safe
            v = (qx * ry - qy * rx) / safe
        inside = ~parallel & (u >= -tol) & (u <= 1.0 + tol) & (v >= -tol) & (v <= 1.0 + tol)
        edge = inside & ((u < tol) | (u > 1.0 - tol) | (v < tol) | (v > 1.0 - tol))
        degenerate += int(np.count_nonzero(edge))
        hit = inside & ~edge
        ii, jj = np.nonzero(hit)
        if len(ii):
            t1v = A1[ii] - A0[ii]
            t2v = b1[jj] - b0[jj]
            w = (A0[ii] + u[ii, jj, None] * t1v) - (b0[jj] + v[ii, jj, None] * t2v)
            det = np.sum(np.cross(t1v, t2v) * w, axis=1)
            total += int(np.count_nonzero(det > 0)) - int(np.count_nonzero(det < 0))
            degenerate += int(np.count_nonzero(det == 0))
    return total, degenerate


# ---------------------------------------------------------------------------
# Segment / segment distances
# ---------------------------------------------------------------------------

@njit
def _seg_seg_vec(d1x, d1y, d1z, d2x, d2y, d2z, rx, ry, rz):
    """Closest distance of segments ``p1 + s*d1`` and ``p2 + t*d2`` with ``r = p1 - p2``."""
    a = d1x * d1x + d1y * d1y + d1z * d1z
    e = d2x * d2x + d2y * d2y + d2z * d2z
    f = d2x * rx + d2y * ry + d2z * rz
    eps = 1e-300
    if a <= eps and e <= eps:
        s = 0.0
        t = 0.0
    elif a <= eps:
        s = 0.0
        t = min(1.0, max(0.0, f / e))
    else:
        c = d1x * rx + d1y * ry + d1z * rz
        if e <= eps:
            t = 0.0
            s = min(1.0, max(0.0, -c / a))
        else:
            b = d1x * d2x + d1y * d2y + d1z * d2z
            denom = a * e - b * b
            if denom > 0.0:
                s = min(1.0, max(0.0, (b * f - c * e) / denom))
            else:
                s = 0.0
            t = (b * s + f) / e
            if t < 0.0:
                t = 0.0
                s = min(1.0, max(0.0, -c / a))
            elif t > 1.0:
                t = 1.0
                s = min(1.0, max(0.0, (b - c) / a))
    dx = rx + s * d1x - t * d2x
    dy = ry + s * d1y - t * d2y
    dz = rz + s * d1z - t * d2z
    return math.sqrt(dx * dx + dy * dy + dz * dz)


@njit
def _seg_seg_idx(P, i0, i1, Q, j0, j1):
    return _seg_seg_vec(P[i1, 0] - P[i0, 0], P[i1, 1] - P[i0, 1], P[i1, 2] - P[i0, 2],
                        Q[j1, 0] - Q[j0, 0], Q[j1, 1] - Q[j0, 1], Q[j1, 2] - Q[j0, 2],
                        P[i0, 0] - Q[j0, 0], P[i0, 1] - Q[j0, 1], P[i0, 2] - Q[j0, 2])


@njit
def _seg_seg_idx2(a0, a1, i, b0, b1, j):
    return _seg_seg_vec(a1[i, 0] - a0[i, 0], a1[i, 1] - a0[i, 1], a1[i, 2] - a0[i, 2],
                        b1[j, 0] - b0[j, 0], b1[j, 1] - b0[j, 1], b1[j, 2] - b0[j, 2],
                        a0[i, 0] - b0[j, 0], a0[i, 1] - b0[j, 1], a0[i, 2] - b0[j, 2])


@njit
def _seg_seg_nb(p1, q1, p2, q2):
    P = np.empty((2, 3))
    Q = np.empty((2, 3))
    P[0] = p1
    P[1] = q1
    Q[0] = p2
    Q[1] = q2
    return _seg_seg_idx(P, 0, 1, Q, 0, 1)


def _seg_seg_np(p1, q1, p2, q2):
    """Vectorised segment distance; all arguments broadcast to ``(..., 3)``."""
    p1, q1, p2, q2 = np.broadcast_arrays(p1, q1, p2, q2)
    d1 = q1 - p1
    d2 = q2 - p2
    r = p1 - p2
    a = np.sum(d1 * d1, axis=-1)
    e = np.sum(d2 * d2, axis=-1)
    f = np.sum(d2 * r, axis=-1)
    c = np.sum(d1 * r, axis=-1)
    b = np.sum(d1 * d2, axis=-1)
    eps = 1e-300
    a_ok = a > eps
    e_ok = e > eps
    sa = np.where(a_ok, a, 1.0)
    se = np.where(e_ok, e, 1.0)
    denom = a * e - b * b
    s = np.where(denom > 0.0, np.clip((b * f - c * e) / np.where(denom > 0.0, denom, 1.0), 0.0, 1.0), 0.0)
    t = (b * s + f) / se
    low = t < 0.0
    high = t > 1.0
    s = np.where(low, np.clip(-c / sa, 0.0, 1.0), s)
    s = np.where(high, np.clip((b - c) / sa, 0.0, 1.0), s)
    t = np.clip(t, 0.0, 1.0)
    # degenerate segments
    only_e = ~a_ok & e_ok
    only_a = a_ok & ~e_ok
    both = ~a_ok & ~e_ok
    s = np.where(only_e | both, 0.0, s)
    t = np.where(only_e, np.clip(f / se, 0.0, 1.0), t)
    s = np.where(only_a, np.clip(-c / sa, 0.0, 1.0), s)
    t = np.where(only_a | both, 0.0, t)
    diff = (p1 + s[..., None] * d1) - (p2 + t[..., None] * d2)
    return np.sqrt(np.sum(diff * diff, axis=-1))


@njit
def _self_clearance_nb(p, closed):
    n = p.shape[0]
    nseg = n if closed else n - 1
    best = np.inf
    bi = -1
    bj = -1
    for i in range(nseg):
        for j in range(i + 2, nseg):
            if closed and i == 0 and j == nseg - 1:
                continue
            dist = _seg_seg_idx(p, i, (i + 1) % n, p, j, (j + 1) % n)
            if dist < best:
                best = dist
                bi = i
                bj = j
    return best, bi, bj


def _self_clearance_np(p, closed):
    s0, s1 = segments(p, closed)
    nseg = len(s0)
    best, bi, bj = np.inf, -1, -1
    for start in range(0, nseg, _CHUNK):
        rows = np.arange(start, min(start + _CHUNK, nseg))
        dist = _seg_seg_np(s0[rows, None], s1[rows, None], s0[None, :], s1[None, :])
        jj = np.arange(nseg)[None, :]
        mask = jj >= rows[:, None] + 2
        if closed:
            mask &= ~((rows[:, None] == 0) & (jj == nseg - 1))
        dist = np.where(mask, dist, np.inf)
        k = np.unravel_index(np.argmin(dist), dist.shape)
        if dist[k] < best:
            best, bi, bj = float(dist[k]), int(rows[k[0]]), int(k[1])
    return best, bi, bj


@njit
def _cross_clearance_nb(a0, a1, b0, b1):
    best = np.inf
    bi = -1
    bj = -1
    for i in range(a0.shape[0]):
        for j in range(b0.shape[0]):
            dist = _seg_seg_idx2(a0, a1, i, b0, b1, j)
            if dist < best:
                best = dist
                bi = i
                bj = j
    return best, bi, bj


def _cross_clearance_np(a0, a1, b0, b1):
    best, bi, bj = np.inf, -1, -1
    for start in range(0, len(a0), _CHUNK):
        dist = _seg_seg_np(a0[start:start + _CHUNK, None], a1[start:start + _CHUNK, None],
                           b0[None, :], b1[None, :])
        k = np.unravel_index(np.argmin(dist), dist.shape)
        if dist[k] < best:
            best, bi, bj = float(dist[k]), start + int(k[0]), int(k[1])
    return best, bi, bj


# ---------------------------------------------------------------------------
# Triangle / triangle distance (narrow phase of the embedding check)
# ---------------------------------------------------------------------------

@njit
def _point_tri_nb(x, a, b, c):
    ab = b - a
    ac = c - a
    nrm = np.cross(ab, ac)
    nn = np.dot(nrm, nrm)
    if nn > 0.0:
        ax = x - a
        # barycentric coordinates of the projection
        v = np.dot(np.cross(ax, ac), nrm) / nn
        w = np.dot(np.cross(ab, ax), nrm) / nn
        if v >= 0.0 and w >= 0.0 and v + w <= 1.0:
            return abs(np.dot(ax, nrm)) / math.sqrt(nn)
    d = _seg_seg_nb(x, x, a, b)
    d = min(d, _seg_seg_nb(x, x, b, c))
    d = min(d, _seg_seg_nb(x, x, c, a))
    return d


@njit
def _edge_crosses_tri_nb(p, q, a, b, c):
    nrm = np.cross(b - a, c - a)
    dp = np.dot(p - a, nrm)
    dq = np.dot(q - a, nrm)
    if dp * dq >= 0.0:
        return False
    t = dp / (dp - dq)
    x = p + t * (q - p)
    nn = np.dot(nrm, nrm)
    ax = x - a
    v = np.dot(np.cross(ax, c - a), nrm) / nn
    w = np.dot(np.cross(b - a, ax), nrm) / nn
    return v >= 0.0 and w >= 0.0 and v + w <= 1.0


@njit
def _tri_pair_nb(tris, pairs):
    out = np.empty(pairs.shape[0])
    for k in range(pairs.shape[0]):
        P = tris[pairs[k, 0]]
        Q = tris[pairs[k, 1]]
        hit = False
        for e in range(3):
            if _edge_crosses_tri_nb(P[e], P[(e + 1) % 3], Q[0], Q[1], Q[2]):
                hit = True
            if _edge_crosses_tri_nb(Q[e], Q[(e + 1) % 3], P[0], P[1], P[2]):
                hit = True
        if hit:
            out[k] = 0.0
            continue
        best = np.inf
        for e in range(3):
            for f in range(3):
                best = min(best, _seg_seg_nb(P[e], P[(e + 1) % 3], Q[f], Q[(f + 1) % 3]))
            best = min(best, _point_tri_nb(P[e], Q[0], Q[1], Q[2]))
            best = min(best, _point_tri_nb(Q[e], P[0], P[1], P[2]))
        out[k] = best
    return out


def _point_tri_np(x, a, b, c):
    ab = b - a
    ac = c - a
    nrm = np.cross(ab, ac)
    nn = np.sum(nrm * nrm, axis=-1)
    safe = np.where(nn > 0, nn, 1.0)
    ax = x - a
    v = np.sum(np.cross(ax, ac) * nrm, axis=-1) / safe
    w = np.sum(np.cross(ab, ax) * nrm, axis=-1) / safe
    inside = (nn > 0) & (v >= 0) & (w >= 0) & (v + w <= 1)
    plane = np.abs(np.sum(ax * nrm, axis=-1)) / np.sqrt(safe)
    edge = np.minimum(np.minimum(_seg_seg_np(x, x, a, b), _seg_seg_np(x, x, b, c)),
                      _seg_seg_np(x, x, c, a))
    return np.where(inside, plane, edge)


def _edge_crosses_tri_np(p, q, a, b, c):
    nrm = np.cross(b - a, c - a)
    dp = np.sum((p - a) * nrm, axis=-1)
    dq = np.sum((q - a) * nrm, axis=-1)
    straddle = dp * dq < 0
    t = dp / np.where(straddle, dp - dq, 1.0)
    x = p + t[..., None] * (q - p)
    nn = np.sum(nrm * nrm, axis=-1)
    safe = np.where(nn > 0, nn, 1.0)
    ax = x - a
    v = np.sum(np.cross(ax, c - a) * nrm, axis=-1) / safe
    w = np.sum(np.cross(b - a, ax) * nrm, axis=-1) / safe
    return straddle & (v >= 0) & (w >= 0) & (v + w <= 1)


def _tri_pair_np(tris, pairs):
    P = tris[pairs[:, 0]]
    Q = tris[pairs[:, 1]]
    hit = np.zeros(len(pairs), dtype=bool)
    best = np.full(len(pairs), np.inf)
    for e in range(3):
        e2 = (e + 1) % 3
        hit |= _edge_crosses_tri_np(P[:, e], P[:, e2], Q[:, 0], Q[:, 1], Q[:, 2])
        hit |= _edge_crosses_tri_np(Q[:, e], Q[:, e2], P[:, 0], P[:, 1], P[:, 2])
        for f in range(3):
            f2 = (f + 1) % 3
            best = np.minimum(best, _seg_seg_np(P[:, e], P[:, e2], Q[:, f], Q[:, f2]))
        best = np.minimum(best, _point_tri_np(P[:, e], Q[:, 0], Q[:, 1], Q[:, 2]))
        best = np.minimum(best, _point_tri_np(Q[:, e], P[:, 0], P[:, 1], P[:, 2]))
    return np.where(hit, 0.0, best)


# ---------------------------------------------------------------------------
# Self-crossings of a loop in a (doubly) periodic parameter plane
# ---------------------------------------------------------------------------

@njit
def _seg2_hit(ax, ay, bx, by, cx, cy, dx, dy, tol):
    d1x, d1y = bx - ax, by - ay
    d2x, d2y = dx - cx, dy - cy
    o1 = d1x * (cy - ay) - d1y * (cx - ax)
    o2 = d1x * (dy - ay) - d1y * (dx - ax)
    o3 = d2x * (ay - cy) - d2y * (ax - cx)
    o4 = d2x * (by - cy) - d2y * (bx - cx)
    if o1 * o2 > tol or o3 * o4 > tol:
        return False
    if min(ax, bx) > max(cx, dx) + tol or min(cx, dx) > max(ax, bx) + tol:
        return False
    if min(ay, by) > max(cy, dy) + tol or min(cy, dy) > max(ay, by) + tol:
        return False
    return True


@njit
def _plane_cross_nb(a, b, periodic, tol):
    n = a.shape[0]
    ns = 1 if periodic else 0
    for k in range(n):
        for l in range(k, n):
            ls = round(a[l, 0] - a[k, 0]) if periodic else 0.0
            lt = round(a[l, 1] - a[k, 1])
            for ds in range(-ns, ns + 1):
                for dt in range(-1, 2):
                    ox = -ls + ds
                    oy = -lt + dt
                    zero = abs(ox) < 1e-9 and abs(oy) < 1e-9
                    if k == l and zero:
                        continue
                    cx, cy = a[l, 0] + ox, a[l, 1] + oy
                    dx, dy = b[l, 0] + ox, b[l, 1] + oy
                    if (l - k) % n == 1 or (k - l) % n == 1:
                        if ((abs(b[k, 0] - cx) < 1e-9 and abs(b[k, 1] - cy) < 1e-9)
                                or (abs(dx - a[k, 0]) < 1e-9 and abs(dy - a[k, 1]) < 1e-9)):
                            continue
                    if _seg2_hit(a[k, 0], a[k, 1], b[k, 0], b[k, 1], cx, cy, dx, dy, tol):
                        return k, l
    return -1, -1


def _cross2(u, v):
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


def _plane_cross_np(a, b, periodic, tol):
    n = len(a)
    shifts = [(ds, dt) for ds in ((-1, 0, 1) if periodic else (0,)) for dt in (-1, 0, 1)]
    shifts = np.array(shifts, dtype=float)
    idx = np.arange(n)
    for start in range(0, n, 64):
        rows = idx[start:start + 64]
        a1, b1 = a[rows][:, None, None], b[rows][:, None, None]
        lat = np.round(a[None, :, None] - a[rows][:, None, None])
        if not periodic:
            lat[..., 0] = 0.0
        off = -lat + shifts[None, None]
        a2 = a[None, :, None] + off
        b2 = b[None, :, None] + off
        d1 = b1 - a1
        d2 = b2 - a2
        hit = ((_cross2(d1, a2 - a1) * _cross2(d1, b2 - a1) <= tol)
               & (_cross2(d2, a1 - a2) * _cross2(d2, b1 - a2) <= tol))
        lo1, hi1 = np.minimum(a1, b1), np.maximum(a1, b1)
        lo2, hi2 = np.minimum(a2, b2), np.maximum(a2, b2)
        hit &= np.all((lo1 <= hi2 + tol) & (lo2 <= hi1 + tol), axis=-1)
        k = rows[:, None]
        l = idx[None, :]
        adj = ((l - k) % n == 1) | ((k - l) % n == 1)
        zero = np.all(np.abs(off) < 1e-9, axis=-1)
        touch = (np.all(np.abs(b1 - a2) < 1e-9, axis=-1) | np.all(np.abs(b2 - a1) < 1e-9, axis=-1))
        # neighbours meet at their shared endpoint, in the translate where it coincides
        mask = ((k == l)[:, :, None] & zero) | (adj[:, :, None] & touch)
        hit &= ~mask
        if np.any(hit):
            i, j, _ = np.argwhere(hit)[0]
            return int(rows[i]), int(j)
    return -1, -1


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------

def gauss_raw(a, b) -> float:
    """Raw Gauss linking sum of two closed polylines (not rounded)."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    return float(_gauss_raw_nb(a, b) if USE_NUMBA else _gauss_raw_np(a, b))


def crossing_sum(a, b, direction, tol: float) -> tuple[int, int]:
    """Signed crossing total of ``a`` against ``b`` projected along ``direction``.

    Returns ``(signed_total, degenerate_count)``; the projection is usable
    only when ``degenerate_count == 0``.
    """
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    e1, e2, d = projection_basis(direction)
    fn = _crossings_nb if USE_NUMBA else _crossings_np
    total, degenerate = fn(a, b, e1, e2, d, float(tol))
    return int(total), int(degenerate)


def self_clearance(points, closed: bool) -> tuple[float, int, int]:
    """Smallest distance between non-adjacent segments, with the segment pair."""
    p = np.ascontiguousarray(points, dtype=np.float64)
    nseg = len(p) if closed else len(p) - 1
    if nseg < 3:
        return np.inf, -1, -1
    fn = _self_clearance_nb if USE_NUMBA else _self_clearance_np
    d, i, j = fn(p, bool(closed))
    return float(d), int(i), int(j)


def curve_clearance(a, closed_a: bool, b, closed_b: bool) -> tuple[float, int, int]:
    """Smallest distance between a segment of ``a`` and a segment of ``b``."""
    a0, a1 = segments(a, closed_a)
    b0, b1 = segments(b, closed_b)
    args = [np.ascontiguousarray(x) for x in (a0, a1, b0, b1)]
    fn = _cross_clearance_nb if USE_NUMBA else _cross_clearance_np
    d, i, j = fn(*args)
    return float(d), int(i), int(j)


def tri_pair_distance(tris, pairs) -> np.ndarray:
    """Distance between triangle pairs ``tris[pairs[k, 0]]`` and ``tris[pairs[k, 1]]``."""
    tris = np.ascontiguousarray(tris, dtype=np.float64)
    pairs = np.ascontiguousarray(pairs, dtype=np.int64).reshape(-1, 2)
    if len(pairs) == 0:
        return np.empty(0)
    return _tri_pair_nb(tris, pairs) if USE_NUMBA else _tri_pair_np(tris, pairs)


def plane_self_crossing(a, b, periodic: bool, tol: float = 1e-12):
    """First pair of non-adjacent segments ``a[k]->b[k]`` that meet modulo the unit lattice.

    Theta is always periodic; ``s`` only when ``periodic``.
    """
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    fn = _plane_cross_nb if USE_NUMBA else _plane_cross_np
    k, l = fn(a, b, bool(periodic), float(tol))
    return None if k < 0 else (int(k), int(l))

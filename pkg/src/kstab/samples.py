"""Seeded random PL links with known linking numbers, for property checks."""
from __future__ import annotations

import numpy as np

from . import kernels
from .geom.curves import PolyCurve3


def _rotation(rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def winding_pair(rng: np.random.Generator, q: int | None = None):
    """A wobbly circle and a curve winding ``q`` times around it; ``|lk| = |q|``.

    The pair is rigidly moved by a random proper rotation and translation,
    which preserves the linking number.
    """
    if q is None:
        q = int(rng.integers(-4, 5))
    n1 = int(rng.integers(24, 80))
    n2 = int(rng.integers(max(24, 12 * abs(q)), 160))
    R = rng.uniform(1.5, 3.0)
    # jittered but evenly spread, so no chord strays far from the circle
    t1 = (np.arange(n1) + rng.uniform(-0.3, 0.3, n1)) * (2 * np.pi / n1)
    wob = 1 + 0.05 * np.sin(3 * t1 + rng.uniform(0, 6))
    a = np.column_stack([R * wob * np.cos(t1), R * wob * np.sin(t1), 0.1 * np.sin(2 * t1)])
    r = rng.uniform(0.5, 0.9)
    t2 = np.arange(n2) * (2 * np.pi / n2) + rng.uniform(0, 0.1)
    c = np.column_stack([R * np.cos(t2), R * np.sin(t2), 0 * t2])
    radial = np.column_stack([np.cos(t2), np.sin(t2), 0 * t2])
    z = np.array([0.0, 0.0, 1.0])
    b = c + r * (np.cos(q * t2)[:, None] * radial + np.sin(q * t2)[:, None] * z)
    rot = _rotation(rng)
    shift = rng.normal(size=3)
    a = a @ rot.T + shift
    b = b @ rot.T + shift
    if rng.random() < 0.5:
        a = a[::-1].copy()
    return PolyCurve3(a), PolyCurve3(b), abs(q)


def far_pair(rng: np.random.Generator):
    """Two random polygons in disjoint balls; linking number 0."""
    def blob(n):
        t = np.sort(rng.uniform(0, 2 * np.pi, n))
        rad = rng.uniform(0.5, 1.0, n)
        return np.column_stack([rad * np.cos(t), rad * np.sin(t), rng.uniform(-0.5, 0.5, n)])
    a = blob(int(rng.integers(5, 30))) @ _rotation(rng).T
    b = blob(int(rng.integers(5, 30))) @ _rotation(rng).T + np.array([3.5, 0, 0])
    return PolyCurve3(a, check=False), PolyCurve3(b, check=False), 0


def random_link_pair(rng: np.random.Generator, min_gap: float = 1e-2):
    """A random disjoint pair with its expected ``|lk|``, drawn from both families."""
    while True:
        a, b, expect = (winding_pair(rng) if rng.random() < 0.8 else far_pair(rng))
        gap = kernels.curve_clearance(a.vertices, True, b.vertices, True)[0]
        if gap > min_gap:
            return a, b, expect

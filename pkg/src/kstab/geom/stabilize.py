"""Geometric K-stabilization: add a handle to a tube surface away from the knot."""
from __future__ import annotations

import numpy as np

from ..errors import GeometryError, PlacementError
from .mesh import euler_characteristic
from .surface_curves import CurveOnSurface
from .tubes import HandleSite, TubeSurface, attach_handle


def knot_corridor(knot: CurveOnSurface, dilate: int = 1) -> dict[int, np.ndarray]:
    """Cells met by the knot, grown by ``dilate`` cells; keyed by chart id."""
    chart = knot.chart
    mask = np.zeros((chart.cells_s, chart.n_circ), dtype=bool)
    for i, j, _ in knot.refinement().seg_tri:
        mask[i, j] = True
    grown = mask.copy()
    for _ in range(dilate):
        g = grown.copy()
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                shifted = np.roll(np.roll(grown, di, axis=0), dj, axis=1)
                if not chart.periodic:
                    if di == 1:
                        shifted[0] = False
                    elif di == -1:
                        shifted[-1] = False
                g |= shifted
        grown = g
    return {chart.chart_id: grown}


def _block_cells(chart, i0, j0, k):
    return [((i0 + a) % chart.cells_s, (j0 + b) % chart.n_circ) for a in range(k) for b in range(k)]


def admissible_blocks(surface: TubeSurface, knot: CurveOnSurface, block: int = 2) -> list[tuple[int, int, int]]:
    """Corner cells ``(chart, i, j)`` of blocks that are live and clear of the knot corridor."""
    forbidden = knot_corridor(knot)
    out = []
    for ch in surface.charts:
        if not ch.periodic:
            continue
        live = ch.live()
        bad = ~live
        if ch.chart_id in forbidden:
            bad = bad | forbidden[ch.chart_id]
        # grow removed cells by one so blocks never touch a hole
        for i in range(ch.cells_s):
            for j in range(ch.n_circ):
                cells = _block_cells(ch, i - 1, j - 1, block + 2)
                if not any(~live[c] for c in cells) and not any(bad[c] for c in _block_cells(ch, i, j, block)):
                    out.append((ch.chart_id, i, j))
    return out


def _apart(surface, a, b, block):
    if a[0] != b[0]:
        return True
    ch = surface.chart(a[0])
    da = abs(a[1] - b[1]) % ch.cells_s
    da = min(da, ch.cells_s - da)
    dj = abs(a[2] - b[2]) % ch.n_circ
    dj = min(dj, ch.n_circ - dj)
    return da > block + 1 or dj > block + 1


def random_site(surface: TubeSurface, knot: CurveOnSurface, rng: np.random.Generator,
                block: int = 2) -> HandleSite:
    blocks = admissible_blocks(surface, knot, block)
    if len(blocks) < 2:
        raise PlacementError("no room for a handle away from the knot")
    for _ in range(200):
        x, y = rng.choice(len(blocks), size=2, replace=False)
        a, b = blocks[x], blocks[y]
        if _apart(surface, a, b, block):
            return HandleSite(a[0], a[1], a[2], b[0], b[1], b[2], block)
    raise PlacementError("could not find two separated handle sites")


def k_stabilize_geometric(surface: TubeSurface, knot: CurveOnSurface,
                          site: HandleSite) -> tuple[TubeSurface, CurveOnSurface]:
    """Attach a handle at ``site``; the knot keeps its exact point set."""
    new = attach_handle(surface, site, forbidden=knot_corridor(knot))
    if euler_characteristic(surface.mesh) - euler_characteristic(new.mesh) != 2:
        raise GeometryError("handle did not lower the Euler characteristic by 2")
    moved = knot.rehosted(new)
    if not np.array_equal(moved.polyline().vertices, knot.polyline().vertices):
        raise GeometryError("knot moved while adding the handle")
    return new, moved


def k_stabilize_random(surface: TubeSurface, knot: CurveOnSurface, rng: np.random.Generator,
                       block: int = 2, attempts: int = 25):
    """Stabilize at a random admissible site, resampling sites the handle cannot use."""
    last = None
    for _ in range(attempts):
        site = random_site(surface, knot, rng, block)
        try:
            new, moved = k_stabilize_geometric(surface, knot, site)
            return new, moved, site
        except PlacementError as exc:
            last = exc
    raise PlacementError(f"no usable handle site in {attempts} tries: {last}")

"""Command-line front end.

Every command reads JSON (files, inline text, or ``fixture:NAME``) and
prints one JSON document.  Exit codes: 0 ok, 1 bad input, 2 numerical
failure, 3 slope mismatch.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .errors import InputError, KStabError
from .geom.curves import SpatialGraph
from .geom.mesh import SurfaceMesh, euler_characteristic, genus
from .geom.tubes import TubeSurface, make_tube_surface

COMMANDS = ("slope", "genus", "twist", "stabilize", "connect-sum", "realize-slope",
            "decompose", "common-stab", "export-obj", "selftest")


# -- input parsing -------------------------------------------------------------
def _load(spec: str):
    """A fixture name, a path to a JSON/OBJ file, or inline JSON."""
    if spec.startswith("fixture:"):
        return ("fixture", spec[len("fixture:"):])
    path = Path(spec)
    if path.suffix.lower() == ".obj":
        if not path.is_file():
            raise InputError(f"no such file: {spec}")
        return ("obj", path.read_text())
    if path.is_file():
        text = path.read_text()
    elif spec.lstrip().startswith(("{", "[")):
        text = spec
    else:
        raise InputError(f"no such file: {spec}")
    try:
        return ("json", json.loads(text))
    except json.JSONDecodeError as exc:
        raise InputError(f"cannot parse JSON in {spec[:40]!r}: {exc}") from None


def _surface(spec: str | None, n_circ: int = 16):
    """Tube surface from a fixture or spatial-graph JSON; plain meshes only from OBJ."""
    from . import fixtures
    if spec is None:
        raise InputError("--surface is required")
    kind, data = _load(spec)
    if kind == "fixture":
        return fixtures.fixture(data).surface
    if kind == "obj":
        return SurfaceMesh.from_obj(data)
    if not isinstance(data, dict):
        raise InputError("surface JSON must be an object")
    graph = data.get("graph", data)
    try:
        g = SpatialGraph.from_json(graph)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"malformed spatial graph: {exc}") from None
    return make_tube_surface(g, radius=data.get("radius"), n_circ=int(data.get("n_circ", n_circ)))


def _curve(spec: str | None, surface_spec: str | None):
    """Curve from ``fixture:NAME`` or ``{"chart": i, "coords": [[s, theta], ...]}`` / ``{"torus": [p, q]}``."""
    from . import fixtures
    from .geom.surface_curves import curve_on_tube, edge_path, torus_curve
    if spec is None:
        raise InputError("--input is required")
    kind, data = _load(spec)
    if kind == "fixture":
        fx = fixtures.fixture(data)
        if fx.curve is None:
            raise InputError(f"fixture {data!r} has no curve")
        if surface_spec is not None:
            return fx.curve.rehosted(_surface(surface_spec))
        return fx.curve
    if not isinstance(data, dict):
        raise InputError("curve JSON must be an object")
    surface = _surface(surface_spec)
    if "path" in data:
        mesh = surface.mesh if isinstance(surface, TubeSurface) else surface
        return edge_path(mesh, data["path"])
    if not isinstance(surface, TubeSurface):
        raise InputError("chart curves need a tube surface, not a bare mesh")
    if "torus" in data:
        p, q = (int(x) for x in data["torus"])
        return torus_curve(surface, p, q, int(data.get("n", 240)), int(data.get("chart", 0)),
                           float(data.get("theta0", 0.1)))
    if "coords" not in data:
        raise InputError("curve JSON needs 'coords', 'torus' or 'path'")
    return curve_on_tube(surface, int(data.get("chart", 0)), data["coords"])


def _record(spec: str):
    from .splitting import KSplittingRecord
    kind, data = _load(spec)
    if kind != "json" or not isinstance(data, dict):
        raise InputError("a splitting record must be a JSON object")
    return KSplittingRecord.from_json(data)


KNOT_FIXTURES = ("unknot", "torus", "figure-eight", "figure_eight", "4_1")


def _knot(spec: str):
    """Knot for realize-slope: a fixture (geometric) or ``{"name", "tunnel_number"}`` (symbolic)."""
    from . import fixtures
    from .splitting import KnotInfo
    kind, data = _load(spec)
    if kind == "fixture":
        if data not in KNOT_FIXTURES:
            raise InputError(f"fixture {data!r} is not a knot fixture; use one of {KNOT_FIXTURES}")
        fx = fixtures.fixture(data)
        return fx.knot, fx.graph
    if kind != "json" or not isinstance(data, dict):
        raise InputError("knot spec must be a fixture or a JSON object")
    if "graph" in data:
        return KnotInfo.from_json(data.get("knot", "unknot")), SpatialGraph.from_json(data["graph"])
    return KnotInfo.from_json(data), None


def _mesh_of(surface):
    return surface.mesh if isinstance(surface, TubeSurface) else surface


def _write_obj(surface, out: str | None) -> str | None:
    if out is None:
        return None
    _mesh_of(surface).write_obj(out)
    return out


# -- commands ------------------------------------------------------------------
def cmd_slope(args) -> dict:
    from .linking import surface_slope
    from .geom.surface_curves import is_separating
    curve = _curve(args.input, args.surface)
    res = surface_slope(curve, args.epsilon, args.seed)
    out = res.to_json()
    out["separating"] = is_separating(curve)
    return out


def cmd_genus(args) -> dict:
    surface = _surface(args.surface or args.input)
    mesh = _mesh_of(surface)
    mesh.validate()
    return {"genus": genus(mesh), "euler_characteristic": euler_characteristic(mesh),
            "vertices": int(len(mesh.vertices)), "triangles": int(len(mesh.triangles)),
            "closed": True, "oriented": True, "embedded": True}


def cmd_twist(args) -> dict:
    from .linking import surface_slope
    from .geom.surface_curves import dehn_twist_curve
    curve = _curve(args.input, args.surface)
    before = surface_slope(curve, args.epsilon, args.seed).m
    twisted = dehn_twist_curve(curve, args.k)
    after = surface_slope(twisted, args.epsilon, args.seed).m
    out = {"k": args.k, "slope_before": before, "slope_after": after, "curve": twisted.to_json()}
    if args.out:
        Path(args.out).write_text(json.dumps(twisted.to_json()))
        out["curve_file"] = args.out
    return out


def cmd_stabilize(args) -> dict:
    from .linking import surface_slope
    from .geom.stabilize import k_stabilize_random
    curve = _curve(args.input, args.surface)
    rng = np.random.default_rng(args.seed)
    before = surface_slope(curve, args.epsilon, args.seed).m
    surface, knot, site = k_stabilize_random(curve.host, curve, rng)
    mesh = surface.mesh
    mesh.validate()
    after = surface_slope(knot, args.epsilon, args.seed).m
    return {"genus_before": curve.host.genus, "genus": genus(mesh), "slope_before": before,
            "slope": after, "euler_characteristic": euler_characteristic(mesh),
            "site": [site.chart_a, site.i_a, site.j_a, site.chart_b, site.i_b, site.j_b],
            "obj": _write_obj(surface, args.out)}


def cmd_connect_sum(args) -> dict:
    from .splitting import connect_sum
    if len(args.input or []) != 2:
        raise InputError("connect-sum takes two --input records")
    return connect_sum(_record(args.input[0]), _record(args.input[1])).to_json()


def cmd_realize_slope(args) -> dict:
    from .splitting import realize_slope
    if args.target_slope is None:
        raise InputError("--target-slope is required")
    knot, graph = _knot(args.input)
    rec, count = realize_slope(knot, args.target_slope, graph, epsilon=args.epsilon, seed=args.seed)
    out = {"record": rec.to_json(), "twist_count": count}
    if rec.geometric_ref is not None:
        out["curve"] = rec.geometric_ref.knot.to_json()
        out["obj"] = _write_obj(rec.geometric_ref.surface, args.out)
    return out


def cmd_decompose(args) -> dict:
    from .splitting import decompose_three
    collar, product, complement = decompose_three(_record(args.input))
    return {"collar": collar.to_json(), "product": product.to_json(),
            "complement": complement.to_json()}


def cmd_common_stab(args) -> dict:
    from .splitting import common_stabilization, replay
    if len(args.input or []) != 2:
        raise InputError("common-stab takes two --input records")
    ra, rb = _record(args.input[0]), _record(args.input[1])
    rec, ta, tb = common_stabilization(ra, rb, args.extra_stabs)
    replay_ok = replay(ra, ta).serialize() == replay(rb, tb).serialize() == rec.serialize()
    return {"record": rec.to_json(), "trace_a": ta.to_json(), "trace_b": tb.to_json(),
            "replay_identical": replay_ok}


def cmd_export_obj(args) -> dict:
    if not args.out:
        raise InputError("--out is required")
    surface = _surface(args.surface or args.input)
    mesh = _mesh_of(surface)
    mesh.write_obj(args.out)
    return {"obj": args.out, "genus": genus(mesh)}


def cmd_selftest(args) -> dict:
    from .selftest import run_selftest
    return run_selftest(args.seed)


HANDLERS = {
    "slope": cmd_slope, "genus": cmd_genus, "twist": cmd_twist, "stabilize": cmd_stabilize,
    "connect-sum": cmd_connect_sum, "realize-slope": cmd_realize_slope,
    "decompose": cmd_decompose, "common-stab": cmd_common_stab,
    "export-obj": cmd_export_obj, "selftest": cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kstab", description="Surface slopes and K-stabilizations.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        if name in ("connect-sum", "common-stab"):
            sp.add_argument("--input", action="append", help="record JSON (give twice)")
        else:
            sp.add_argument("--input")
        sp.add_argument("--surface")
        sp.add_argument("--epsilon", type=float, default=0.05)
        sp.add_argument("--k", type=int, default=1)
        sp.add_argument("--target-slope", type=int)
        sp.add_argument("--extra-stabs", type=int, default=0)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    try:
        result = HANDLERS[args.command](args)
    except KStabError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return exc.exit_code
    except (OSError, ValueError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1
    print(json.dumps(result, indent=2, sort_keys=True))
    if args.command == "selftest":
        return 0 if result["passed"] else 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

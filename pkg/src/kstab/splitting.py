"""Symbolic calculus of K-splitting records.

A record describes a Heegaard surface ``S`` of a closed 3-manifold together
with a knot ``K`` lying on it: manifold label, genus, surface slope, knot
label and whether ``K`` separates ``S``.  Moves produce new records; the
common-stabilization pipeline peels a collar of the knot, stabilizes a
second time, weakly reduces into four pieces and amalgamates them back.

Records may carry a geometric witness (a tube surface with the knot drawn on
it).  Moves that have a geometric counterpart apply it and re-check the
slope with both linking engines.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (AnnulusViolation, EngineDisagreement, GluingError, InputError,
                     KnotMismatch, ManifoldMismatch, ProtocolError, SlopeMismatch,
                     UnsupportedError)

S3 = "S3"

# pipeline stages, recorded on records as provenance
PLAIN = "plain"
COLLAR_PEELED = "collar_peeled"
WEAKLY_REDUCIBLE = "weakly_reducible"


@dataclass(frozen=True)
class KnotInfo:
    name: str
    tunnel_number: int | None = None

    def __post_init__(self):
        if not isinstance(self.name, str) or not self.name:
            raise InputError("knot name must be a nonempty string")
        if self.tunnel_number is not None and (not isinstance(self.tunnel_number, int)
                                               or self.tunnel_number < 0):
            raise InputError("tunnel number must be a non-negative integer")

    @property
    def h_genus_bounds(self) -> tuple[int, int] | None:
        """``t(K) <= h(K) <= t(K) + 1``."""
        if self.tunnel_number is None:
            return None
        return self.tunnel_number, self.tunnel_number + 1

    @property
    def is_unknot(self) -> bool:
        return self.name in ("unknot", "0_1")

    def to_json(self) -> dict:
        return {"name": self.name, "tunnel_number": self.tunnel_number}

    @classmethod
    def from_json(cls, data) -> "KnotInfo":
        if isinstance(data, str):
            data = {"name": data}
        t = data.get("tunnel_number")
        if t is None and data["name"] in ("unknot", "0_1"):
            t = 0
        return cls(data["name"], t)


UNKNOT = KnotInfo("unknot", 0)
FIGURE_EIGHT = KnotInfo("4_1", 1)


@dataclass(frozen=True, eq=False)
class GeometricRef:
    """A tube surface with the knot drawn on it as a chart curve."""

    surface: object
    knot: object
    epsilon: float = 0.05
    seed: int = 0


@dataclass(frozen=True)
class DiskWitness:
    side: str
    knot_intersections: int = 0
    boundary_intersections_with_partner: int = 0
    separating: bool = False

    def __post_init__(self):
        if self.side not in ("V", "W"):
            raise InputError("disk side must be 'V' or 'W'")
        if self.knot_intersections < 0 or self.boundary_intersections_with_partner < 0:
            raise InputError("intersection counts must be non-negative")

    def to_json(self) -> dict:
        return {"side": self.side, "knot_intersections": self.knot_intersections,
                "boundary_intersections_with_partner": self.boundary_intersections_with_partner,
                "separating": self.separating}

    @classmethod
    def from_json(cls, d) -> "DiskWitness":
        return cls(d["side"], int(d["knot_intersections"]),
                   int(d["boundary_intersections_with_partner"]), bool(d["separating"]))


@dataclass(frozen=True)
class WeakReductionWitness:
    delta_V: tuple
    delta_W: tuple

    def __post_init__(self):
        if not self.delta_V or not self.delta_W:
            raise InputError("weak reduction needs disks on both sides")
        for d in self.delta_V:
            if d.side != "V":
                raise InputError("delta_V holds a W-side disk")
        for d in self.delta_W:
            if d.side != "W":
                raise InputError("delta_W holds a V-side disk")
        for d in (*self.delta_V, *self.delta_W):
            if d.knot_intersections != 0:
                raise InputError("weak reduction disks must miss the knot")
            if d.boundary_intersections_with_partner != 0:
                raise InputError("weak reduction disks on opposite sides must be disjoint")

    @classmethod
    def from_pair(cls, d1: DiskWitness, d2: DiskWitness) -> "WeakReductionWitness":
        v, w = (d1, d2) if d1.side == "V" else (d2, d1)
        return cls((v,), (w,))

    def to_json(self) -> dict:
        return {"delta_V": [d.to_json() for d in self.delta_V],
                "delta_W": [d.to_json() for d in self.delta_W]}


@dataclass(frozen=True)
class KSplittingRecord:
    """Equality compares manifold, genus, slope, knot and separating flag."""

    genus: int
    slope: int
    knot: KnotInfo = UNKNOT
    manifold: str = S3
    separating: bool = False
    stage: str = field(default=PLAIN, compare=False)
    witnesses: tuple = field(default=(), compare=False)
    geometric_ref: GeometricRef | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not isinstance(self.genus, (int, np.integer)) or self.genus < 0:
            raise InputError("genus must be a non-negative integer")
        if not isinstance(self.slope, (int, np.integer)):
            raise InputError("slope must be an integer")
        object.__setattr__(self, "genus", int(self.genus))
        object.__setattr__(self, "slope", int(self.slope))
        if self.manifold == S3 and self.separating and self.slope != 0:
            raise InputError("a separating knot in S3 has surface slope 0")
        if self.genus == 0 and self.manifold == S3 and not self.separating:
            raise InputError("every curve on a 2-sphere separates")

    def to_json(self) -> dict:
        return {"manifold": self.manifold, "genus": self.genus, "slope": self.slope,
                "knot": self.knot.to_json(), "separating": self.separating,
                "stage": self.stage, "witnesses": [w.to_json() for w in self.witnesses]}

    @classmethod
    def from_json(cls, d) -> "KSplittingRecord":
        try:
            return cls(genus=int(d["genus"]), slope=int(d["slope"]),
                       knot=KnotInfo.from_json(d.get("knot", "unknot")),
                       manifold=d.get("manifold", S3), separating=bool(d.get("separating", False)),
                       stage=d.get("stage", PLAIN),
                       witnesses=tuple(DiskWitness.from_json(w) for w in d.get("witnesses", ())))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InputError):
                raise
            raise InputError(f"malformed record: {exc}") from None

    def serialize(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


# -- geometry hooks ------------------------------------------------------------
def _geometric_slope(ref: GeometricRef) -> int:
    from .linking import surface_slope
    return surface_slope(ref.knot, ref.epsilon, ref.seed).m


def attach_geometry(record: KSplittingRecord, surface, knot, epsilon: float = 0.05,
                    seed: int = 0) -> KSplittingRecord:
    """Attach a geometric witness after checking genus, slope and separation against it."""
    from .geom.mesh import genus
    from .geom.surface_curves import is_separating
    ref = GeometricRef(surface, knot, epsilon, seed)
    g = genus(surface.mesh)
    m = _geometric_slope(ref)
    sep = is_separating(knot)
    if (g, m, sep) != (record.genus, record.slope, record.separating):
        raise EngineDisagreement(
            f"geometry gives genus {g}, slope {m}, separating {sep}; record says "
            f"genus {record.genus}, slope {record.slope}, separating {record.separating}")
    return replace(record, geometric_ref=ref)


def record_from_geometry(surface, knot, knot_info: KnotInfo = UNKNOT, epsilon: float = 0.05,
                         seed: int = 0) -> KSplittingRecord:
    from .geom.mesh import genus
    from .geom.surface_curves import is_separating
    ref = GeometricRef(surface, knot, epsilon, seed)
    return KSplittingRecord(genus(surface.mesh), _geometric_slope(ref), knot_info,
                            separating=is_separating(knot), geometric_ref=ref)


# -- moves on records ----------------------------------------------------------
def k_stabilize(r: KSplittingRecord, site=None, rng=None) -> KSplittingRecord:
    """Add one unknotted handle away from the knot: genus + 1, slope unchanged."""
    out = replace(r, genus=r.genus + 1, stage=PLAIN, witnesses=(), geometric_ref=None)
    ref = r.geometric_ref
    if ref is None:
        return out
    from .geom.stabilize import k_stabilize_geometric, k_stabilize_random
    if site is None:
        rng = rng if rng is not None else np.random.default_rng(ref.seed)
        surface, knot, _ = k_stabilize_random(ref.surface, ref.knot, rng)
    else:
        surface, knot = k_stabilize_geometric(ref.surface, ref.knot, site)
    new_ref = GeometricRef(surface, knot, ref.epsilon, ref.seed)
    m = _geometric_slope(new_ref)
    if m != out.slope:
        raise EngineDisagreement(f"slope changed from {out.slope} to {m} under stabilization")
    return replace(out, geometric_ref=new_ref)


def is_k_stabilized(r: KSplittingRecord, d1: DiskWitness, d2: DiskWitness) -> bool:
    """Disk pair test: ``D1`` misses ``K`` and the boundaries meet exactly once."""
    if d1.side == d2.side:
        raise InputError("the two disks must lie on opposite sides of the surface")
    return (d1.knot_intersections == 0
            and d1.boundary_intersections_with_partner == 1
            and d2.boundary_intersections_with_partner == 1)


TWIST_SIGN = 1


def dehn_twist(r: KSplittingRecord, k: int) -> KSplittingRecord:
    """Twist ``k`` times along a meridian disk meeting ``K`` once; slope moves by ``k``."""
    k = int(k)
    if k == 0:
        return r
    if r.separating:
        raise InputError("a separating knot has no meridian disk meeting it once")
    out = replace(r, slope=r.slope + TWIST_SIGN * k, geometric_ref=None)
    ref = r.geometric_ref
    if ref is None:
        return out
    from .geom.surface_curves import dehn_twist_curve
    if abs(ref.knot.longitude) != 1:
        raise InputError(f"the knot crosses each chart meridian {abs(ref.knot.longitude)} times; "
                         "the twist needs a meridian disk meeting it once")
    knot = dehn_twist_curve(ref.knot, k)
    new_ref = GeometricRef(ref.surface, knot, ref.epsilon, ref.seed)
    m = _geometric_slope(new_ref)
    if m != out.slope:
        raise EngineDisagreement(f"twisted slope is {m}, expected {out.slope}")
    return replace(out, geometric_ref=new_ref)


def connect_sum(r1: KSplittingRecord, r2: KSplittingRecord) -> KSplittingRecord:
    """Connected sum of splitting pairs: genera add, slopes add."""
    if r1.manifold != S3 or r2.manifold != S3:
        raise UnsupportedError("connected sums are supported in S3 only")
    if r2.knot.is_unknot:
        knot = r1.knot
    elif r1.knot.is_unknot:
        knot = r2.knot
    else:
        knot = KnotInfo(f"{r1.knot.name}#{r2.knot.name}")
    return KSplittingRecord(r1.genus + r2.genus, r1.slope + r2.slope, knot, S3,
                            r1.separating and r2.separating)


_BASES: dict = {}


def realize_slope(knot: KnotInfo, target_m: int, graph=None, *, epsilon: float = 0.05,
                  n_circ: int = 16, seed: int = 0) -> tuple[KSplittingRecord, int]:
    """A genus ``t(K)+1`` record with slope ``target_m``, by twisting a base splitting.

    Symbolically the base slope is 0.  With a spatial graph (the knot as the
    first circle plus tunnel arcs) the base is the tube surface around it
    with the knot drawn as a constant-angle longitude, and the twists are
    applied to that curve.
    """
    if knot.tunnel_number is None:
        raise InputError("realize_slope needs the tunnel number of the knot")
    target_m = int(target_m)
    genus = knot.tunnel_number + 1
    if graph is None:
        count = abs(target_m)
        return KSplittingRecord(genus, target_m, knot), count
    from .geom.surface_curves import longitude_curve
    from .geom.tubes import make_tube_surface
    if graph.expected_genus() != genus:
        raise InputError(f"graph has genus {graph.expected_genus()}, tunnel number says {genus}")
    key = (json.dumps(graph.to_json(), sort_keys=True), knot, epsilon, n_circ, seed)
    base = _BASES.get(key)
    if base is None:
        surface = make_tube_surface(graph, n_circ=n_circ)
        base_curve = longitude_curve(surface, 0)
        base = _BASES[key] = record_from_geometry(surface, base_curve, knot, epsilon, seed)
    count = abs(target_m - base.slope)
    return dehn_twist(base, target_m - base.slope), count


# -- the four-piece decomposition -----------------------------------------------
@dataclass(frozen=True)
class BoundaryLabel:
    name: str
    genus: int

    def to_json(self) -> dict:
        return {"name": self.name, "genus": self.genus}


KINDS = ("SolidTorus", "ProductT2xI", "CompressionBodyC3", "HandlebodyGenusG", "Amalgamated")


@dataclass(frozen=True)
class ComponentSplitting:
    """Induced splitting of one piece; ``minus_boundaries`` are its negative boundary surfaces.

    ``knot_annulus`` certifies that the knot copies on the negative boundary
    cobound an annulus with the knot on the splitting surface; it is checked
    when gluing rather than at construction.
    """

    id: str
    kind: str
    plus_genus: int
    minus_boundaries: tuple = ()
    carries_knot: bool = False
    knot_annulus: bool = False
    slope: int | None = None
    knot_boundaries: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown component kind {self.kind!r}")
        if self.plus_genus < 0:
            raise InputError("plus genus must be non-negative")
        names = [b.name for b in self.minus_boundaries]
        if len(set(names)) != len(names):
            raise InputError("boundary labels must be distinct")
        for name in self.knot_boundaries:
            if name not in names:
                raise InputError(f"knot copy on unknown boundary {name!r}")
        if self.carries_knot != (self.slope is not None):
            raise InputError("a slope is recorded exactly when the component carries the knot")
        minus_genera = sorted(b.genus for b in self.minus_boundaries)
        if self.kind == "SolidTorus" and (self.plus_genus != 1 or minus_genera != [1]):
            raise InputError("solid torus splitting: genus-1 surface, one torus boundary")
        if self.kind == "ProductT2xI" and (self.plus_genus != 2 or minus_genera != [1, 1]):
            raise InputError("T2 x I splitting: genus-2 surface, two torus boundaries")
        if self.kind == "CompressionBodyC3" and (len(minus_genera) != 2 or 1 not in minus_genera):
            raise InputError("C3 splitting: a torus and a genus-g boundary")
        if self.kind == "HandlebodyGenusG" and (len(minus_genera) != 1
                                                or minus_genera[0] != self.plus_genus):
            raise InputError("handlebody splitting: boundary genus equals surface genus")

    def to_json(self) -> dict:
        return {"id": self.id, "kind": self.kind, "plus_genus": self.plus_genus,
                "minus_boundaries": [b.to_json() for b in self.minus_boundaries],
                "carries_knot": self.carries_knot, "knot_annulus": self.knot_annulus,
                "slope": self.slope, "knot_boundaries": list(self.knot_boundaries)}

    @classmethod
    def from_json(cls, d) -> "ComponentSplitting":
        return cls(d["id"], d["kind"], int(d["plus_genus"]),
                   tuple(BoundaryLabel(b["name"], int(b["genus"])) for b in d["minus_boundaries"]),
                   bool(d["carries_knot"]), bool(d["knot_annulus"]),
                   None if d["slope"] is None else int(d["slope"]), tuple(d["knot_boundaries"]))


@dataclass(frozen=True)
class Gluing:
    label: BoundaryLabel
    a: str
    b: str
    knot: bool = False

    def to_json(self) -> dict:
        return {"label": self.label.to_json(), "a": self.a, "b": self.b, "knot": self.knot}


@dataclass(frozen=True)
class GeneralizedSplitting:
    components: tuple
    gluings: tuple
    manifold: str = S3
    knot: KnotInfo = UNKNOT
    separating: bool = False

    def __post_init__(self):
        ids = [c.id for c in self.components]
        if len(set(ids)) != len(ids):
            raise InputError("component ids must be distinct")
        owners: dict[str, list] = {}
        for c in self.components:
            for b in c.minus_boundaries:
                owners.setdefault(b.name, []).append((c.id, b.genus))
        seen = set()
        for g in self.gluings:
            if g.label.name in seen:
                raise GluingError(f"boundary {g.label.name!r} is glued twice")
            seen.add(g.label.name)
            side = owners.get(g.label.name, [])
            if sorted(x[0] for x in side) != sorted((g.a, g.b)):
                raise GluingError(f"gluing {g.label.name!r} does not join {g.a} and {g.b}")
            if any(x[1] != g.label.genus for x in side):
                raise GluingError(f"gluing {g.label.name!r} joins surfaces of different genus")
        exposed = set(owners) - seen
        if exposed and self.manifold is not None:
            raise GluingError(f"boundaries left unglued in a closed manifold: {sorted(exposed)}")
        if len(self.components) > 1:
            index = {cid: k for k, cid in enumerate(ids)}
            parent = list(range(len(ids)))

            def find(x):
                while parent[x] != x:
                    parent[x] = parent[parent[x]]
                    x = parent[x]
                return x

            for g in self.gluings:
                parent[find(index[g.a])] = find(index[g.b])
            if len({find(k) for k in range(len(ids))}) != 1:
                raise GluingError("gluing graph is not connected")

    @property
    def knot_gluings(self) -> tuple:
        return tuple(g for g in self.gluings if g.knot)

    def component(self, cid: str) -> ComponentSplitting:
        for c in self.components:
            if c.id == cid:
                return c
        raise InputError(f"no component {cid!r}")

    def to_json(self) -> dict:
        return {"components": [c.to_json() for c in self.components],
                "gluings": [g.to_json() for g in self.gluings],
                "manifold": self.manifold, "knot": self.knot.to_json(),
                "separating": self.separating}

    @classmethod
    def from_json(cls, d) -> "GeneralizedSplitting":
        comps = tuple(ComponentSplitting.from_json(c) for c in d["components"])
        glue = tuple(Gluing(BoundaryLabel(g["label"]["name"], int(g["label"]["genus"])),
                            g["a"], g["b"], bool(g["knot"])) for g in d["gluings"])
        return cls(comps, glue, d.get("manifold", S3), KnotInfo.from_json(d["knot"]),
                   bool(d.get("separating", False)))


def peel_collar(r: KSplittingRecord) -> tuple[KSplittingRecord, DiskWitness]:
    """Stabilize once so that a disk ``D1`` missing ``K`` cuts off a collar of ``K``.

    The new tube runs over ``K`` (its core arc is parallel to an arc of the
    surface that crosses ``K`` once), so ``K`` no longer separates.
    """
    d1 = DiskWitness("V", 0, 0, True)
    out = replace(r, genus=r.genus + 1, separating=False, stage=COLLAR_PEELED,
                  witnesses=(d1,), geometric_ref=None)
    return out, d1


def second_stabilize(r_tilde: KSplittingRecord, d1: DiskWitness) -> tuple[KSplittingRecord, DiskWitness]:
    """Second stabilization giving a disk ``D2`` on the other side, disjoint from ``D1`` and ``K``."""
    if r_tilde.stage != COLLAR_PEELED or r_tilde.witnesses != (d1,):
        raise ProtocolError("second_stabilize expects the output of peel_collar with its disk")
    d2 = DiskWitness("W", 0, 0, True)
    out = replace(r_tilde, genus=r_tilde.genus + 1, stage=WEAKLY_REDUCIBLE, witnesses=(d1, d2))
    return out, d2


def census(g: int, m: int) -> tuple[tuple, tuple]:
    """The four induced splittings and three gluings for original genus ``g``, slope ``m``."""
    T1 = BoundaryLabel("T1", 1)
    T2 = BoundaryLabel("T2", 1)
    Sg = BoundaryLabel("Sigma", g)
    comps = (
        ComponentSplitting("C1", "SolidTorus", 1, (T1,), True, True, m, ("T1",)),
        ComponentSplitting("C2", "ProductT2xI", 2, (T1, T2), True, True, m, ("T1",)),
        ComponentSplitting("C3", "CompressionBodyC3", g + 1, (T2, Sg)),
        ComponentSplitting("C4", "HandlebodyGenusG", g, (Sg,)),
    )
    glue = (Gluing(T1, "C1", "C2", True), Gluing(T2, "C2", "C3", False),
            Gluing(Sg, "C3", "C4", False))
    return comps, glue


def weak_reduce(r_hat: KSplittingRecord, w: WeakReductionWitness) -> GeneralizedSplitting:
    """Compress along ``D1`` and ``D2``: a solid torus, ``T2 x I``, ``C3`` and a handlebody."""
    if r_hat.stage != WEAKLY_REDUCIBLE:
        raise ProtocolError("weak_reduce expects a record produced by second_stabilize")
    if WeakReductionWitness.from_pair(*r_hat.witnesses) != w:
        raise ProtocolError("witness does not match the record's weak reducing disks")
    g = r_hat.genus - 2
    comps, glue = census(g, r_hat.slope)
    return GeneralizedSplitting(comps, glue, r_hat.manifold, r_hat.knot, r_hat.separating)


def amalgamate_pair(a: ComponentSplitting, b: ComponentSplitting,
                    along: BoundaryLabel) -> ComponentSplitting:
    """Glue two splittings along a shared negative boundary: genus ``p_a + p_b - h``."""
    la = {x.name: x for x in a.minus_boundaries}
    lb = {x.name: x for x in b.minus_boundaries}
    if along.name not in la or along.name not in lb:
        raise GluingError(f"{along.name!r} is not a boundary of both components")
    if not la[along.name].genus == lb[along.name].genus == along.genus:
        raise GluingError(f"genus mismatch along {along.name!r}")
    ka = along.name in a.knot_boundaries
    kb = along.name in b.knot_boundaries
    if ka != kb:
        raise GluingError(f"only one side has a knot copy on {along.name!r}")
    if ka and not (a.knot_annulus and b.knot_annulus):
        raise AnnulusViolation(
            f"knot copies on {along.name!r} lack the annulus needed for a unique gluing")
    if a.carries_knot and b.carries_knot and a.slope != b.slope:
        raise GluingError(f"knot slopes disagree across {along.name!r}: {a.slope} vs {b.slope}")
    carries = a.carries_knot or b.carries_knot
    slope = a.slope if a.carries_knot else b.slope
    annulus = all(c.knot_annulus for c in (a, b) if c.carries_knot) if carries else False
    minus = tuple(x for x in (*a.minus_boundaries, *b.minus_boundaries) if x.name != along.name)
    kbs = tuple(n for n in (*a.knot_boundaries, *b.knot_boundaries) if n != along.name)
    ids = sorted((a.id, b.id))
    return ComponentSplitting(f"({ids[0]}+{ids[1]})", "Amalgamated",
                              a.plus_genus + b.plus_genus - along.genus, minus,
                              carries, annulus, slope, kbs)


def amalgamate_all(gs: GeneralizedSplitting, order=None) -> KSplittingRecord:
    """Perform every gluing, in the given order of boundary names, and read off the record."""
    by_name = {g.label.name: g for g in gs.gluings}
    if order is None:
        order = [g.label.name for g in gs.gluings]
    order = [o.label.name if isinstance(o, Gluing) else (o.name if isinstance(o, BoundaryLabel) else o)
             for o in order]
    if sorted(order) != sorted(by_name):
        raise GluingError("the order must use every gluing exactly once")
    pieces = {c.id: c for c in gs.components}
    owner = {c.id: c.id for c in gs.components}

    def root(cid):
        while owner[cid] != cid:
            cid = owner[cid]
        return cid

    for name in order:
        g = by_name[name]
        ra, rb = root(g.a), root(g.b)
        if ra == rb:
            raise GluingError(f"gluing {name!r} closes a loop in the gluing graph")
        merged = amalgamate_pair(pieces.pop(ra), pieces.pop(rb), g.label)
        owner[merged.id] = merged.id
        owner[ra] = merged.id
        owner[rb] = merged.id
        pieces[merged.id] = merged
    if len(pieces) != 1:
        raise GluingError("gluings leave more than one piece")
    (final,) = pieces.values()
    if final.minus_boundaries:
        raise GluingError(f"incomplete gluing: boundaries {[b.name for b in final.minus_boundaries]} remain")
    slope = final.slope if final.carries_knot else 0
    return KSplittingRecord(final.plus_genus, slope, gs.knot, gs.manifold, gs.separating)


def all_orders(gs: GeneralizedSplitting) -> list[tuple]:
    return list(itertools.permutations([g.label.name for g in gs.gluings]))


def decompose_three(r: KSplittingRecord):
    """Collar of ``K``, ``T2 x I`` and the knot-complement splitting (``C3`` + ``C4``)."""
    r1, d1 = peel_collar(r)
    r2, d2 = second_stabilize(r1, d1)
    gs = weak_reduce(r2, WeakReductionWitness.from_pair(d1, d2))
    c1, c2, c3, c4 = gs.components
    sigma = gs.gluings[2].label
    complement = amalgamate_pair(c3, c4, sigma)
    return c1, c2, complement


# -- traces and the common stabilization ---------------------------------------
@dataclass(frozen=True)
class Move:
    kind: str
    params: tuple = ()

    def to_json(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params)}

    @classmethod
    def from_json(cls, d) -> "Move":
        return cls(d["kind"], tuple(sorted((k, _freeze(v)) for k, v in d.get("params", {}).items())))


def _freeze(v):
    return tuple(v) if isinstance(v, list) else v


MOVE_KINDS = ("KStabilize", "PeelCollar", "SecondStabilize", "WeakReduce", "RSStabilize", "Amalgamate")


@dataclass(frozen=True)
class StabilizationTrace:
    moves: tuple

    def __post_init__(self):
        for m in self.moves:
            if m.kind not in MOVE_KINDS:
                raise InputError(f"unknown move {m.kind!r}")

    def __len__(self) -> int:
        return len(self.moves)

    def to_json(self) -> dict:
        return {"moves": [m.to_json() for m in self.moves]}

    @classmethod
    def from_json(cls, d) -> "StabilizationTrace":
        return cls(tuple(Move.from_json(m) for m in d["moves"]))


def rs_stabilize(gs: GeneralizedSplitting, component: str, count: int) -> GeneralizedSplitting:
    """Stabilize the splitting of one knot-free component ``count`` times."""
    c = gs.component(component)
    if c.carries_knot:
        raise InputError("stabilization of the complement must not touch the knot pieces")
    if count < 0:
        raise InputError("stabilization count must be non-negative")
    new = replace(c, plus_genus=c.plus_genus + count)
    comps = tuple(new if x.id == component else x for x in gs.components)
    return replace(gs, components=comps)


def replay(record: KSplittingRecord, trace: StabilizationTrace):
    """Re-run a trace from ``record``; returns the final record (or splitting)."""
    state: object = record
    for move in trace.moves:
        p = dict(move.params)
        if move.kind == "KStabilize":
            state = k_stabilize(_need(state, KSplittingRecord, move))
        elif move.kind == "PeelCollar":
            state, _ = peel_collar(_need(state, KSplittingRecord, move))
        elif move.kind == "SecondStabilize":
            r = _need(state, KSplittingRecord, move)
            if len(r.witnesses) != 1:
                raise ProtocolError("SecondStabilize needs a peeled collar")
            state, _ = second_stabilize(r, r.witnesses[0])
        elif move.kind == "WeakReduce":
            r = _need(state, KSplittingRecord, move)
            if len(r.witnesses) != 2:
                raise ProtocolError("WeakReduce needs the two weak reducing disks")
            state = weak_reduce(r, WeakReductionWitness.from_pair(*r.witnesses))
        elif move.kind == "RSStabilize":
            state = rs_stabilize(_need(state, GeneralizedSplitting, move),
                                 p.get("component", "C3"), int(p["count"]))
        elif move.kind == "Amalgamate":
            state = amalgamate_all(_need(state, GeneralizedSplitting, move), list(p["order"]))
    return state


def _need(state, cls, move):
    if not isinstance(state, cls):
        raise ProtocolError(f"move {move.kind} cannot follow the previous step")
    return state


AMALGAMATION_ORDER = ("T1", "T2", "Sigma")


def _trace_for(r: KSplittingRecord, target_complement: int) -> StabilizationTrace:
    count = target_complement - (r.genus + 1)
    moves = [Move("PeelCollar"), Move("SecondStabilize"), Move("WeakReduce")]
    if count > 0:
        moves.append(Move("RSStabilize", (("component", "C3"), ("count", count))))
    moves.append(Move("Amalgamate", (("order", AMALGAMATION_ORDER),)))
    return StabilizationTrace(tuple(moves))


def common_stabilization(rA: KSplittingRecord, rB: KSplittingRecord, extra_stabs: int = 0):
    """A record reached from both inputs by K-stabilizations.

    Each input is doubly stabilized and split into collar, ``T2 x I`` and
    knot complement; the complement splittings are stabilized to a common
    genus (``extra_stabs`` beyond the minimum) and everything is glued back.
    """
    if int(extra_stabs) != extra_stabs or extra_stabs < 0:
        raise InputError("extra_stabs must be a non-negative integer")
    if rA.manifold != rB.manifold:
        raise ManifoldMismatch(f"manifolds differ: {rA.manifold} vs {rB.manifold}")
    if rA.knot != rB.knot:
        raise KnotMismatch(f"knots differ: {rA.knot.name} vs {rB.knot.name}")
    if rA.slope != rB.slope:
        raise SlopeMismatch(rA.slope, rB.slope)
    target = max(rA.genus, rB.genus) + 1 + int(extra_stabs)
    ta, tb = _trace_for(rA, target), _trace_for(rB, target)
    outA, outB = replay(rA, ta), replay(rB, tb)
    if outA.serialize() != outB.serialize():
        raise ProtocolError("the two pipelines did not meet")
    return outA, ta, tb

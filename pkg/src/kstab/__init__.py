"""Surface slopes of knots on Heegaard surfaces, and the K-stabilization calculus."""
from .errors import (AnnulusViolation, DegenerateProjection, EngineDisagreement, EpsilonError,
                     GeometryError, GluingError, InputError, KnotMismatch, KStabError,
                     ManifoldMismatch, MeshError, NumericalError, PlacementError, PrecisionError,
                     ProtocolError, RefinementError, SlopeMismatch, TubeOverlapError,
                     UnsupportedError)
from .geom.curves import PolyCurve3, SpatialGraph, make_circle, make_torus_knot_curve
from .geom.mesh import SurfaceMesh, euler_characteristic, genus
from .geom.charts import TubeChart
from .geom.tubes import HandleSite, TubeSurface, attach_handle, make_tube_surface
from .geom.surface_curves import (CurveOnSurface, PushoffPair, curve_on_tube, cut_and_count,
                                  dehn_twist_curve, edge_path, is_separating, longitude_curve,
                                  meridian_curve, surface_pushoffs, torus_curve)
from .geom.stabilize import k_stabilize_geometric, k_stabilize_random
from .linking import (CanonicalFraming, SlopeResult, canonical_framing, gauss_raw,
                      linking_number, linking_number_crossings, linking_number_gauss,
                      slope_in_canonical_basis, surface_slope)
from .splitting import (BoundaryLabel, ComponentSplitting, DiskWitness, GeneralizedSplitting,
                        KnotInfo, KSplittingRecord, Move, StabilizationTrace,
                        WeakReductionWitness, amalgamate_all, amalgamate_pair,
                        common_stabilization, connect_sum, decompose_three, dehn_twist,
                        is_k_stabilized, k_stabilize, peel_collar, realize_slope, replay,
                        second_stabilize, weak_reduce)

__version__ = "0.1.0"

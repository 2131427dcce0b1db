TOL_GEOM = 1e-9
"""Coincidence/intersection tolerance for every geometric predicate (desk units)."""

TOL_PROJ = 1e-7
"""Projection degeneracy tolerance of the crossing engine (dimensionless)."""

GAUSS_WINDOW = 0.1
"""Maximum distance of a raw Gauss sum from the nearest integer."""

PROJECTION_ATTEMPTS = 32

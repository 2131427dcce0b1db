"""Exception hierarchy.

The CLI maps these to exit codes: :class:`InputError` -> 1,
:class:`NumericalError` -> 2, :class:`SlopeMismatch` -> 3.
"""


class KStabError(Exception):
    exit_code = 2


class InputError(KStabError, ValueError):
    """Malformed input or violated precondition."""

    exit_code = 1


class ProtocolError(InputError):
    """A pipeline step was fed something the previous step did not produce."""


class GluingError(InputError):
    """Boundary labels cannot be amalgamated."""


class AnnulusViolation(GluingError):
    """Knot copies on a gluing surface lack the annulus certificate."""


class KnotMismatch(InputError):
    pass


class ManifoldMismatch(InputError):
    pass


class UnsupportedError(InputError):
    pass


class SlopeMismatch(KStabError):
    exit_code = 3

    def __init__(self, slope_a: int, slope_b: int):
        super().__init__(f"surface slopes differ ({slope_a} != {slope_b}); "
                         "no common K-stabilization exists")
        self.slope_a = slope_a
        self.slope_b = slope_b


class NumericalError(KStabError):
    exit_code = 2


class GeometryError(NumericalError):
    pass


class RefinementError(GeometryError):
    pass


class TubeOverlapError(GeometryError):
    pass


class PlacementError(GeometryError):
    pass


class EpsilonError(GeometryError):
    def __init__(self, message: str, suggested: float):
        super().__init__(f"{message}; try epsilon <= {suggested:.3g}")
        self.suggested = suggested


class PrecisionError(NumericalError):
    pass


class DegenerateProjection(NumericalError):
    pass


class EngineDisagreement(NumericalError):
    pass


class MeshError(GeometryError):
    pass

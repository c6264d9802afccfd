class JSLabError(Exception):
    """Base class for all errors raised by jslab."""


class OutsideDiscError(JSLabError, ValueError):
    """A base point lies outside (or numerically on) the model disc."""


class CoincidentPointsError(JSLabError, ValueError):
    pass


class DomainError(JSLabError, ValueError):
    """Invalid domain description.

    ``kind`` is one of ``"non-convex-domain"``, ``"adjacent-same-label"``,
    ``"non-jordan-boundary"`` or ``"bad-data"``; ``where`` names the vertex or
    arc at fault.
    """

    def __init__(self, kind, message, where=None):
        super().__init__(f"{kind}: {message}")
        self.kind = kind
        self.where = where


class PolygonNotAdmissibleError(JSLabError, ValueError):
    pass


class MeshingError(JSLabError, RuntimeError):
    def __init__(self, message, region=None):
        super().__init__(message)
        self.region = region


class DegenerateTriangleError(JSLabError, ValueError):
    pass


class NoConvergenceError(JSLabError, RuntimeError):
    """Raised when an iterative procedure stops short of its tolerance.

    The best iterate found so far is attached as ``result``.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class NotSolvableError(JSLabError, ValueError):
    def __init__(self, message, verdict=None):
        super().__init__(message)
        self.verdict = verdict


class UnsupportedAxisError(JSLabError, ValueError):
    pass


class NoSeamError(JSLabError, ValueError):
    pass


class InsufficientStencilError(JSLabError, ValueError):
    pass


class BallExceedsMeshError(JSLabError, ValueError):
    pass


class ProblemFileError(JSLabError, ValueError):
    """Malformed problem or analysis file; ``location`` names the field."""

    def __init__(self, message, location=None):
        loc = f" (at {location})" if location else ""
        super().__init__(f"{message}{loc}")
        self.location = location


class SeamPointError(JSLabError, ValueError):
    """A scan point does not lie in the interior of the seam."""

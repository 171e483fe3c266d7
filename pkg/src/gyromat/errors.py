"""Exception hierarchy shared by every gyromat module.

All domain errors derive from :class:`GyroError` so callers (notably the CLI)
can map them to a single exit code while still reporting the concrete name.
"""


class GyroError(Exception):
    """Base class for domain and numerical errors."""


class NonFinite(GyroError):
    pass


class NotSpd(GyroError):
    pass


class NotSymmetric(GyroError):
    pass


class DimMismatch(GyroError):
    pass


class NotLowerTriPos(GyroError):
    pass


class NotOrthonormal(GyroError):
    pass


class NotProjector(GyroError):
    pass


class CutLocus(GyroError):
    """Raised when a Grassmann logarithm at the base point is undefined."""


class DegenerateAngle(GyroError):
    pass


class DegeneratePlane(GyroError):
    pass


class NonConvergence(GyroError):
    pass


class ConfigError(GyroError):
    pass


class EmptyQuery(GyroError):
    pass


class GeneratorStall(GyroError):
    pass


class ParseError(GyroError):
    pass


class KindViolation(GyroError):
    pass

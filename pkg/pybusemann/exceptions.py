class BusemannException(Exception):
    pass


class InputError(BusemannException, ValueError):
    pass


class DegenerateSegmentError(InputError):
    pass


class DegenerateVertexError(InputError):
    pass


class DomainError(BusemannException, ValueError):
    pass


class RangeError(BusemannException, ValueError):
    pass


class EmptyDomainError(BusemannException):
    pass


class CurvatureViolation(BusemannException):
    """
    A monotone limit moved against the direction the declared
    curvature parameters dictate.

    The offending estimate (grid, values) travels in ``estimate`` and the
    largest move against the direction in ``defect``.
    """

    def __init__(self, message, estimate=None, defect=0.0):
        super().__init__(message)
        self.estimate = estimate
        self.defect = defect


class BusemannConcavityViolation(CurvatureViolation):
    pass


class ConfigError(BusemannException):
    pass

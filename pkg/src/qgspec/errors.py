"""Exception hierarchy."""


class GraphFileError(ValueError):
    """Base class for edge-list parse failures."""

    def __init__(self, message, line_no=None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class MalformedLineError(GraphFileError):
    pass


class ParallelEdgeError(GraphFileError):
    pass


class LoopEdgeError(GraphFileError):
    pass


class NonPositiveLengthError(GraphFileError):
    pass


class NotEulerianError(ValueError):
    """Raised when an Eulerian-cycle routine receives a graph with an odd-degree vertex."""


class SizeGuardError(ValueError):
    """Raised when an exponential routine is asked for an input beyond its cap."""


class WeylCheckError(RuntimeError):
    """Raised when a computed spectrum violates the Weyl-law bound after refinement."""

    def __init__(self, message, residual=None, bound=None):
        super().__init__(message)
        self.residual = residual
        self.bound = bound

"""Exception types raised across the package."""


class NetExtremesError(Exception):
    """Base class for all package errors."""


class DataError(NetExtremesError):
    """Input data cannot support the requested computation."""


# graph core
class SelfLoop(DataError):
    pass


class UnknownNode(DataError):
    pass


class ParseError(DataError):
    def __init__(self, path, lineno, line):
        self.path = path
        self.lineno = lineno
        self.line = line
        super().__init__(f"{path}:{lineno}: cannot parse {line!r}")


# generators
class DegenerateSpec(DataError):
    pass


class StubMatchFailure(DataError):
    pass


# attachment
class DegenerateGraph(DataError):
    pass


# communities
class EmptyGraph(DataError):
    pass


class InsufficientExceedances(DataError):
    pass


# tail / extremal estimation
class TiesAtCutoff(DataError):
    pass


class TooFewExceedances(DataError):
    pass


class ZeroDenominator(DataError):
    pass


class AllGapsZero(DataError):
    pass


class NoExceedances(DataError):
    pass


class SingleExceedance(DataError):
    pass


class SingleGapSetEmpty(DataError):
    """Every exceedance-free path was a single edge, so no gaps remain."""


class LengthMismatch(DataError):
    pass


# theory
class NoLinkedCommunity(DataError):
    pass


class InvalidOrdering(DataError):
    pass


class NoConvergenceWarning(RuntimeWarning):
    """An iterative solver stopped at ``max_iter`` before reaching ``tol``."""

"""Exception hierarchy shared by all dimerlab modules."""

from __future__ import annotations


class DimerlabError(Exception):
    """Base class for every error raised by this package."""


class GraphError(DimerlabError, ValueError):
    """A candidate graph violates the regular bipartite contract."""


class NotRegular(GraphError):
    pass


class NotSimple(GraphError):
    pass


class ClassSizeMismatch(GraphError):
    pass


class NotBipartite(GraphError):
    pass


class MalformedGraph6(GraphError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class TooLarge(DimerlabError, ValueError):
    """Input exceeds the documented limit of an exact engine."""


class OutOfRange(DimerlabError, ValueError):
    pass


class IndexOutOfRange(DimerlabError, IndexError):
    pass


class Infeasible(DimerlabError):
    """Requested enumeration or lattice computation is beyond supported size."""


class Unstable(DimerlabError):
    """Requested series order exceeds the prefix on which two torus sizes agree."""

    def __init__(self, message: str, achievable: int):
        self.achievable = achievable
        super().__init__(message)


class InconsistentLeadingTerm(DimerlabError, ValueError):
    pass


class SingularSystem(DimerlabError, ValueError):
    pass


class InsufficientData(DimerlabError, ValueError):
    pass

"""Exception types shared across the package."""


class IocGraphError(Exception):
    """Base class for all iocgraph errors."""


class EmptyDocument(IocGraphError):
    """Raised when an ingest payload contains no data at all."""


class MalformedRecord(IocGraphError):
    """A structured record (crawler line, AV scan) violates its schema.

    ``field`` names the offending key when known.
    """

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class ArgumentError(IocGraphError, ValueError):
    """An argument violates an operation's contract."""


class UnknownMapper(IocGraphError):
    """No implementation is registered for the requested mapper slot."""


class NotFound(IocGraphError):
    """A referenced node does not exist in the store."""


class DegenerateInput(IocGraphError):
    """Correlation input that has no defined Pearson coefficient.

    Carries ``n``, the number of datapoints that survived filtering, so
    callers can report how close the input came to being usable.
    """

    def __init__(self, message: str, n: int = 0):
        super().__init__(message)
        self.n = n


class LoadError(IocGraphError):
    """An import file is unreadable or violates its schema.

    ``line`` is the 1-based line number at which loading aborted.
    """

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.line = line


class StoreError(IocGraphError):
    """Persistence-layer failure; the in-memory store was left unchanged."""

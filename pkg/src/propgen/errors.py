"""Exception hierarchy shared by every propgen module."""


class PropgenError(Exception):
    """Base class for all errors raised by propgen."""


class SchemaError(PropgenError, ValueError):
    """A label schema is malformed, or a value falls outside its domain."""


class EstimationError(PropgenError, ValueError):
    """A distribution cannot be estimated from the given graph."""


class SaturationError(PropgenError, RuntimeError):
    """Edge drawing exhausted its attempt budget before reaching the target size."""

    def __init__(self, message, *, accepted=0, attempts=0, rejected_self=0,
                 rejected_duplicate=0, rejected_empty_pool=0):
        super().__init__(
            f"{message} (accepted={accepted}, attempts={attempts}, "
            f"self={rejected_self}, duplicate={rejected_duplicate}, "
            f"empty_pool={rejected_empty_pool})"
        )
        self.accepted = accepted
        self.attempts = attempts
        self.rejected_self = rejected_self
        self.rejected_duplicate = rejected_duplicate
        self.rejected_empty_pool = rejected_empty_pool


class BucketingError(PropgenError, ValueError):
    """Degree bucket boundaries are invalid or do not cover a degree."""


class AugmentationError(PropgenError):
    """The augmentation loop aborted; ``trace`` holds the (n_a, error) pairs so far."""

    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = list(trace)


class DataFormatError(PropgenError, ValueError):
    """An input file could not be parsed. ``line`` is 1-based when known."""

    def __init__(self, message, *, path=None, line=None):
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)
        self.path = path
        self.line = line


class GraphDataWarning(UserWarning):
    """Recoverable input anomaly; ``count`` is the number of affected records."""

    def __init__(self, message, count=0):
        super().__init__(message)
        self.count = count

"""Exception hierarchy shared across the pipeline.

Every stage raises a subclass of PivotcastError so the CLI can map
failures to exit codes (usage errors -> 2, everything else -> 1).
"""


class PivotcastError(Exception):
    """Base class for all pipeline errors."""


class ParseError(PivotcastError):
    """Malformed input file; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class ValidationError(PivotcastError):
    """Input violates a domain invariant (duplicate dates, non-finite values, ...)."""


class AlignmentError(PivotcastError):
    """Series cannot be brought onto a common date grid."""


class NotFoundError(PivotcastError):
    """A named column, file, or session does not exist."""


class DomainError(PivotcastError):
    """Value outside the mathematical domain of a transform."""


class SizeError(PivotcastError):
    """Vector lengths or sample counts are incompatible."""


class DegenerateColumnError(PivotcastError):
    """Column has zero variance and cannot be standardized."""


class SchemaError(PivotcastError):
    """Feature names or dimensions do not match between artifacts."""


class NumericError(PivotcastError):
    """Non-finite values where finite numbers are required."""


class SplitError(PivotcastError):
    """Train/test boundary leaves one side empty."""


class UsageError(PivotcastError):
    """Caller error: bad flag, unknown metric, empty pivot set, ..."""


class TransportError(PivotcastError):
    """Network or HTTP failure while fetching remote statistics."""

    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


class SamplerStuckError(PivotcastError):
    """MCMC warmup rejected every proposal; the chain cannot move."""

"""
Exception hierarchy shared by the library, the CLI and the HTTP routes.

Every error raised on purpose derives from RealizationError so callers can
catch the whole family and map it to an exit code or an HTTP status.
"""

from typing import Optional


class RealizationError(Exception):
    """Base class for all nrdual errors."""

    exit_code = 2
    http_status = 400


class DimensionError(RealizationError, ValueError):
    """Mismatched alphabet, length or group between two operands."""


class DomainError(RealizationError, ValueError):
    """Operand outside the domain of an operation (wrong p, wrong tag)."""


class ParseError(RealizationError):
    """Malformed D-transform text. ``offset`` is a byte offset into the input."""

    def __init__(
        self,
        message: str,
        offset: Optional[int] = None,
        row: Optional[int] = None,
        column: Optional[int] = None,
    ):
        self.offset = offset
        self.row = row
        self.column = column
        super().__init__(message)

    def __str__(self) -> str:
        base = super().__str__()
        where = []
        if self.row is not None:
            where.append(f"row {self.row}")
        if self.column is not None:
            where.append(f"column {self.column}")
        if self.offset is not None:
            where.append(f"offset {self.offset}")
        return f"{base} ({', '.join(where)})" if where else base


class CoefficientError(ParseError, ValueError):
    """A literal coefficient is not smaller than p."""


class FormatError(RealizationError):
    """A realization, message or WAM document does not match its format."""


class ValidationError(RealizationError):
    """A realization that must be normal is not."""

    def __init__(self, report):
        self.report = report
        super().__init__("invalid realization: " + "; ".join(report.violations))


class ResourceError(RealizationError):
    """An enumeration would exceed the configured budget."""

    exit_code = 3
    http_status = 413

    def __init__(self, required: int, budget: int, what: str = "tuples"):
        self.required = required
        self.budget = budget
        super().__init__(
            f"enumeration of {required} {what} exceeds the budget of {budget}"
        )


class ConsistencyError(RealizationError):
    """A computed quantity violates an identity it must satisfy."""

    exit_code = 1
    http_status = 500

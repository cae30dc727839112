"""
RunLab Exceptions

Error taxonomy shared by services, checkers and the CLI. Each error knows
the CLI exit code it maps to and renders itself as a JSON-ready dict.
"""

from typing import Any, Dict, Optional

from lab.constants import EXIT_INTERNAL, EXIT_RESOURCE, EXIT_USAGE, EXIT_VERIFICATION_FAILED


class LabError(Exception):
    """Base class for all laboratory errors."""

    exit_code: int = EXIT_USAGE
    kind: str = "error"

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for the error stream."""
        return {
            "error": self.kind,
            "message": self.message,
            "details": jsonable(self.details),
        }


class InvalidDimensionError(LabError, ValueError):
    """Raised when (k, m) or (k, M) is outside an operation's domain."""

    kind = "invalid-dimension"


class RankRangeError(LabError, IndexError):
    """Raised when a vertex rank is outside {0..C(m,k)-1}."""

    kind = "range"


class InvalidEdgeError(LabError, ValueError):
    """Raised when a vertex pair is not an edge of the graph."""

    kind = "invalid-edge"


class InvalidInputError(LabError, ValueError):
    """Raised when an input object violates an operation's precondition."""

    kind = "invalid-input"


class ResourceError(LabError):
    """
    Raised when an instance exceeds a configured budget.

    The ``details`` carry whatever is known without the full computation,
    e.g. lower/upper bounds for a chromatic number.
    """

    exit_code = EXIT_RESOURCE
    kind = "resource"


class SearchTimeoutError(ResourceError):
    """Raised by the CLI when a search ran out of time (never a proof of absence)."""

    kind = "timeout"


class VerificationError(LabError):
    """A checked property was violated; always an implementation bug signal."""

    exit_code = EXIT_VERIFICATION_FAILED
    kind = "verification"


class IdentityViolationError(VerificationError):
    """A counting identity did not hold."""

    kind = "identity-violation"


class ConstructionViolationError(VerificationError):
    """The four-case construction produced a constant run."""

    kind = "construction-violation"


class InternalError(LabError):
    """An unexpected exception, reported in the same JSON shape as the others."""

    exit_code = EXIT_INTERNAL
    kind = "internal"


def jsonable(value: Any) -> Any:
    """Render details for JSON: big ints and rationals become strings."""
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, int):
        return str(value) if abs(value) >= 2**53 else value
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (float, str)):
        return value
    return str(value)


def error_for(kind: Optional[str]) -> type:
    """Map a checker's failure kind to the VerificationError subclass to raise."""
    return {
        IdentityViolationError.kind: IdentityViolationError,
        ConstructionViolationError.kind: ConstructionViolationError,
    }.get(kind or "", VerificationError)

"""
Base Checker Class

Abstract base class for all property checkers (Chvatal, bridge identity,
lower bound, impossibility, ...). Defines the common interface and result
structure.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from lab.constants import MODE_EXHAUSTIVE, REPORT_SCHEMA_VERSION
from lab.exceptions import jsonable, error_for


@dataclass
class CheckResult:
    """
    Result from a property check.

    A failed property is data, not an exception: ``passed`` is False and
    ``counterexample`` holds the witness. ``raise_for_failure`` turns it
    into the matching VerificationError.

    Attributes:
        check: The checker name
        passed: False once any instance violated the property
        mode: exhaustive or sampled
        hypothesis_met: False when the property was vacuous on this instance
        counts: Enumeration counters
        messages: List of informational/warning messages
        details: Structured per-check data
        counterexample: First violating instance (lowest index)
        failure_kind: Error kind raised by raise_for_failure
    """
    check: str
    passed: bool = True
    mode: str = MODE_EXHAUSTIVE
    hypothesis_met: bool = True
    counts: Dict[str, int] = field(default_factory=dict)
    messages: List[Dict[str, str]] = field(default_factory=list)
    details: Dict[str, Any] = field(default_factory=dict)
    counterexample: Optional[Any] = None
    failure_kind: Optional[str] = None

    def add_message(self, level: str, text: str):
        """Add a message with level: info, warning, error, success."""
        self.messages.append({"level": level, "text": text})

    def fail(self, text: str, counterexample: Any = None, kind: Optional[str] = None):
        """Record a violation; the first counterexample is kept."""
        self.passed = False
        self.add_message("error", text)
        if self.counterexample is None:
            self.counterexample = counterexample
        if self.failure_kind is None:
            self.failure_kind = kind

    def raise_for_failure(self) -> "CheckResult":
        if not self.passed:
            errors = [m["text"] for m in self.messages if m["level"] == "error"]
            raise error_for(self.failure_kind)(
                errors[0] if errors else f"{self.check} failed",
                check=self.check,
                counterexample=self.counterexample,
            )
        return self

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for the JSON report."""
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "check": self.check,
            "passed": self.passed,
            "mode": self.mode,
            "hypothesis_met": self.hypothesis_met,
            "counts": jsonable(self.counts),
            "messages": self.messages,
            "details": jsonable(self.details),
            "counterexample": jsonable(self.counterexample),
        }


class BaseChecker(ABC):
    """
    Abstract base class for property checkers.

    Each checker must implement:
    - name: The check name used in reports and on the command line
    - check(): The main check method
    """

    name: str = ""

    @abstractmethod
    def check(self, **kwargs) -> CheckResult:
        """
        Verify the property on one instance.

        Returns:
            CheckResult with counts, messages and any counterexample
        """
        pass

    def _create_result(self, mode: str = MODE_EXHAUSTIVE) -> CheckResult:
        """Create an empty result for this checker."""
        return CheckResult(check=self.name, mode=mode)

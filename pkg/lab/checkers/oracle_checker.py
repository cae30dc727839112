"""
Oracle Equivalence Checker Module

The window-transfer engine against brute-force enumeration of all
M^(l+k-1) tuples, for each run event.
"""

from typing import Iterable, Optional

from lab.checkers.base import BaseChecker, CheckResult
from lab.constants import RUN_EVENTS
from lab.exceptions import IdentityViolationError
from lab.services.blockfactor import GridFunction, exact_run_probability, naive_run_count


class OracleEquivalenceChecker(BaseChecker):
    """
    Favorable counts from the window-transfer engine and from full
    enumeration, compared event by event. Instances with more than
    NAIVE_ENUMERATION_LIMIT tuples raise ResourceError.
    """

    name = "oracle-equivalence"

    def check(
        self,
        f: GridFunction,
        ell: int,
        events: Optional[Iterable[str]] = None,
        limit: Optional[int] = None,
        **kwargs,
    ) -> CheckResult:
        result = self._create_result()
        compared = {}
        for event in events or RUN_EVENTS:
            fast = exact_run_probability(f, event, ell)
            slow = naive_run_count(f, event, ell, limit=limit)
            compared[event] = {"dp": fast.favorable_count, "naive": slow.favorable_count}
            if fast.favorable_count != slow.favorable_count:
                result.fail(
                    f"{event} run: DP counts {fast.favorable_count}, enumeration counts {slow.favorable_count}",
                    counterexample={"function": f.to_dict(), "event": event, "l": ell},
                    kind=IdentityViolationError.kind,
                )
        result.counts = {"events": len(compared), "tuples_per_event": f.M ** (ell + f.k - 1)}
        result.details.update({"k": f.k, "M": f.M, "l": ell, "counts": compared})
        if result.passed:
            result.add_message("success", "DP and enumeration agree")
        return result

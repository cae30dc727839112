"""
Trichotomy Checker Module

For a grid function f and run length l:
- the increasing, constant and decreasing run probabilities are not all 0
- P(constant run of l) equals P(run of l-1 zeros) of the derived sign function
- their sum, the probability of a constant run of l-1 signs, is at least
  the three-valued lower bound when that bound is materialized
"""

import logging

from lab.checkers.base import BaseChecker, CheckResult
from lab.constants import EVENT_CONSTANT, EVENT_DECREASING, EVENT_INCREASING
from lab.exceptions import IdentityViolationError, InvalidInputError
from lab.services.blockfactor import (
    GridFunction,
    derived_sign_function,
    exact_run_probability,
    value_run_probability,
)
from lab.services.bounds import trichotomy_p_lower

logger = logging.getLogger(__name__)


class TrichotomyChecker(BaseChecker):
    """Monotone trichotomy checker."""

    name = "trichotomy"

    def check(self, f: GridFunction, ell: int, **kwargs) -> CheckResult:
        if ell < 1:
            raise InvalidInputError("Run length must be at least 1", l=ell)
        result = self._create_result()
        probabilities = {
            event: exact_run_probability(f, event, ell).probability
            for event in (EVENT_INCREASING, EVENT_CONSTANT, EVENT_DECREASING)
        }
        result.details.update({"k": f.k, "M": f.M, "l": ell, "probabilities": probabilities})

        if not any(probabilities.values()):
            result.fail("increasing, constant and decreasing runs all have probability 0", counterexample=f.to_dict())
            return result

        if ell >= 2:
            zero_run = value_run_probability(derived_sign_function(f), 0, ell - 1)
            result.details["sign_zero_run"] = zero_run
            if zero_run != probabilities[EVENT_CONSTANT]:
                result.fail(
                    f"constant run {probabilities[EVENT_CONSTANT]} != zero run of signs {zero_run}",
                    counterexample=f.to_dict(),
                    kind=IdentityViolationError.kind,
                )
                return result

            bound = trichotomy_p_lower(f.k, ell)
            total = sum(probabilities.values())
            result.details["p_lower"] = bound.p_lower if bound.p_lower is not None else bound.log2_p
            if bound.p_lower is not None and total < bound.p_lower:
                result.fail(f"sum of monotone run probabilities {total} is below {bound.p_lower}", counterexample=f.to_dict())
                return result

        result.add_message("success", "trichotomy holds")
        return result

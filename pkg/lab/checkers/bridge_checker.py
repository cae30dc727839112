"""
Counting Bridge Checker Module

Links constant runs of a grid function f to monochromatic paths in
D(k,M). With n = l+k-1:

1. Increasing tuples x_1 < ... < x_n whose l windows carry equal f-values
   are exactly the monochromatic l-vertex paths of D(k,M) colored by
   c(a_1..a_k) = f(a_1..a_k).
2. Summed over all permutations y of {1..M}, the path counts under
   c_y(a) = f(y_a1..y_ak) equal
   (#favorable tuples of distinct coordinates) * C(M,n) * (M-n)!.
3. If every c_y has such a path, P(run) >= (M-n)!/M!.
"""

import itertools
import logging
from fractions import Fraction
from math import comb, factorial
from typing import Optional

from lab.checkers.base import BaseChecker, CheckResult
from lab.constants import EVENT_CONSTANT, budget
from lab.exceptions import IdentityViolationError, InvalidInputError
from lab.services.blockfactor import (
    GridFunction,
    coloring_from_function,
    exact_run_probability,
    mono_path_count,
)

logger = logging.getLogger(__name__)


def _windows_equal(f: GridFunction, x, ell: int) -> bool:
    first = f(x[0:f.k])
    return all(f(x[i:i + f.k]) == first for i in range(1, ell))


class CountingBridgeChecker(BaseChecker):
    """Run-to-path counting identity checker."""

    name = "counting-bridge"

    def check(self, f: GridFunction, ell: int, permutation_limit: Optional[int] = None, **kwargs) -> CheckResult:
        if ell < 1:
            raise InvalidInputError("Run length must be at least 1", l=ell)
        if not f.is_tabular:
            raise InvalidInputError("The bridge check needs a tabular function")
        result = self._create_result()
        M, k = f.M, f.k
        n = ell + k - 1
        result.details.update({"k": k, "M": M, "l": ell, "coordinates": n})

        increasing = sum(
            1 for x in itertools.combinations(range(1, M + 1), n) if _windows_equal(f, x, ell)
        )
        paths = mono_path_count(coloring_from_function(f), ell)
        result.counts = {"increasing_tuples": increasing, "mono_paths": paths}
        if increasing != paths:
            result.fail(
                f"{increasing} increasing favorable tuples but {paths} monochromatic paths",
                counterexample={"table": f.to_dict()["table"], "l": ell},
                kind=IdentityViolationError.kind,
            )
            return result

        limit = budget("BRIDGE_PERMUTATION_LIMIT", permutation_limit)
        if factorial(M) > limit:
            result.add_message("info", f"permutation identity skipped: {M}! exceeds {limit}")
            return result
        if n > M:
            result.add_message("info", "no tuple of distinct coordinates fits; permutation identity is 0 = 0")
            return result

        distinct = sum(
            1 for x in itertools.permutations(range(1, M + 1), n) if _windows_equal(f, x, ell)
        )
        total_paths = 0
        covered = True
        for y in itertools.permutations(range(1, M + 1)):
            count = mono_path_count(coloring_from_function(f, y), ell)
            total_paths += count
            covered = covered and count >= 1
        expected = distinct * comb(M, n) * factorial(M - n)
        result.counts.update({
            "permutations": factorial(M),
            "distinct_favorable": distinct,
            "permuted_paths": total_paths,
        })
        if total_paths != expected:
            result.fail(
                f"permutation sum {total_paths} != {distinct} * C({M},{n}) * ({M}-{n})! = {expected}",
                counterexample={"table": f.to_dict()["table"], "l": ell},
                kind=IdentityViolationError.kind,
            )
            return result

        result.details["every_coloring_has_path"] = covered
        if covered:
            probability = exact_run_probability(f, EVENT_CONSTANT, ell).probability
            bound = Fraction(factorial(M - n), factorial(M))
            result.details["probability"] = probability
            result.details["path_bound"] = bound
            if probability < bound:
                result.fail(
                    f"P(run) = {probability} below (M-n)!/M! = {bound}",
                    counterexample={"table": f.to_dict()["table"], "l": ell},
                    kind=IdentityViolationError.kind,
                )
                return result
        result.add_message("success", "counting bridge identities hold")
        return result

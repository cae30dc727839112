"""
Lower Bound Checker Module

Compares the explicit constant p = 1/M^(k+l-1), M = M(k,l,r), against the
smallest exact constant-run probability found by the adversarial
minimizer over grid functions {1..M}^k -> {0..r-1}.
"""

import logging
from typing import Optional

from lab.checkers.base import BaseChecker, CheckResult
from lab.constants import MODE_EXHAUSTIVE, MODE_SAMPLED, budget
from lab.exceptions import ResourceError
from lab.services.adversarial import adversarial_min
from lab.services.bounds import p_lower

logger = logging.getLogger(__name__)


class LowerBoundChecker(BaseChecker):
    """
    Run-probability lower bound checker.

    Exhaustive when all r^(M^k) tables fit EXHAUSTIVE_FUNCTION_LIMIT;
    otherwise sampled plus local search, and a pass only means no
    counterexample was found.
    """

    name = "lower-bound"

    def check(
        self,
        k: int,
        ell: int,
        r: int,
        mode: Optional[str] = None,
        samples: Optional[int] = None,
        seed: Optional[int] = None,
        threads: Optional[int] = None,
        **kwargs,
    ) -> CheckResult:
        report = p_lower(k, ell, r)
        if not report.M.materialized or report.p_lower is None:
            raise ResourceError(f"M({k},{ell},{r}) = {report.M} is far beyond exact computation", M=str(report.M))
        M = report.M.value
        size = M ** k
        if size * M * ell > budget("EXACT_STATE_BUDGET"):
            raise ResourceError(
                f"Tables of {size} entries at M = {M} exceed the exact state budget",
                M=M, table_size=size,
            )

        if mode is None:
            exhaustive = size <= 64 and r ** size <= budget("EXHAUSTIVE_FUNCTION_LIMIT")
            mode = MODE_EXHAUSTIVE if exhaustive else MODE_SAMPLED
            if not exhaustive:
                logger.warning(f"lower bound ({k},{ell},{r}): {r}^{M ** k} tables, falling back to sampling")

        found = adversarial_min(k, M, r, ell, mode=mode, samples=samples, seed=seed, threads=threads)
        result = self._create_result(mode)
        result.counts = {"functions_evaluated": found.evaluated}
        result.details.update({
            "k": k,
            "l": ell,
            "r": r,
            "M": M,
            "p_lower": report.p_lower,
            "min_probability": found.min_probability,
            "argmin": found.argmin.to_dict()["table"],
            "seed": found.seed,
        })

        if found.min_probability < report.p_lower:
            result.fail(
                f"min P(run) = {found.min_probability} is below p = {report.p_lower}",
                counterexample=found.argmin.to_dict(),
            )
        elif mode == MODE_SAMPLED:
            result.add_message("info", "no counterexample found (sampled minimization)")
        else:
            result.add_message("success", f"min over all {found.evaluated} tables is {found.min_probability} >= {report.p_lower}")
        return result

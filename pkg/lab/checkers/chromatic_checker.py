"""
Chromatic Bounds Checker Module

With exact chromatic numbers of D(k,m) for a grid of (k,m):
- chi(D(1,m)) = m
- log2 chi(D(k,m)) <= chi(D(k+1,m))
- chi(D(k,m)) >= log2 iterated k-1 times on m

All three comparisons are done in integers: log2 a <= b iff a <= 2^b, and
the iterated-log bound holds iff m <= t_k(chi).
"""

import logging
from typing import Dict, Iterable, Tuple

from lab.checkers.base import BaseChecker, CheckResult
from lab.services.bounds import tower
from lab.services.coloring import chromatic_number
from lab.services.debruijn import get_graph

logger = logging.getLogger(__name__)


class ChromaticBoundsChecker(BaseChecker):
    """Chromatic number inequality checker."""

    name = "chromatic-bounds"

    def check(self, k_values: Iterable[int], m_values: Iterable[int], **kwargs) -> CheckResult:
        result = self._create_result()
        cache: Dict[Tuple[int, int], int] = {}

        def chi(k: int, m: int) -> int:
            if (k, m) not in cache:
                cache[(k, m)] = chromatic_number(get_graph(k, m))
            return cache[(k, m)]

        pairs = [(k, m) for k in k_values for m in m_values if 1 <= k <= m]
        inequalities = 0
        for k, m in pairs:
            value = chi(k, m)
            if k == 1 and value != m:
                result.fail(f"chi(D(1,{m})) = {value}, expected {m}", counterexample={"k": 1, "m": m})

            bound = tower(k, value)
            if bound.materialized and m > bound.value:
                result.fail(
                    f"chi(D({k},{m})) = {value} is below the iterated-log bound",
                    counterexample={"k": k, "m": m, "chromatic_number": value},
                )

            if k + 1 <= m:
                inequalities += 1
                above = chi(k + 1, m)
                if value > 2 ** above:
                    result.fail(
                        f"log2 chi(D({k},{m})) > chi(D({k + 1},{m})): {value} > 2^{above}",
                        counterexample={"k": k, "m": m, "chi_k": value, "chi_k_plus_1": above},
                    )

        result.counts = {"instances": len(pairs), "inequalities": inequalities, "graphs_colored": len(cache)}
        result.details["chromatic_numbers"] = [
            {"k": k, "m": m, "chromatic_number": value} for (k, m), value in sorted(cache.items())
        ]
        if result.passed:
            result.add_message("success", f"{len(pairs)} instances, {inequalities} consecutive-dimension inequalities hold")
        return result

"""
Lift Soundness Checker Module

Enumerates every q-edge-coloring of D(k,m), keeps those without a
monochromatic 2-edge path, lifts each to a vertex coloring and checks that
the lift is proper and uses at most 2^q colors.
"""

import logging
from typing import Optional

from lab.checkers.base import BaseChecker, CheckResult
from lab.constants import budget
from lab.exceptions import InvalidInputError, ResourceError, VerificationError
from lab.services.coloring import (
    EdgeColoring,
    enumerate_colorings,
    find_mono_two_edge_path,
    is_proper,
    lift_edge_coloring,
)
from lab.services.debruijn import build_graph

logger = logging.getLogger(__name__)


class LiftSoundnessChecker(BaseChecker):
    """
    Subset-lift checker.

    Validates, for every admissible edge coloring:
    1. The lifted coloring is proper on D(k,m)
    2. It uses at most 2^q colors
    """

    name = "lift-soundness"

    def check(self, k: int, m: int, q: int, coloring_limit: Optional[int] = None, **kwargs) -> CheckResult:
        if q < 1:
            raise InvalidInputError("Edge colorings need q >= 1", q=q)
        graph = build_graph(k, m)
        total = q ** graph.edge_count
        limit = budget("EXHAUSTIVE_COLORING_LIMIT", coloring_limit)
        if total > limit:
            raise ResourceError(
                f"{q}^{graph.edge_count} edge colorings exceed the limit {limit}",
                colorings=total, limit=limit,
            )

        result = self._create_result()
        result.details.update({"k": k, "m": m, "q": q, "max_colors": 2 ** q})
        admissible = 0
        violations = 0
        most_colors = 0

        for colors in enumerate_colorings(graph.edge_count, q):
            ec = EdgeColoring(k, m, q, colors)
            if find_mono_two_edge_path(graph, ec) is not None:
                continue
            admissible += 1
            try:
                lifted = lift_edge_coloring(graph, ec)
            except VerificationError as e:
                violations += 1
                result.fail(e.message, counterexample=ec.to_dict())
                continue
            most_colors = max(most_colors, lifted.colors_used)
            if lifted.colors_used > 2 ** q or not is_proper(graph, lifted):
                violations += 1
                result.fail("Lifted coloring is improper or uses too many colors", counterexample=ec.to_dict())

        result.counts = {
            "enumerated": total,
            "admissible": admissible,
            "violations": violations,
        }
        result.details["most_colors_used"] = most_colors
        if result.passed:
            result.add_message("success", f"all {admissible} admissible edge colorings lift to proper colorings")
        logger.info(f"lift soundness on D({k},{m}), q={q}: {admissible}/{total} admissible, {violations} violations")
        return result

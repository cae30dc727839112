"""
Corollary Checker Module

Every r-coloring of the vertices of D(k,M) contains a monochromatic
directed path of l vertices once log2 iterated k-2 times on M exceeds l^r.

A path of l vertices in D(k,M) is a path of l edges in D(k-1,M), and
chi(D(k-1,M)) is at least the iterated logarithm, so Chvatal applies when
the iterated logarithm is strictly above l^r. At equality it does not:
D(2,4) with r = l = 2 has a proper 2-coloring and hence no monochromatic
2-vertex path.
"""

import logging
from typing import Optional

from lab.checkers.base import BaseChecker, CheckResult
from lab.constants import MODE_EXHAUSTIVE
from lab.exceptions import InvalidDimensionError, InvalidInputError
from lab.services.bounds import M_for, iterated_log2, render_number
from lab.services.coloring import VertexColoring, scan_colorings
from lab.services.debruijn import build_graph

logger = logging.getLogger(__name__)


class CorollaryChecker(BaseChecker):
    """Monochromatic path corollary checker."""

    name = "corollary"

    def check(
        self,
        k: int,
        M: int,
        r: int,
        length_vertices: int,
        mode: str = MODE_EXHAUSTIVE,
        samples: Optional[int] = None,
        seed: Optional[int] = None,
        threads: Optional[int] = None,
        coloring_limit: Optional[int] = None,
        **kwargs,
    ) -> CheckResult:
        if k < 2:
            raise InvalidDimensionError("The path corollary needs k >= 2", k=k)
        if r < 1 or length_vertices < 1:
            raise InvalidInputError("Needs r >= 1 and l >= 1", r=r, length_vertices=length_vertices)

        result = self._create_result(mode)
        graph = build_graph(k, M)
        threshold = length_vertices ** r
        # log2 iterated k-2 times on M exceeds l^r iff M exceeds t_{k-1}(l^r)
        ceiling = M_for(k, length_vertices, r)
        result.hypothesis_met = bool(ceiling.materialized and M > ceiling.value)
        result.details.update({
            "k": k,
            "M": M,
            "r": r,
            "length_vertices": length_vertices,
            "iterated_log": render_number(iterated_log2(M, k - 2)),
            "threshold": threshold,
            "M_for": str(ceiling),
            "boundary": bool(ceiling.materialized and M == ceiling.value),
        })

        scan = scan_colorings(
            graph, r, length_vertices,
            mode=mode, samples=samples, seed=seed, threads=threads, coloring_limit=coloring_limit,
        )
        result.counts = {"colorings_checked": scan.checked, "without_path": scan.misses}
        witness = VertexColoring(k, M, r, scan.first_miss).to_dict() if scan.misses else None

        if not result.hypothesis_met:
            result.add_message(
                "info",
                f"hypothesis not met (iterated log {result.details['iterated_log']} <= {threshold}); "
                f"{scan.misses} colorings avoid the path",
            )
            result.details["avoiding_coloring"] = witness
        elif scan.misses:
            result.fail(
                f"{scan.misses} colorings of D({k},{M}) have no monochromatic path of {length_vertices} vertices",
                counterexample=witness,
            )
        else:
            result.add_message("success", f"all {scan.checked} {mode} colorings contain the path")
        return result

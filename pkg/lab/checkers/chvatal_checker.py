"""
Chvatal Checker Module

If chi(D) > l^r, every r-coloring of the edges of D contains a
monochromatic directed path of l edges. Checked on one instance D(k,m):
edge colorings of D(k,m) are vertex colorings of D(k+1,m), and a path of
l edges is a path of l vertices in D(k+1,m).
"""

import logging
from typing import Optional

from lab.checkers.base import BaseChecker, CheckResult
from lab.constants import MODE_EXHAUSTIVE
from lab.exceptions import InvalidInputError
from lab.services.coloring import EdgeColoring, chromatic_number, scan_colorings
from lab.services.debruijn import DeBruijnGraph, get_graph

logger = logging.getLogger(__name__)


class ChvatalChecker(BaseChecker):
    """
    Chvatal property checker.

    Validates:
    1. The hypothesis chi(D(k,m)) > l^r (otherwise the check is vacuous)
    2. Every enumerated or sampled r-edge-coloring has a monochromatic
       path of l edges
    """

    name = "chvatal"

    def check(
        self,
        graph: DeBruijnGraph,
        r: int,
        length_edges: int,
        mode: str = MODE_EXHAUSTIVE,
        samples: Optional[int] = None,
        seed: Optional[int] = None,
        threads: Optional[int] = None,
        coloring_limit: Optional[int] = None,
        **kwargs,
    ) -> CheckResult:
        """
        Check the Chvatal implication on D(k,m).

        Returns:
            CheckResult; a counterexample is an edge coloring without the path
        """
        if r < 1 or length_edges < 1:
            raise InvalidInputError("Chvatal checks need r >= 1 and l >= 1 edges", r=r, length_edges=length_edges)

        result = self._create_result(mode)
        chi = chromatic_number(graph)
        threshold = length_edges ** r
        result.details.update({
            "k": graph.k,
            "m": graph.m,
            "r": r,
            "length_edges": length_edges,
            "chromatic_number": chi,
            "threshold": threshold,
        })

        if chi <= threshold:
            result.hypothesis_met = False
            result.add_message("info", f"hypothesis not met: chi = {chi} <= l^r = {threshold}")
            return result

        line = get_graph(graph.k + 1, graph.m)
        scan = scan_colorings(
            line, r, length_edges,
            mode=mode, samples=samples, seed=seed, threads=threads, coloring_limit=coloring_limit,
        )
        result.counts = {"colorings_checked": scan.checked, "counterexamples": scan.misses}

        if scan.misses:
            edge_coloring = EdgeColoring(graph.k, graph.m, r, scan.first_miss)
            result.fail(
                f"{scan.misses} edge colorings have no monochromatic path of {length_edges} edges",
                counterexample=edge_coloring.to_dict(),
            )
        else:
            result.add_message(
                "success",
                f"all {scan.checked} {mode} edge colorings contain a monochromatic path of {length_edges} edges",
            )
        return result

"""
Impossibility Checker Module

For h built by the four-case construction from a 2-coloring of D(k,M)
without monochromatic k-vertex paths, the 2k+1 overlapping windows of a
tuple of 3k distinct coordinates never carry one h-value.

Exhaustive over all M!/(M-3k)! ordered tuples when they fit
EXHAUSTIVE_TUPLE_LIMIT, otherwise uniform random distinct tuples.

The run bound checker carries this to probabilities: a constant run of
2k+1 windows of h needs a repeated coordinate among the 3k, so its
probability is at most 1 - prod_{j<3k} (1 - j/M), which is below 9k^2/M.
"""

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from math import perm
from typing import List, Optional, Tuple

import numpy as np

from lab.checkers.base import BaseChecker, CheckResult
from lab.constants import EVENT_CONSTANT, MODE_EXHAUSTIVE, MODE_SAMPLED, budget
from lab.exceptions import ConstructionViolationError, InvalidInputError, ResourceError
from lab.services.blockfactor import GridFunction, exact_run_probability
from lab.services.coloring import find_mono_path
from lab.services.construction import FourCaseRule
from lab.services.simulation import mc_estimate
from lab.services.streams import chunk_sizes, resolve_seed, stream

logger = logging.getLogger(__name__)

# distinct tuples per sampled chunk are drawn by ranking M random keys
_SAMPLE_CELLS = 2 ** 22


def constant_windows(rule: FourCaseRule, tuples: np.ndarray) -> np.ndarray:
    """Row mask: all 2k+1 windows of the 3k-tuple carry one h-value."""
    k = rule.k
    values = np.stack([rule.vectorized(tuples[:, j:j + k]) for j in range(2 * k + 1)], axis=1)
    return (values == values[:, :1]).all(axis=1)


def four_case_rule(h: GridFunction) -> FourCaseRule:
    """The rule behind h, once its coloring is known to avoid k-vertex paths."""
    rule = h.rule
    if not isinstance(rule, FourCaseRule):
        raise InvalidInputError("The check needs h from construct_h")
    path = find_mono_path(rule.graph, rule.coloring, rule.k)
    if path is not None:
        raise InvalidInputError(
            f"The coloring has a monochromatic path of {rule.k} vertices",
            path=[list(w) for w in path.words(rule.graph)],
        )
    return rule


class ImpossibilityChecker(BaseChecker):
    """Constant-window impossibility checker for the four-case construction."""

    name = "impossibility"

    def check(
        self,
        h: GridFunction,
        mode: Optional[str] = None,
        samples: Optional[int] = None,
        seed: Optional[int] = None,
        threads: Optional[int] = None,
        tuple_limit: Optional[int] = None,
        **kwargs,
    ) -> CheckResult:
        rule = four_case_rule(h)
        k, M = rule.k, rule.M

        coordinates = 3 * k
        total = perm(M, coordinates)
        limit = budget("EXHAUSTIVE_TUPLE_LIMIT", tuple_limit)
        if mode is None:
            mode = MODE_EXHAUSTIVE if total <= limit else MODE_SAMPLED
        result = self._create_result(mode)
        result.details.update({"k": k, "M": M, "coordinates": coordinates, "windows": 2 * k + 1})

        if total == 0:
            result.hypothesis_met = False
            result.add_message("info", f"M = {M} < 3k = {coordinates}: no tuple of distinct coordinates")
            return result

        if mode == MODE_EXHAUSTIVE:
            if total > limit:
                raise ResourceError(f"{total} ordered tuples exceed the limit {limit}", tuples=total, limit=limit)
            checked, hits, violation = self._exhaustive(rule, coordinates)
        else:
            seed = resolve_seed(seed)
            result.details["seed"] = seed
            checked, hits, violation = self._sampled(
                rule, coordinates, budget("DEFAULT_SAMPLES", samples), seed, threads,
            )

        result.counts = {"tuples_checked": checked, "violations": hits}
        if violation is not None:
            result.fail(
                f"all {2 * k + 1} windows of {violation} carry one h-value ({hits} such tuples)",
                counterexample=list(violation),
                kind=ConstructionViolationError.kind,
            )
        else:
            result.add_message("success", f"{checked} {mode} tuples, no constant window run")
        return result

    def _exhaustive(self, rule: FourCaseRule, coordinates: int) -> Tuple[int, int, Optional[Tuple[int, ...]]]:
        batch = budget("MC_CHUNK_SIZE")
        tuples = itertools.permutations(range(1, rule.M + 1), coordinates)
        checked = 0
        hits = 0
        first = None
        while True:
            block = list(itertools.islice(tuples, batch))
            if not block:
                return checked, hits, first
            array = np.array(block, dtype=np.int64)
            rows = np.flatnonzero(constant_windows(rule, array))
            if rows.size and first is None:
                first = tuple(int(v) for v in array[rows[0]])
            hits += int(rows.size)
            checked += len(block)

    def _sampled(
        self, rule: FourCaseRule, coordinates: int, samples: int, seed: int, threads: Optional[int]
    ) -> Tuple[int, int, Optional[Tuple[int, ...]]]:
        chunk = max(1, min(budget("MC_CHUNK_SIZE"), _SAMPLE_CELLS // rule.M))

        def run_chunk(job: Tuple[int, int]) -> Tuple[int, Optional[Tuple[int, ...]]]:
            index, n = job
            keys = stream(seed, index).random(size=(n, rule.M))
            tuples = np.argsort(keys, axis=1)[:, :coordinates] + 1
            rows = np.flatnonzero(constant_windows(rule, tuples))
            return int(rows.size), (tuple(int(v) for v in tuples[rows[0]]) if rows.size else None)

        jobs: List[Tuple[int, int]] = list(enumerate(chunk_sizes(samples, chunk)))
        with ThreadPoolExecutor(max_workers=budget("DEFAULT_THREADS", threads)) as executor:
            found = list(executor.map(run_chunk, jobs))
        violation = next((v for _, v in found if v is not None), None)
        return samples, sum(n for n, _ in found), violation


class RunBoundChecker(BaseChecker):
    """
    Constant-run probability of h against the distinctness bound.

    P(2k+1 windows of h agree) <= 1 - prod_{j<3k} (1 - j/M) < 9k^2/M.
    The probability is exact through the window-transfer engine while
    M^(k+1) * (2k+1) fits EXACT_STATE_BUDGET. Beyond that it is estimated
    by Monte Carlo, and the estimate may exceed the bound by at most
    MC_ACCEPTANCE_SIGMAS standard errors.
    """

    name = "run-bound"

    def check(
        self,
        h: GridFunction,
        mode: Optional[str] = None,
        samples: Optional[int] = None,
        seed: Optional[int] = None,
        threads: Optional[int] = None,
        sigmas: Optional[float] = None,
        **kwargs,
    ) -> CheckResult:
        rule = four_case_rule(h)
        k, M = rule.k, rule.M
        windows = 2 * k + 1

        distinct = Fraction(1)
        for j in range(3 * k):
            distinct *= 1 - Fraction(j, M)
        # a factor j = M zeroes the product once M < 3k
        bound = 1 - distinct
        quadratic = Fraction(9 * k * k, M)

        work = M ** (k + 1) * windows
        if mode is None:
            mode = MODE_EXHAUSTIVE if work <= budget("EXACT_STATE_BUDGET") else MODE_SAMPLED
        result = self._create_result(mode)
        result.details.update({
            "k": k,
            "M": M,
            "windows": windows,
            "distinct_bound": bound,
            "distinct_bound_decimal": float(bound),
            "quadratic_bound": quadratic,
        })

        if mode == MODE_EXHAUSTIVE:
            report = exact_run_probability(h, EVENT_CONSTANT, windows)
            p = report.probability
            result.counts = {"favorable": report.favorable_count, "total": report.total_count}
            result.details.update({"probability": p, "probability_decimal": float(p)})
            if p > bound:
                result.fail(
                    f"P(constant run) = {p} exceeds 1 - prod(1 - j/M) = {bound}",
                    kind=ConstructionViolationError.kind,
                )
        else:
            tolerance = budget("MC_ACCEPTANCE_SIGMAS", sigmas)
            estimate = mc_estimate(
                h, EVENT_CONSTANT, windows, budget("DEFAULT_SAMPLES", samples), seed=seed, threads=threads,
            )
            result.counts = {"samples": estimate.samples, "hits": estimate.hits}
            result.details.update({
                "seed": estimate.seed,
                "estimate": estimate.estimate,
                "std_error": estimate.std_error,
                "sigmas": tolerance,
            })
            if float(estimate.estimate - bound) > tolerance * estimate.std_error:
                result.fail(
                    f"estimate {float(estimate.estimate):.6f} exceeds the bound {float(bound):.6f} "
                    f"by more than {tolerance} standard errors",
                    kind=ConstructionViolationError.kind,
                )

        if not bound < quadratic:
            result.fail(f"1 - prod(1 - j/M) = {bound} is not below 9k^2/M = {quadratic}")
        if result.passed:
            result.add_message("success", f"constant runs of {windows} windows stay below {float(bound):.6f}")
        logger.info(f"run bound k={k} M={M} ({mode}): passed={result.passed}")
        return result

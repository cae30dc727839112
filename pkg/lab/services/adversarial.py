"""
Adversarial Minimization Service

Searches the grid functions f: {1..M}^k -> {0..r-1} for the smallest exact
probability of a constant run of l windows. Exhaustive mode enumerates all
r^(M^k) tables in lexicographic order; sampled mode draws random tables
and hill-climbs from the best one. Ties always go to the lexicographically
smallest table.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from lab.constants import (
    DEFAULT_LOCAL_SEARCH_STEPS,
    MODE_EXHAUSTIVE,
    MODE_SAMPLED,
    budget,
)
from lab.exceptions import InvalidInputError, ResourceError
from lab.services.blockfactor import GridFunction, window_run_counts
from lab.services.streams import chunk_sizes, resolve_seed, stream

logger = logging.getLogger(__name__)

# (favorable count, table) of the best candidate so far
Candidate = Tuple[int, Tuple[int, ...]]


@dataclass
class AdversarialResult:
    """
    Outcome of a minimization.

    Attributes:
        min_probability: Smallest exact constant-run probability found
        argmin: The minimizing table
        evaluated: Number of tables whose probability was computed
        exhaustive: True when every table was evaluated
        seed: Seed of sampled mode
    """
    k: int
    M: int
    r: int
    ell: int
    mode: str
    min_probability: Fraction
    argmin: GridFunction
    evaluated: int
    exhaustive: bool
    seed: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        p = self.min_probability
        return {
            "k": self.k,
            "M": self.M,
            "r": self.r,
            "l": self.ell,
            "mode": self.mode,
            "exhaustive": self.exhaustive,
            "min_probability": f"{p.numerator}/{p.denominator}",
            "favorable_count": str(int(p * self.M ** (self.ell + self.k - 1))),
            "evaluated": self.evaluated,
            "seed": None if self.seed is None else str(self.seed),
            "argmin": self.argmin.to_dict(),
        }


def _tables_for_ids(ids: np.ndarray, size: int, r: int) -> np.ndarray:
    """Tables numbered in lexicographic order (entry 0 most significant)."""
    powers = r ** np.arange(size - 1, -1, -1, dtype=np.int64)
    return (ids[:, None] // powers[None, :]) % r


def _best_of(tables: np.ndarray, counts: Sequence[int]) -> Candidate:
    low = min(counts)
    return low, min(tuple(int(v) for v in tables[i]) for i, c in enumerate(counts) if c == low)


def _evaluate(tables: np.ndarray, M: int, k: int, ell: int, state_budget: Optional[int]) -> List[int]:
    return window_run_counts(tables, M, k, ell, state_budget=state_budget)


def adversarial_min(
    k: int,
    M: int,
    r: int,
    ell: int,
    mode: str = MODE_EXHAUSTIVE,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
    local_steps: int = DEFAULT_LOCAL_SEARCH_STEPS,
    function_limit: Optional[int] = None,
    state_budget: Optional[int] = None,
) -> AdversarialResult:
    """
    Minimize P(Z_1 = ... = Z_l) over grid functions.

    Args:
        k, M, r, ell: Window length, grid size, number of values, run length
        mode: exhaustive or sampled
        samples: Random tables drawn in sampled mode
        seed: Seed of sampled mode (generated when None)
        threads: Worker threads; results do not depend on it
        local_steps: Hill-climbing moves after sampling

    Raises:
        ResourceError: exhaustive mode with r^(M^k) above EXHAUSTIVE_FUNCTION_LIMIT
    """
    if k < 1 or M < 1 or r < 1 or ell < 1:
        raise InvalidInputError("Minimization needs k, M, r, l >= 1", k=k, M=M, r=r, l=ell)
    if mode not in (MODE_EXHAUSTIVE, MODE_SAMPLED):
        raise InvalidInputError(f"Unknown mode {mode!r}")

    size = M ** k
    workers = budget("DEFAULT_THREADS", threads)
    batch = budget("FUNCTION_BATCH_SIZE")
    total = M ** (ell + k - 1)

    if mode == MODE_EXHAUSTIVE:
        count = r ** size
        limit = budget("EXHAUSTIVE_FUNCTION_LIMIT", function_limit)
        if count > limit:
            raise ResourceError(
                f"Exhaustive minimization over {r}^{size} tables exceeds the limit {limit}",
                functions=count, limit=limit,
            )

        def run_batch(start: int) -> Candidate:
            ids = np.arange(start, min(start + batch, count), dtype=np.int64)
            tables = _tables_for_ids(ids, size, r)
            return _best_of(tables, _evaluate(tables, M, k, ell, state_budget))

        with ThreadPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(run_batch, range(0, count, batch)))
        best = min(results)
        evaluated = count
        logger.info(f"adversarial_min(k={k}, M={M}, r={r}, l={ell}): exhaustive over {count} tables")
        seed = None
    else:
        seed = resolve_seed(seed)
        draws = budget("DEFAULT_SAMPLES", samples)

        def run_chunk(job: Tuple[int, int]) -> Candidate:
            index, n = job
            tables = stream(seed, index).integers(0, r, size=(n, size), dtype=np.int64)
            return _best_of(tables, _evaluate(tables, M, k, ell, state_budget))

        jobs = list(enumerate(chunk_sizes(draws, batch)))
        with ThreadPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(run_chunk, jobs))
        best = min(results)
        best, climbed = _local_search(best, M, k, r, ell, local_steps, state_budget)
        evaluated = draws + climbed
        logger.info(
            f"adversarial_min(k={k}, M={M}, r={r}, l={ell}): sampled {draws} tables, "
            f"{climbed} local evaluations, seed {seed}"
        )

    favorable, table = best
    return AdversarialResult(
        k=k, M=M, r=r, ell=ell, mode=mode,
        min_probability=Fraction(favorable, total),
        argmin=GridFunction(k, M, r, table),
        evaluated=evaluated,
        exhaustive=mode == MODE_EXHAUSTIVE,
        seed=seed,
    )


def _local_search(
    start: Candidate, M: int, k: int, r: int, ell: int, steps: int, state_budget: Optional[int]
) -> Tuple[Candidate, int]:
    """Steepest descent over single-entry changes; stops at a local minimum."""
    current = start
    evaluated = 0
    if r == 1:
        return current, evaluated
    for _ in range(steps):
        table = np.asarray(current[1], dtype=np.int64)
        neighbors = []
        for position in range(table.size):
            for value in range(r):
                if value != table[position]:
                    neighbor = table.copy()
                    neighbor[position] = value
                    neighbors.append(neighbor)
        stacked = np.stack(neighbors)
        counts = _evaluate(stacked, M, k, ell, state_budget)
        evaluated += len(neighbors)
        candidate = _best_of(stacked, counts)
        if candidate[0] >= current[0]:
            break
        current = candidate
    return current, evaluated

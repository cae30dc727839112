"""
Monte Carlo Service

Estimates run probabilities of a block factor by drawing (l+k-1)-tuples
of noise, in chunks of MC_CHUNK_SIZE with one seeded stream per chunk.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from lab.constants import (
    EVENT_CONSTANT,
    EVENT_INCREASING,
    NOISE_DISCRETE,
    RUN_EVENTS,
    budget,
)
from lab.exceptions import InvalidInputError
from lab.services.blockfactor import GridFunction, ProcessSpec
from lab.services.streams import chunk_sizes, resolve_seed, stream

logger = logging.getLogger(__name__)


@dataclass
class MCEstimate:
    """
    A Monte Carlo estimate; estimate = hits / samples exactly.

    Attributes:
        std_error: sqrt(p(1-p)/n) at the estimate p
        seed: The seed that reproduces this estimate
    """
    event: str
    ell: int
    samples: int
    hits: int
    seed: int
    noise: str = NOISE_DISCRETE

    @property
    def estimate(self) -> Fraction:
        return Fraction(self.hits, self.samples)

    @property
    def std_error(self) -> float:
        p = self.hits / self.samples
        return math.sqrt(p * (1 - p) / self.samples)

    def within(self, exact: Fraction, sigmas: float) -> bool:
        """|estimate - exact| <= sigmas * std_error (exact match when std_error is 0)."""
        return abs(float(self.estimate - exact)) <= sigmas * self.std_error

    def to_dict(self) -> Dict[str, Any]:
        return {
            "event": self.event,
            "l": self.ell,
            "noise": self.noise,
            "samples": self.samples,
            "hits": self.hits,
            "estimate": f"{self.estimate.numerator}/{self.estimate.denominator}",
            "estimate_decimal": float(self.estimate),
            "std_error": self.std_error,
            "seed": str(self.seed),
        }


def draw_noise(rng: np.random.Generator, n: int, length: int, M: int, noise: str) -> np.ndarray:
    """
    n tuples of ``length`` grid points.

    Continuous noise draws U in [0,1) and maps it to ceil(M(1-U)), which is
    ceil(M*U') for U' = 1-U uniform on (0,1].
    """
    if noise == NOISE_DISCRETE:
        return rng.integers(1, M + 1, size=(n, length), dtype=np.int64)
    uniform = rng.random(size=(n, length))
    return np.ceil(M * (1.0 - uniform)).astype(np.int64)


def count_run_hits(f: GridFunction, points: np.ndarray, event: str, ell: int, codes: Optional[np.ndarray] = None) -> int:
    """How many rows of ``points`` (shape (n, l+k-1)) realize the event."""
    if ell == 1:
        return points.shape[0]
    windows = np.stack(
        [f.evaluate_codes(points[:, i:i + f.k], codes) for i in range(ell)],
        axis=1,
    )
    steps = np.diff(windows, axis=1)
    if event == EVENT_CONSTANT:
        hits = (steps == 0).all(axis=1)
    elif event == EVENT_INCREASING:
        hits = (steps > 0).all(axis=1)
    else:
        hits = (steps < 0).all(axis=1)
    return int(hits.sum())


def mc_estimate(
    spec: Union[ProcessSpec, GridFunction],
    event: str,
    ell: int,
    samples: int,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
    chunk_size: Optional[int] = None,
) -> MCEstimate:
    """
    Monte Carlo estimate of a run probability.

    Deterministic given (seed, chunk size); the thread count only changes
    the schedule.

    Args:
        spec: The process, or a bare function under discrete noise
        event: constant, increasing or decreasing
        ell: Run length in windows
        samples: Number of tuples, at least 1
        seed: 64-bit seed; generated (and reported) when None
    """
    if not isinstance(spec, ProcessSpec):
        spec = ProcessSpec(spec)
    if event not in RUN_EVENTS:
        raise InvalidInputError(f"Unknown run event {event!r}", choices=RUN_EVENTS)
    if ell < 1:
        raise InvalidInputError("Run length must be at least 1", l=ell)
    if samples < 1:
        raise InvalidInputError("Monte Carlo needs at least one sample", samples=samples)

    f = spec.f
    seed = resolve_seed(seed)
    length = ell + f.k - 1
    codes = f.value_codes()[0] if f.is_tabular else None
    chunk = budget("MC_CHUNK_SIZE", chunk_size)

    def run_chunk(job: Tuple[int, int]) -> int:
        index, n = job
        points = draw_noise(stream(seed, index), n, length, f.M, spec.noise)
        return count_run_hits(f, points, event, ell, codes)

    jobs = list(enumerate(chunk_sizes(samples, chunk)))
    with ThreadPoolExecutor(max_workers=budget("DEFAULT_THREADS", threads)) as executor:
        hits = sum(executor.map(run_chunk, jobs))

    result = MCEstimate(event, ell, samples, hits, seed, spec.noise)
    logger.info(f"mc_estimate({event}, l={ell}, noise={spec.noise}): {hits}/{samples}, seed {seed}")
    return result

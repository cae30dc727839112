"""
Block Factor Service

Grid-valued k-block factors Z_i = f(U_i, ..., U_{i+k-1}) with U_i uniform on
{1..M} and exact run probabilities:
- GridFunction: tabular or rule-backed f on {1..M}^k
- exact_run_probability: constant / increasing / decreasing runs of l windows
- derived_sign_function: the (k+1)-window sign of consecutive f-values, which
  turns monotone runs into constant runs
- mono_path_count: monochromatic paths of a vertex coloring of D(k,M)
- naive_run_count: brute-force oracle over all M^(l+k-1) tuples

All exact counts are Python ints (or numpy int64 while they provably fit);
probabilities are Fractions. No floating point on the exact path.
"""

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, Iterator, List, Optional, Protocol, Sequence, Tuple, Union

import numpy as np

from lab.constants import (
    EVENT_CONSTANT,
    EVENT_DECREASING,
    EVENT_INCREASING,
    NOISE_DISCRETE,
    NOISE_MODES,
    RUN_EVENTS,
    budget,
)
from lab.exceptions import InvalidDimensionError, InvalidInputError, ResourceError
from lab.services.coloring import VertexColoring
from lab.services.debruijn import get_graph

logger = logging.getLogger(__name__)

Value = Union[int, Fraction]

# counts below this fit int64 with room for one addition
_INT64_SAFE = 2 ** 62


class GridRule(Protocol):
    """A rule evaluating f on one grid point, optionally on a batch of points."""

    def __call__(self, z: Sequence[int]) -> Value: ...

    def vectorized(self, points: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True)
class GridFunction:
    """
    f: {1..M}^k -> {0..r-1} (discrete) or -> rationals (r is None).

    Tables are in row-major order with coordinate 1 varying fastest:
    index(z) = sum (z_i - 1) * M^(i-1).

    Attributes:
        k: Window length
        M: Grid size
        r: Number of values for discrete functions, None for rational-valued
        table: Full table of M^k values, or None when rule-backed
        rule: Evaluation rule, or None when tabular
    """
    k: int
    M: int
    r: Optional[int]
    table: Optional[Tuple[Value, ...]] = None
    rule: Optional[GridRule] = field(default=None, compare=False)

    def __post_init__(self):
        if self.k < 1 or self.M < 1:
            raise InvalidDimensionError(f"Grid functions need k >= 1 and M >= 1, got k={self.k}, M={self.M}")
        if (self.table is None) == (self.rule is None):
            raise InvalidInputError("A grid function is either tabular or rule-backed")
        if self.table is not None:
            values = tuple(_as_value(v) for v in self.table)
            object.__setattr__(self, "table", values)
            if len(values) != self.size:
                raise InvalidInputError(
                    f"Table of f on {{1..{self.M}}}^{self.k} needs {self.size} entries, got {len(values)}",
                    expected=self.size, entries=len(values),
                )
            if self.r is not None:
                for index, v in enumerate(values):
                    if not isinstance(v, int) or not 0 <= v < self.r:
                        raise InvalidInputError(
                            f"Value {v} at index {index} is outside 0..{self.r - 1}",
                            index=index, value=v, r=self.r,
                        )

    @property
    def size(self) -> int:
        return self.M ** self.k

    @property
    def is_discrete(self) -> bool:
        return self.r is not None

    @property
    def is_tabular(self) -> bool:
        return self.table is not None

    def index(self, z: Sequence[int]) -> int:
        if len(z) != self.k:
            raise InvalidInputError(f"f takes {self.k} coordinates, got {len(z)}")
        position = 0
        for z_i in reversed(z):
            if not 1 <= z_i <= self.M:
                raise InvalidInputError(f"Coordinate {z_i} outside 1..{self.M}")
            position = position * self.M + (z_i - 1)
        return position

    def __call__(self, z: Sequence[int]) -> Value:
        if self.table is not None:
            return self.table[self.index(z)]
        return self.rule(tuple(z))

    def points(self) -> Iterator[Tuple[int, ...]]:
        """All grid points in table order."""
        for reversed_point in itertools.product(range(1, self.M + 1), repeat=self.k):
            yield reversed_point[::-1]

    def materialize(self) -> "GridFunction":
        """The tabular form of a rule-backed function."""
        if self.table is not None:
            return self
        if self.size > budget("EXACT_STATE_BUDGET"):
            raise ResourceError(f"Table of {self.size} entries is over the state budget", size=self.size)
        return GridFunction(self.k, self.M, self.r, tuple(self.rule(z) for z in self.points()))

    def value_codes(self) -> Tuple[np.ndarray, List[Value]]:
        """
        Order-preserving integer codes of the table.

        Returns:
            (codes of length M^k, sorted distinct values) with
            values[codes[i]] == table[i]
        """
        table = self.materialize().table
        values = sorted(set(table))
        lookup = {v: c for c, v in enumerate(values)}
        return np.fromiter((lookup[v] for v in table), dtype=np.int64, count=len(table)), values

    def evaluate_codes(self, points: np.ndarray, codes: Optional[np.ndarray] = None) -> np.ndarray:
        """
        Evaluate on a batch of grid points (shape (n, k)) as order-preserving codes.

        Rule-backed functions use their vectorized rule and return raw values
        (rules are integer-valued).
        """
        if self.table is None and codes is None:
            vectorized = getattr(self.rule, "vectorized", None)
            if vectorized is not None:
                return np.asarray(vectorized(points), dtype=np.int64)
            return np.fromiter((self.rule(tuple(int(x) for x in row)) for row in points), dtype=np.int64)
        if codes is None:
            codes, _values = self.value_codes()
        weights = self.M ** np.arange(self.k, dtype=np.int64)
        return codes[(points - 1) @ weights]

    def to_dict(self) -> Dict[str, Any]:
        """Function file format; rationals as "p/q" strings."""
        table = self.materialize().table
        return {
            "k": self.k,
            "M": self.M,
            "r": self.r,
            "table": [v if isinstance(v, int) else f"{v.numerator}/{v.denominator}" for v in table],
        }

    @classmethod
    def from_table(cls, k: int, M: int, table: Sequence[Any], r: Optional[int] = None) -> "GridFunction":
        return cls(k, M, r, tuple(table))

    @classmethod
    def constant(cls, k: int, M: int, value: Value = 0, r: Optional[int] = 1) -> "GridFunction":
        return cls(k, M, r, (value,) * (M ** k))

    @classmethod
    def from_callable(cls, k: int, M: int, func: Callable[[Tuple[int, ...]], Value], r: Optional[int] = None) -> "GridFunction":
        """Tabulate a Python callable over the grid."""
        draft = cls(k, M, r, rule=func)
        return draft.materialize()

    @classmethod
    def random(cls, k: int, M: int, r: int, rng: np.random.Generator) -> "GridFunction":
        return cls(k, M, r, tuple(int(v) for v in rng.integers(0, r, size=M ** k)))


def _as_value(v: Any) -> Value:
    if isinstance(v, bool):
        return int(v)
    if isinstance(v, (int, Fraction)):
        return v.numerator if isinstance(v, Fraction) and v.denominator == 1 else v
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, str):
        return _as_value(Fraction(v))
    raise InvalidInputError(f"Grid values are integers or exact rationals, got {v!r}")


@dataclass(frozen=True)
class ProcessSpec:
    """
    A block factor process: f applied to sliding windows of uniform noise.

    Both noise models give the same window distribution, since ceil(M*U)
    is uniform on {1..M}.
    """
    f: GridFunction
    noise: str = NOISE_DISCRETE

    def __post_init__(self):
        if self.noise not in NOISE_MODES:
            raise InvalidInputError(f"Unknown noise model {self.noise!r}", choices=NOISE_MODES)


@dataclass
class RunReport:
    """
    Exact probability of a run event.

    Attributes:
        event: constant, increasing or decreasing
        ell: Run length in windows
        favorable_count: Tuples in {1..M}^(l+k-1) realizing the event
        total_count: M^(l+k-1)
    """
    event: str
    ell: int
    k: int
    M: int
    favorable_count: int
    total_count: int
    method: str = "window-dp"

    @property
    def probability(self) -> Fraction:
        return Fraction(self.favorable_count, self.total_count)

    def to_dict(self) -> Dict[str, Any]:
        p = self.probability
        return {
            "event": self.event,
            "l": self.ell,
            "k": self.k,
            "M": self.M,
            "favorable_count": str(self.favorable_count),
            "total_count": str(self.total_count),
            "probability": f"{p.numerator}/{p.denominator}",
            "method": self.method,
        }


# Exact engine

def _count_dtype(M: int, coordinates: int) -> Any:
    return np.int64 if M ** coordinates < _INT64_SAFE else object


def window_run_counts(
    codes: np.ndarray,
    M: int,
    k: int,
    windows: int,
    target: Optional[int] = None,
    state_budget: Optional[int] = None,
) -> List[int]:
    """
    Count tuples in {1..M}^(windows+k-1) whose ``windows`` overlapping
    windows all carry the same code (or all carry ``target``), for a batch
    of functions at once.

    The state is the current window: A_t[w] counts prefixes whose last
    window is w and whose windows so far agree. A window w' = (z_2..z_k, x)
    is reached from w = (y, z_2..z_k) for each y.

    Args:
        codes: Array of shape (B, M^k) of value codes, table order
        M: Grid size
        k: Window length
        windows: Run length, at least 1
        target: Restrict the run to this code

    Returns:
        One exact count per function in the batch
    """
    codes = np.atleast_2d(codes)
    batch, size = codes.shape
    if size != M ** k:
        raise InvalidInputError(f"Expected tables of {M ** k} entries, got {size}")
    if windows < 1:
        raise InvalidInputError("Runs have at least one window", windows=windows)
    work = size * M * windows
    limit = budget("EXACT_STATE_BUDGET", state_budget)
    if work > limit:
        raise ResourceError(
            f"Exact run count needs {work} state updates per function, budget {limit}",
            work=work, budget=limit, M=M, k=k, windows=windows,
        )

    dtype = _count_dtype(M, windows + k - 1)
    suffix = M ** (k - 1)
    # [b, s, y] is window (y, s...) and [b, x, s] is window (s..., x)
    as_predecessor = codes.reshape(batch, suffix, M)
    as_successor = codes.reshape(batch, M, suffix)

    if target is None:
        counts = np.ones((batch, size), dtype=dtype)
        same = as_predecessor[:, None, :, :] == as_successor[:, :, :, None]
        for _ in range(windows - 1):
            previous = counts.reshape(batch, suffix, M)
            counts = (previous[:, None, :, :] * same).sum(axis=3).reshape(batch, size)
    else:
        hit = (codes == target).astype(dtype)
        counts = hit.copy()
        hit_successor = hit.reshape(batch, M, suffix)
        for _ in range(windows - 1):
            previous = counts.reshape(batch, suffix, M).sum(axis=2)
            counts = (hit_successor * previous[:, None, :]).reshape(batch, size)

    return [int(total) for total in counts.sum(axis=1)]


def derived_sign_function(f: GridFunction) -> GridFunction:
    """
    g(x_1..x_{k+1}) = -1, 0, 1 as f(x_1..x_k) is greater than, equal to or
    less than f(x_2..x_{k+1}).

    Returns:
        Rational-valued tabular function with window k+1 and values {-1,0,1}
    """
    codes, _values = f.value_codes()
    size = f.M ** (f.k + 1)
    flat = np.arange(size, dtype=np.int64)
    first = codes[flat % (f.M ** f.k)]
    second = codes[flat // f.M]
    signs = np.sign(second - first)
    return GridFunction(f.k + 1, f.M, None, tuple(int(s) for s in signs))


def _check_event(event: str) -> None:
    if event not in RUN_EVENTS:
        raise InvalidInputError(f"Unknown run event {event!r}", choices=RUN_EVENTS)


def exact_run_probability(spec: Union[ProcessSpec, GridFunction], event: str, ell: int, state_budget: Optional[int] = None) -> RunReport:
    """
    Exact P(Z_1 ~ Z_2 ~ ... ~ Z_l) for ~ one of =, <, >.

    Monotone events go through the derived sign function: l increasing
    windows of f are l-1 windows of g all equal to +1 (decreasing: -1).
    A single window is always a run.

    Raises:
        ResourceError: the instance exceeds EXACT_STATE_BUDGET
    """
    f = spec.f if isinstance(spec, ProcessSpec) else spec
    _check_event(event)
    if ell < 1:
        raise InvalidInputError("Run length must be at least 1", l=ell)
    total = f.M ** (ell + f.k - 1)
    if ell == 1:
        return RunReport(event, ell, f.k, f.M, total, total)

    if event == EVENT_CONSTANT:
        codes, _values = f.value_codes()
        favorable = window_run_counts(codes, f.M, f.k, ell, state_budget=state_budget)[0]
    else:
        g = derived_sign_function(f)
        sign = 1 if event == EVENT_INCREASING else -1
        favorable = _value_run_count(g, sign, ell - 1, state_budget)
    logger.debug(f"exact {event} run, l={ell}, k={f.k}, M={f.M}: {favorable}/{total}")
    return RunReport(event, ell, f.k, f.M, favorable, total)


def _value_run_count(f: GridFunction, value: Value, windows: int, state_budget: Optional[int] = None) -> int:
    codes, values = f.value_codes()
    if value not in values:
        return 0
    return window_run_counts(codes, f.M, f.k, windows, target=values.index(value), state_budget=state_budget)[0]


def value_run_probability(f: GridFunction, value: Value, windows: int, state_budget: Optional[int] = None) -> Fraction:
    """P(Z_1 = ... = Z_windows = value); an empty run has probability 1."""
    if windows == 0:
        return Fraction(1)
    favorable = _value_run_count(f, value, windows, state_budget)
    return Fraction(favorable, f.M ** (windows + f.k - 1))


def naive_run_count(f: GridFunction, event: str, ell: int, limit: Optional[int] = None) -> RunReport:
    """Brute-force oracle: evaluate every tuple of {1..M}^(l+k-1)."""
    _check_event(event)
    length = ell + f.k - 1
    total = f.M ** length
    cap = budget("NAIVE_ENUMERATION_LIMIT", limit)
    if total > cap:
        raise ResourceError(f"Naive enumeration of {total} tuples is over the limit {cap}", total=total)

    relation = {
        EVENT_CONSTANT: lambda a, b: a == b,
        EVENT_INCREASING: lambda a, b: a < b,
        EVENT_DECREASING: lambda a, b: a > b,
    }[event]
    favorable = 0
    for x in itertools.product(range(1, f.M + 1), repeat=length):
        values = [f(x[i:i + f.k]) for i in range(ell)]
        if all(relation(a, b) for a, b in zip(values, values[1:])):
            favorable += 1
    return RunReport(event, ell, f.k, f.M, favorable, total, method="naive")


# Paths in D(k,M)

def mono_path_count(vc: VertexColoring, length_vertices: int) -> int:
    """
    Number of monochromatic directed paths of ``length_vertices`` vertices
    in D(k,M) under the coloring vc.
    """
    if length_vertices < 1:
        raise InvalidInputError("Path length must be at least one vertex", length_vertices=length_vertices)
    graph = get_graph(vc.k, vc.m)
    colors = vc.colors
    counts = [1] * graph.vertex_count
    for _ in range(length_vertices - 1):
        extended = [0] * graph.vertex_count
        for v in graph.topological_order():
            if counts[v]:
                for w in graph.successor_ranks(v):
                    if colors[w] == colors[v]:
                        extended[w] += counts[v]
        counts = extended
    return sum(counts)


def coloring_from_function(f: GridFunction, y: Optional[Sequence[int]] = None) -> VertexColoring:
    """
    The coloring c(a_1..a_k) = f(y_{a_1}, ..., y_{a_k}) of D(k,M); y defaults
    to the identity. Rational values are replaced by their order codes.
    """
    graph = get_graph(f.k, f.M)
    codes, values = f.value_codes()
    y = tuple(range(1, f.M + 1)) if y is None else tuple(y)
    colors = [int(codes[f.index([y[a - 1] for a in word])]) for word in graph.vertices()]
    return VertexColoring(f.k, f.M, len(values), colors)

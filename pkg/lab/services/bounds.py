"""
Bounds Service

Tower-function arithmetic and the explicit constants of the block-factor
run bounds:
- t_1(x) = x, t_i(x) = 2^(t_{i-1}(x))
- M(k, l, r) = t_{k-1}(l^r), the grid size at which every r-coloring of
  D(k, M) has a monochromatic path of l vertices
- p = 1 / M^(k+l-1), the run-probability lower bound
- the adversarial construction's grid size t_{k-2}(k/sqrt(8)) and its
  upper bound 9k^2/M

Integer tower arguments are evaluated exactly; real arguments with mpmath at
TOWER_PRECISION_BITS of mantissa. Levels are materialized while the result
stays under TOWER_MAX_BITS bits, above that the tower is kept symbolic as
the last materialized level plus a count of pending exponentiations.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Any, Dict, List, Optional, Tuple, Union

import mpmath

from lab.constants import budget
from lab.exceptions import InvalidDimensionError

logger = logging.getLogger(__name__)

Number = Union[int, Fraction, mpmath.mpf]

# str() of ints above this many bits is slow and capped by the interpreter
_DECIMAL_RENDER_BITS = 12000


def _normalize(x: Any) -> Number:
    """Ints stay ints, exact rationals stay Fractions, everything else becomes mpf."""
    if isinstance(x, bool):
        raise InvalidDimensionError("Tower arguments are numbers", argument=x)
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else x
    if isinstance(x, str):
        return _normalize(Fraction(x))
    return mpmath.mpf(x)


def _to_mpf(x: Number) -> mpmath.mpf:
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def _exp2(x: Number) -> Number:
    """2^x, exact for non-negative ints."""
    if isinstance(x, int):
        return 2 ** x if x >= 0 else Fraction(1, 2 ** -x)
    return mpmath.power(2, _to_mpf(x))


def render_number(value: Number, digits: int = 20) -> str:
    """Decimal rendering; exact for ints and rationals of moderate size."""
    if isinstance(value, int):
        if value.bit_length() <= _DECIMAL_RENDER_BITS:
            return str(value)
        if value & (value - 1) == 0:
            return f"2^{value.bit_length() - 1}"
        return mpmath.nstr(mpmath.mpf(value), digits)
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return render_number(value.numerator, digits)
        return f"{render_number(value.numerator, digits)}/{render_number(value.denominator, digits)}"
    return mpmath.nstr(value, digits)


def iterated_log2(x: Any, times: int) -> mpmath.mpf:
    """
    log2 applied ``times`` times; -inf once an intermediate value drops to
    zero or below (the corresponding bound is then vacuous).
    """
    with mpmath.workprec(budget("TOWER_PRECISION_BITS")):
        value = _to_mpf(_normalize(x))
        for _ in range(times):
            if value <= 0:
                return mpmath.mpf("-inf")
            value = mpmath.log(value, 2)
        return value


@total_ordering
@dataclass(frozen=True, eq=False)
class TowerValue:
    """
    t_level(base_arg), materialized up to ``levels[-1]``.

    Attributes:
        level: Tower height i >= 1
        base_arg: The argument x
        levels: Materialized t_1(x), ..., t_j(x) with j <= level
    """
    level: int
    base_arg: Number
    levels: Tuple[Number, ...]

    @property
    def materialized(self) -> bool:
        return len(self.levels) == self.level

    @property
    def pending_levels(self) -> int:
        """Exponentiations above the last materialized level."""
        return self.level - len(self.levels)

    @property
    def value(self) -> Optional[Number]:
        return self.levels[-1] if self.materialized else None

    @property
    def is_exact(self) -> bool:
        return self.materialized and isinstance(self.value, (int, Fraction))

    def log2(self) -> "TowerValue":
        """log2 t_i(x) = t_{i-1}(x)."""
        if self.level < 2:
            raise InvalidDimensionError("log2 of a level-1 tower is not a tower", level=self.level)
        return TowerValue(self.level - 1, self.base_arg, self.levels[: self.level - 1])

    def log_chain(self) -> List[str]:
        """Iterated logs t_{i-1}, t_{i-2}, ..., t_1 that are materialized, rendered."""
        known = self.levels[: self.level - 1]
        return [render_number(v) for v in reversed(known)]

    def symbolic(self) -> str:
        """The tower written as 2^2^...^x with level-1 arrows."""
        return "2^" * (self.level - 1) + f"({render_number(self.base_arg)})"

    def as_mpf(self) -> mpmath.mpf:
        if not self.materialized:
            return mpmath.inf
        return _to_mpf(self.value)

    def __str__(self) -> str:
        if self.materialized:
            return render_number(self.value)
        return self.symbolic()

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "levels": self.level,
            "top_argument": render_number(self.base_arg),
            "materialized": self.materialized,
            "log_chain": self.log_chain(),
        }
        if self.materialized:
            data["value"] = render_number(self.value)
        else:
            data["symbolic"] = self.symbolic()
            data["pending_levels"] = self.pending_levels
        return data

    # Ordering across materialized and symbolic values

    def _compare(self, other: "TowerValue") -> int:
        a, pa = self.levels[-1], self.pending_levels
        b, pb = other.levels[-1], other.pending_levels
        # exp2 is strictly increasing, so peel equal numbers of exponentiations
        common = min(pa, pb)
        pa -= common
        pb -= common
        if pa == 0 and pb == 0:
            return _cmp(a, b)
        sign = 1
        if pb > 0:
            a, b, pa, pb, sign = b, a, pb, pa, -1
        # now self-side is exp2^pa(a) with pa > 0 and other side is the number b
        reduced = iterated_log2(b, pa)
        return sign * _cmp(a, reduced if mpmath.isfinite(reduced) else mpmath.mpf("-inf"))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TowerValue):
            return NotImplemented
        return self._compare(other) == 0

    def __lt__(self, other: "TowerValue") -> bool:
        return self._compare(other) < 0

    def __hash__(self) -> int:
        return hash(str(self))


def _cmp(a: Number, b: Number) -> int:
    if isinstance(a, (int, Fraction)) and isinstance(b, (int, Fraction)):
        return (a > b) - (a < b)
    with mpmath.workprec(budget("TOWER_PRECISION_BITS")):
        x, y = _to_mpf(a), _to_mpf(b)
        return (x > y) - (x < y)


def tower(i: int, x: Any, max_bits: Optional[int] = None) -> TowerValue:
    """
    t_i(x).

    Args:
        i: Level, i >= 1
        x: Argument; int and Fraction are exact, anything else is real
        max_bits: Override for TOWER_MAX_BITS

    Returns:
        TowerValue, materialized when the result has at most max_bits bits
    """
    if i < 1:
        raise InvalidDimensionError(f"Tower level must be at least 1, got {i}", level=i)
    limit = budget("TOWER_MAX_BITS", max_bits)
    base = _normalize(x)
    levels = [base]
    with mpmath.workprec(budget("TOWER_PRECISION_BITS")):
        for _ in range(i - 1):
            current = levels[-1]
            # 2^current has floor(current)+1 bits, more than limit once current >= limit
            if current >= limit:
                logger.debug(f"tower({i}, {render_number(base)}): symbolic above level {len(levels)}")
                break
            levels.append(_normalize(_exp2(current)))
    return TowerValue(i, base, tuple(levels))


@dataclass
class BoundReport:
    """
    Explicit constants for one parameter triple.

    Attributes:
        k, ell, r: Window length, run length, number of values
        M: Grid size as a tower
        p_lower: 1/M^(k+l-1) when materializable
        log2_p: log2 of p_lower, rendered (always present)
        theorem3_M: Grid size of the adversarial construction
        theorem3_bound: 9k^2/M of the adversarial construction
        vacuous: theorem3_bound >= 1
    """
    k: int
    ell: Optional[int] = None
    r: Optional[int] = None
    M: Optional[TowerValue] = None
    p_lower: Optional[Fraction] = None
    log2_p: Optional[str] = None
    theorem3_M: Optional[TowerValue] = None
    theorem3_bound: Optional[Number] = None
    log2_theorem3_bound: Optional[str] = None
    vacuous: Optional[bool] = None

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"k": self.k}
        if self.M is not None:
            data.update({
                "l": self.ell,
                "r": self.r,
                "M": str(self.M),
                "M_tower": self.M.to_dict(),
                "p_lower": render_number(self.p_lower) if self.p_lower is not None else None,
                "log2_p_lower": self.log2_p,
            })
        if self.theorem3_M is not None:
            data.update({
                "theorem3_M": str(self.theorem3_M),
                "theorem3_M_tower": self.theorem3_M.to_dict(),
                "theorem3_bound": (
                    render_number(self.theorem3_bound) if self.theorem3_bound is not None else None
                ),
                "log2_theorem3_bound": self.log2_theorem3_bound,
                "vacuous": self.vacuous,
            })
        return data


def M_for(k: int, ell: int, r: int) -> TowerValue:
    """M with log2 iterated k-2 times equal to l^r, i.e. t_{k-1}(l^r)."""
    if k < 2:
        raise InvalidDimensionError(f"M(k,l,r) needs k >= 2, got k={k}", k=k)
    if ell < 1 or r < 1:
        raise InvalidDimensionError("M(k,l,r) needs l >= 1 and r >= 1", l=ell, r=r)
    return tower(k - 1, ell ** r)


def _log2_of(value: TowerValue) -> str:
    """log2 of a tower, rendered; exact when the level below is materialized."""
    if value.level >= 2:
        return str(value.log2())
    with mpmath.workprec(budget("TOWER_PRECISION_BITS")):
        return render_number(mpmath.log(_to_mpf(value.levels[0]), 2))


def p_lower(k: int, ell: int, r: int) -> BoundReport:
    """
    The run-probability lower bound 1/M^(k+l-1).

    Returns:
        BoundReport with the exact rational when M^(k+l-1) stays under
        TOWER_MAX_BITS bits, and log2(p) in every case
    """
    M = M_for(k, ell, r)
    exponent = k + ell - 1
    report = BoundReport(k=k, ell=ell, r=r, M=M)

    if M.materialized and isinstance(M.value, int):
        bits = M.value.bit_length() * exponent
        if bits <= budget("TOWER_MAX_BITS"):
            report.p_lower = Fraction(1, M.value ** exponent)
        if M.value & (M.value - 1) == 0:
            report.log2_p = render_number(-(M.value.bit_length() - 1) * exponent)
    if report.log2_p is None:
        report.log2_p = f"-{exponent}*{_log2_of(M)}"
    return report


def trichotomy_p_lower(k: int, ell: int) -> BoundReport:
    """
    The constant inherited by the monotone trichotomy: runs of l monotone
    values of a k-window function are runs of l-1 equal signs of a
    (k+1)-window function with three values.
    """
    if ell < 2:
        raise InvalidDimensionError("The monotone reduction needs l >= 2", l=ell)
    return p_lower(k + 1, ell - 1, 3)


def theorem3_constants(k: int) -> BoundReport:
    """
    Grid size t_{k-2}(k/sqrt(8)) of the adversarial construction and its
    run-probability bound 9k^2/M. The non-integral argument is evaluated over
    the reals (no rounding); bounds >= 1 are flagged vacuous.
    """
    if k < 3:
        raise InvalidDimensionError(f"The adversarial construction needs k >= 3, got k={k}", k=k)

    with mpmath.workprec(budget("TOWER_PRECISION_BITS")):
        argument = mpmath.mpf(k) / mpmath.sqrt(8)
        M = tower(k - 2, argument)
        numerator = 9 * k * k
        report = BoundReport(k=k, theorem3_M=M)
        if M.materialized:
            bound = mpmath.mpf(numerator) / _to_mpf(M.value)
            report.theorem3_bound = bound
            report.vacuous = bool(bound >= 1)
            report.log2_theorem3_bound = render_number(mpmath.log(bound, 2))
        else:
            report.vacuous = False
            report.log2_theorem3_bound = f"{render_number(mpmath.log(numerator, 2))}-{_log2_of(M)}"
    return report

"""
Distinctness Checker Module

P(3k uniform draws from {1..M} are distinct) = prod_{j<3k} (1 - j/M),
which exceeds 1 - 9k^2/M whenever M >= 3k. Both sides are exact rationals.
"""

from fractions import Fraction
from math import factorial

from lab.checkers.base import BaseChecker, CheckResult
from lab.exceptions import IdentityViolationError, InvalidDimensionError


class DistinctnessChecker(BaseChecker):
    """Exact probability that 3k draws are distinct, against 1 - 9k^2/M."""

    name = "distinctness"

    def check(self, k: int, M: int, **kwargs) -> CheckResult:
        if k < 1 or M < 1:
            raise InvalidDimensionError("Needs k >= 1 and M >= 1", k=k, M=M)
        result = self._create_result()
        draws = 3 * k

        product = Fraction(1)
        for j in range(draws):
            product *= 1 - Fraction(j, M)
        right = 1 - Fraction(9 * k * k, M)
        exact = Fraction(factorial(M), factorial(M - draws) * M ** draws) if M >= draws else Fraction(0)

        result.details.update({
            "k": k,
            "M": M,
            "product": product,
            "product_decimal": float(product),
            "right_side": right,
            "right_side_decimal": float(right),
            "p_all_distinct": exact,
        })

        if product != exact:
            result.fail(
                f"product {product} differs from M!/((M-3k)! M^3k) = {exact}",
                kind=IdentityViolationError.kind,
            )
        if M < draws:
            result.hypothesis_met = False
            result.add_message("info", f"M = {M} < 3k = {draws}: the product is 0 and the inequality is not asserted")
        elif not product > right:
            result.fail(f"product {product} is not above 1 - 9k^2/M = {right}")
        elif result.passed:
            result.add_message("success", f"{float(product):.6f} > {float(right):.6f}")
        return result

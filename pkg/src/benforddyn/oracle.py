"""Exact big-integer ground truth for first-digit statistics.

Leading digits here come from full integer arithmetic -- never from
logarithms -- so these sequences validate every log-domain generator in the
package.  The linearly growing sequences (powers of two, Fibonacci-style
recursions, factorials) are kept in base-1e9 limbs: each term costs one
small-multiplier or addition pass over the limbs and the leading digit is
read off the top limb, avoiding a full decimal conversion per term.

Two-step power recursions x_n = a1*x_{n-1}^b1 + a2*x_{n-2}^b2 blow up
doubly exponentially (the 25th term of the quadratic variant already has
~1.5 million digits), so that kind is computed with GMP integers
(subquadratic multiply and radix conversion) and hard-capped at 25 terms.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

import gmpy2

from .conformance import DigitHistogram

__all__ = [
    "ExactSequenceKind",
    "power_of_two",
    "fibonacci",
    "factorial",
    "linear_recursion_kind",
    "two_step_poly",
    "exact_first_digits",
    "exact_digit_histogram",
    "TWO_STEP_MAX_TERMS",
]

_BASE = 10 ** 9
TWO_STEP_MAX_TERMS = 25

_KINDS = ("power_of_two", "fibonacci", "factorial", "linear_recursion", "two_step_poly")


@dataclass(frozen=True)
class ExactSequenceKind:
    """Tagged description of an exactly computable integer sequence.

    kind == "linear_recursion": x_n = sum coeffs[i] * x_{n-1-i}, seeded by
    ``seeds`` (x_1..x_d), all positive integers.
    kind == "two_step_poly": x_n = coeffs[0]*x_{n-1}**exponents[0]
    + coeffs[1]*x_{n-2}**exponents[1], positive integer data, n <= 25.
    """

    kind: str
    coeffs: Tuple[int, ...] = ()
    seeds: Tuple[int, ...] = ()
    exponents: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown sequence kind {self.kind!r}")
        for name, vals in (("coeffs", self.coeffs), ("seeds", self.seeds), ("exponents", self.exponents)):
            if any(not isinstance(v, int) for v in vals):
                raise ValueError(f"{name} must be integers, got {vals!r}")
        if self.kind == "linear_recursion":
            if not self.coeffs or len(self.seeds) != len(self.coeffs):
                raise ValueError("linear_recursion needs d coefficients and d seeds")
            if any(v < 1 for v in self.coeffs + self.seeds):
                raise ValueError("linear_recursion coefficients and seeds must be positive")
        if self.kind == "two_step_poly":
            if len(self.coeffs) != 2 or len(self.seeds) != 2 or len(self.exponents) != 2:
                raise ValueError("two_step_poly needs 2 coefficients, 2 seeds, 2 exponents")
            if any(v < 1 for v in self.coeffs + self.seeds + self.exponents):
                raise ValueError("two_step_poly data must be positive integers")


def power_of_two() -> ExactSequenceKind:
    return ExactSequenceKind("power_of_two")


def fibonacci(seeds: Tuple[int, int] = (1, 1)) -> ExactSequenceKind:
    return ExactSequenceKind("fibonacci", coeffs=(1, 1), seeds=tuple(seeds))


def factorial() -> ExactSequenceKind:
    return ExactSequenceKind("factorial")


def linear_recursion_kind(coeffs, seeds) -> ExactSequenceKind:
    return ExactSequenceKind("linear_recursion", coeffs=tuple(coeffs), seeds=tuple(seeds))


def two_step_poly(a1: int, a2: int, b1: int, b2: int, seeds: Tuple[int, int] = (1, 1)) -> ExactSequenceKind:
    return ExactSequenceKind(
        "two_step_poly", coeffs=(a1, a2), seeds=tuple(seeds), exponents=(b1, b2)
    )


# ---------------------------------------------------------------------------
# base-1e9 limb arithmetic (little-endian limb lists)


def _limbs_from_int(v: int) -> List[int]:
    if v < 0:
        raise ValueError("limb representation is unsigned")
    limbs = []
    while True:
        limbs.append(v % _BASE)
        v //= _BASE
        if v == 0:
            return limbs


def _mul_small(limbs: List[int], k: int) -> None:
    carry = 0
    for i in range(len(limbs)):
        acc = limbs[i] * k + carry
        carry = acc // _BASE
        limbs[i] = acc - carry * _BASE
    while carry:
        limbs.append(carry % _BASE)
        carry //= _BASE


def _add_scaled(dst: List[int], src: List[int], k: int) -> None:
    """dst += k * src."""
    if len(dst) < len(src):
        dst.extend([0] * (len(src) - len(dst)))
    carry = 0
    for i in range(len(src)):
        acc = dst[i] + src[i] * k + carry
        carry = acc // _BASE
        dst[i] = acc - carry * _BASE
    i = len(src)
    while carry:
        if i == len(dst):
            dst.append(0)
        acc = dst[i] + carry
        carry = acc // _BASE
        dst[i] = acc - carry * _BASE
        i += 1


def _leading_digit(limbs: List[int]) -> int:
    top = limbs[-1]
    while top >= 10:
        top //= 10
    return top


def _digits_power_of_two(n: int) -> List[int]:
    x = [1]
    out = []
    for _ in range(n):
        _mul_small(x, 2)
        out.append(_leading_digit(x))
    return out


def _digits_factorial(n: int) -> List[int]:
    x = [1]
    out = []
    for k in range(1, n + 1):
        _mul_small(x, k)
        out.append(_leading_digit(x))
    return out


def _digits_linear_recursion(coeffs, seeds, n: int) -> List[int]:
    state = [_limbs_from_int(s) for s in seeds]  # x_{m-d} .. x_{m-1}
    out = [_leading_digit(s) for s in state[:n]]
    for _ in range(len(out), n):
        acc: List[int] = [0]
        for c, limbs in zip(coeffs, reversed(state)):
            _add_scaled(acc, limbs, c)
        out.append(_leading_digit(acc))
        state.pop(0)
        state.append(acc)
    return out


def _digits_two_step_poly(coeffs, exponents, seeds, n: int) -> List[int]:
    a1, a2 = (gmpy2.mpz(c) for c in coeffs)
    b1, b2 = exponents
    xs = [gmpy2.mpz(seeds[0]), gmpy2.mpz(seeds[1])]
    while len(xs) < n:
        xs.append(a1 * xs[-1] ** b1 + a2 * xs[-2] ** b2)
    return [int(gmpy2.digits(x, 10)[0]) for x in xs[:n]]


def exact_first_digits(kind: ExactSequenceKind, n: int) -> List[int]:
    """Leading decimal digits of the first n terms, from exact integers.

    Raises for two_step_poly beyond 25 terms: the doubly-exponential blowup
    makes longer exact runs a resource hazard rather than a computation.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if kind.kind == "power_of_two":
        return _digits_power_of_two(n)
    if kind.kind == "factorial":
        return _digits_factorial(n)
    if kind.kind == "fibonacci" or kind.kind == "linear_recursion":
        return _digits_linear_recursion(kind.coeffs, kind.seeds, n)
    if kind.kind == "two_step_poly":
        if n > TWO_STEP_MAX_TERMS:
            raise ValueError(
                f"two_step_poly is limited to {TWO_STEP_MAX_TERMS} exact terms "
                f"(term sizes double each step; requested {n}); use the "
                "log-domain orbit generator for longer runs"
            )
        return _digits_two_step_poly(kind.coeffs, kind.exponents, kind.seeds, n)
    raise AssertionError(f"unhandled kind {kind.kind!r}")


def exact_digit_histogram(kind: ExactSequenceKind, n: int) -> DigitHistogram:
    return DigitHistogram.from_digits(exact_first_digits(kind, n))

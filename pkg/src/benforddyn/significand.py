"""Significand and first-digit arithmetic in the base-10 log domain.

Every sequence handled by this package is represented as a stream of
:class:`SignedLogValue` elements: a sign together with the base-10 logarithm
of the magnitude.  Orbits of interest routinely grow doubly exponentially,
so the *fractional* part of the logarithm -- the only thing digit and
significand statistics consume -- is carried as a separate field that
generators fill in at whatever precision they internally maintain.  For a
value converted from an ordinary float the two fields are redundant
(``log_frac == log_mag % 1``); for a value whose logarithm is ``1e250`` the
magnitude field merely records scale while ``log_frac`` still holds the
significand exactly.

The module-level functions :func:`significand` and :func:`first_digit`
operate on native reals and are exact: first digits are read from the
decimal expansion of the float (via :class:`decimal.Decimal`, which converts
binary floats losslessly), never inferred from rounded logarithms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal
from typing import Iterable, List

__all__ = [
    "SignedLogValue",
    "significand",
    "first_digit",
    "log_significand",
    "values_from_reals",
]

# Saturation bound for the float magnitude field of generated sequences.
# Generators whose log-magnitude exceeds this keep the fractional part exact
# and clamp the magnitude, so downstream CSV/JSON stay finite.
LOG_MAG_CAP = 1e300

# frac(log10|x|) closer than this to an integer triggers the exact
# power-of-ten check before the significand is formed.
_POW10_SNAP = 1e-15


def _exact_first_digit_of_float(ax: float) -> int:
    # Decimal(float) is lossless, and its digit tuple starts at the most
    # significant nonzero digit.
    return Decimal(ax).as_tuple().digits[0]


def _is_exact_power_of_ten(ax: float) -> bool:
    digits = Decimal(ax).as_tuple().digits
    return digits[0] == 1 and all(d == 0 for d in digits[1:])


def significand(x: float) -> float:
    """Return S(x): the unique t in [1, 10) with |x| = 10^k * t, or 0 for x = 0.

    Extraction goes through the log domain (``10 ** (log10|x| % 1)``) so the
    same code path serves native reals and log-represented values; results
    that land within one float step of a digit boundary are snapped using an
    exact decimal comparison so that ``floor(significand(x))`` always equals
    :func:`first_digit`.
    """
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"significand requires a finite real, got {x!r}")
    if x == 0.0:
        return 0.0
    ax = abs(x)
    f = math.log10(ax) % 1.0
    if (f < _POW10_SNAP or f > 1.0 - _POW10_SNAP) and _is_exact_power_of_ten(ax):
        return 1.0
    s = 10.0 ** f
    if s >= 10.0:
        s = math.nextafter(10.0, 1.0)
    d_exact = _exact_first_digit_of_float(ax)
    if int(s) != d_exact:
        # Log-domain roundoff put s on the wrong side of a digit boundary
        # (possibly wrapping a whole decade, e.g. floats just below a power
        # of ten whose log10 rounds to the integer); fall back to the exact
        # decimal significand, rounded to the nearest double that still sits
        # on the correct side of the boundary.
        dec = Decimal(ax)
        s = float(dec.scaleb(-dec.adjusted()))
        while int(s) != d_exact or s >= 10.0:
            s = math.nextafter(s, 1.0)
    return s


def first_digit(x: float) -> int:
    """Leading decimal digit of x in {1..9}, or 0 for x = 0.  Sign is ignored."""
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"first_digit requires a finite real, got {x!r}")
    if x == 0.0:
        return 0
    return _exact_first_digit_of_float(abs(x))


@dataclass(frozen=True)
class SignedLogValue:
    """A real number stored as sign plus base-10 log of magnitude.

    ``sign`` is -1, 0 or +1; ``sign == 0`` represents exactly the real number
    zero and both log fields are forced to 0.  ``log_frac`` is the fractional
    part of the logarithm in [0, 1), i.e. the log-significand; when omitted it
    is derived from ``log_mag``.  Generators that track the logarithm at
    extended precision pass both fields explicitly so that the significand
    survives magnifications under which a double (or any fixed-width float)
    would have lost the fractional bits.
    """

    sign: int
    log_mag: float = 0.0
    log_frac: float | None = None

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or +1, got {self.sign!r}")
        if self.sign == 0:
            object.__setattr__(self, "log_mag", 0.0)
            object.__setattr__(self, "log_frac", 0.0)
            return
        if not math.isfinite(self.log_mag):
            raise ValueError(f"log_mag must be finite, got {self.log_mag!r}")
        if self.log_frac is None:
            object.__setattr__(self, "log_frac", self.log_mag % 1.0)
        else:
            f = float(self.log_frac)
            if f >= 1.0 or f < 0.0:
                f %= 1.0
            object.__setattr__(self, "log_frac", f)

    @classmethod
    def from_real(cls, x: float) -> "SignedLogValue":
        x = float(x)
        if not math.isfinite(x):
            raise ValueError(f"cannot represent non-finite value {x!r}")
        if x == 0.0:
            return cls(0)
        return cls(1 if x > 0 else -1, math.log10(abs(x)))

    @property
    def is_zero(self) -> bool:
        return self.sign == 0

    def to_real(self) -> float:
        """Round-trip back to a float; overflows to +-inf beyond float range."""
        if self.sign == 0:
            return 0.0
        try:
            mag = 10.0 ** self.log_mag
        except OverflowError:
            mag = math.inf
        return self.sign * mag

    def significand(self) -> float:
        if self.sign == 0:
            return 0.0
        s = 10.0 ** self.log_frac
        return s if s < 10.0 else math.nextafter(10.0, 1.0)

    def first_digit(self) -> int:
        if self.sign == 0:
            return 0
        s = self.significand()
        # snap significands within a few ulp of an integer: frac(log10 8)
        # round-trips to 7.999999999999998, which must still read as 8
        r = round(s)
        if 1 <= r <= 10 and abs(s - r) < 4e-12 * s:
            return 1 if r == 10 else r
        return min(9, int(s))

    def scaled(self, a: float) -> "SignedLogValue":
        """The value multiplied by a nonzero real a (log-domain shift)."""
        a = float(a)
        if a == 0.0 or not math.isfinite(a):
            raise ValueError("scale factor must be finite and nonzero")
        if self.sign == 0:
            return self
        la = math.log10(abs(a))
        sign = self.sign * (1 if a > 0 else -1)
        return SignedLogValue(sign, self.log_mag + la, (self.log_frac + la) % 1.0)

    def negated(self) -> "SignedLogValue":
        if self.sign == 0:
            return self
        return SignedLogValue(-self.sign, self.log_mag, self.log_frac)


def log_significand(v: SignedLogValue) -> float:
    """Fractional part of log10|v| in [0, 1); equals log10(significand)."""
    if v.sign == 0:
        raise ValueError("log_significand is undefined for the zero value")
    return v.log_frac


def values_from_reals(xs: Iterable[float]) -> List[SignedLogValue]:
    return [SignedLogValue.from_real(x) for x in xs]

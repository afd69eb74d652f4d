"""Shared log-domain numerics.

Three kinds of helper live here:

* stable float-level primitives (``logaddexp10``, fractional parts);
* extended-precision accumulation in 80-bit ``numpy.longdouble`` for
  sequences whose log grows linearly (products, matrix powers, contractions),
  where a plain double would lose ~4 fractional digits over 1e4 steps;
* mpmath-based working precision for sequences whose log grows
  *geometrically* (quadratic maps, two-step recursions, Newton tails), where
  the fractional part of the logarithm at step N requires on the order of
  ``N * log2(rate)`` bits of the early terms.

The mpmath global context is adjusted only inside ``mp.workprec`` blocks.
"""

from __future__ import annotations

import math

import numpy as np
from mpmath import mp, mpf

from .significand import LOG_MAG_CAP, SignedLogValue

__all__ = [
    "logaddexp10",
    "frac_part",
    "required_bits",
    "mp_frac",
    "slv_from_log10",
    "slv_from_mpf",
    "linear_log_fracs",
]


def logaddexp10(u: float, v: float) -> float:
    """log10(10^u + 10^v) without overflow; tolerates -inf for absent terms."""
    if u == -math.inf:
        return v
    if v == -math.inf:
        return u
    m = u if u >= v else v
    d = abs(u - v)
    if d > 330.0:  # smaller term below double underflow
        return m
    return m + math.log10(1.0 + 10.0 ** (-d))


def frac_part(y: float) -> float:
    f = y % 1.0
    return f if f < 1.0 else 0.0


def required_bits(n_steps: int, rate: float) -> int:
    """Working precision so frac(y_N) keeps >= ~60 good bits when the
    log-magnitude is amplified by ``rate`` per step for ``n_steps`` steps."""
    growth = max(float(rate), 1.0)
    return max(96, int(math.ceil(n_steps * math.log2(growth))) + 160)


def mp_frac(y) -> mpf:
    return y - mp.floor(y)


def _clamp_mag(y: float) -> float:
    if y > LOG_MAG_CAP:
        return LOG_MAG_CAP
    if y < -LOG_MAG_CAP:
        return -LOG_MAG_CAP
    return y


def slv_from_log10(sign: int, log_mag: float, log_frac: float | None = None) -> SignedLogValue:
    return SignedLogValue(sign, _clamp_mag(float(log_mag)), log_frac)


def slv_from_mpf(sign: int, y) -> SignedLogValue:
    """Build a SignedLogValue from an mpmath log10 value, preserving the
    fractional part at float accuracy even when the magnitude saturates."""
    f = float(mp_frac(y))
    if f >= 1.0 or f < 0.0:
        f %= 1.0
    return SignedLogValue(sign, _clamp_mag(float(y)), f)


def linear_log_fracs(y0, step, count: int):
    """frac(y0 + k*step) for k = 1..count, accumulated in longdouble.

    Used for the asymptotic tails of linearly growing logs: the 64-bit
    mantissa keeps the absolute error below ~1e-14 after 1e4 steps even for
    |y| of a few thousand.
    """
    k = np.arange(1, count + 1, dtype=np.longdouble)
    y = np.longdouble(y0) + k * np.longdouble(step)
    return (y % np.longdouble(1.0)).astype(float), y.astype(float)

"""The nonlinear two-step recursion x_n = a1 x_{n-1}^b1 + a2 x_{n-2}^b2.

For positive coefficients and exponents b1, b2 > 1 the positive quadrant
splits into exactly three dynamical pieces: an open, bounded, convex basin
A0 of the origin (orbits -> 0), its complement basin AInfty (orbits -> oo),
and their smooth common boundary, on which orbits are asymptotically
2-periodic.  Which of the two power terms dominates the log-domain dynamics
is governed by the sign of b1^2 - b2:

  Case I   (b1^2 > b2): the one-step term wins; with a1 normalized to 1 the
           log orbit satisfies y_n = b1 y_{n-1} + log10(1 + a2 10^(d_{n-1}))
           where d_n = b2 y_{n-1} - b1 y_n -> -oo doubly exponentially, and
           y_n shadows b1^(n-2) h(y) for an explicitly summable constant h.
  Case II  (b1^2 = b2): the ratio r_n = x_n / x_{n-1}^b1 obeys the scalar
           map R(r) = 1 + a2 r^(-b1) and converges to its unique positive
           fixed point.
  Case III (b1^2 < b2): the two-step term wins; with a2 normalized to 1 the
           even-indexed log orbit shadows b2^(n-1) h(y), where the odd gap
           subsequence (d_{2n-1}) converges in R u {+oo} and each finite
           limit is a fixed point of the strictly convex scalar map
           R0(r) = b2 log10(a1 + 10^r).

All orbit generation happens in the log domain with a stable two-term
log-sum-exp and working precision sized to the growth rate, so fractional
parts (the Benford-relevant information) stay exact out to 1e4+ terms even
though the underlying integers would have millions of digits.

An extended mode admits an exponent <= 1 for orbit generation and basin
scans only; the shadowing and case machinery refuses such parameters.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

import numpy as np
from mpmath import mp

from .conformance import (
    ConformanceThresholds,
    DEFAULT_THRESHOLDS,
    _report_from_fracs,
)
from .logdomain import logaddexp10, required_bits, slv_from_mpf, slv_from_log10
from .significand import SignedLogValue

__all__ = [
    "Case",
    "BasinKind",
    "TwoStepParams",
    "BasinLabel",
    "DeltaSequence",
    "ShadowResult",
    "CaseIIOrbit",
    "BenfordFractionResult",
    "classify_case",
    "orbit_log",
    "classify_basin",
    "boundary_on_ray",
    "cycle2_limit",
    "shadow_limit",
    "shadow_h_case_one",
    "shadow_h_case_three",
    "r0_fixed_points",
    "case2_ratio_orbit",
    "benford_fraction",
    "delta_sequence",
    "delta_limits",
]


class Case(enum.Enum):
    I = "I"
    II = "II"
    III = "III"


class BasinKind(enum.Enum):
    A0 = "A0"
    A_INFTY = "AInfty"
    BOUNDARY_UNDECIDED = "BoundaryUndecided"


def _to_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v)
    return Fraction(float(v))  # exact binary value of the float


@dataclass(frozen=True)
class TwoStepParams:
    """Parameters (a1, a2, b1, b2) of x_n = a1 x_{n-1}^b1 + a2 x_{n-2}^b2.

    a1 > 0; a2 >= 0 (zero collapses the recursion to its one-step part,
    useful as a degenerate edge; basin structure needs a2 > 0).  In standard
    mode b1, b2 > 1.  Extended mode (any b in (0, 1]) supports orbit
    generation and basin scans only.

    Exponents may be given as int, float, str or Fraction; the case label
    compares b1^2 with b2 in exact rational arithmetic of the values as
    entered, so literals like "1.2" mean 6/5 rather than the nearest double.
    """

    a1: float
    a2: float
    b1: float
    b2: float
    b1_exact: Fraction = field(repr=False, default=None)  # type: ignore[assignment]
    b2_exact: Fraction = field(repr=False, default=None)  # type: ignore[assignment]

    def __post_init__(self):
        b1x = _to_fraction(self.b1 if self.b1_exact is None else self.b1_exact)
        b2x = _to_fraction(self.b2 if self.b2_exact is None else self.b2_exact)
        object.__setattr__(self, "b1", float(b1x))
        object.__setattr__(self, "b2", float(b2x))
        object.__setattr__(self, "b1_exact", b1x)
        object.__setattr__(self, "b2_exact", b2x)
        object.__setattr__(self, "a1", float(self.a1))
        object.__setattr__(self, "a2", float(self.a2))
        if not (self.a1 > 0 and math.isfinite(self.a1)):
            raise ValueError("a1 must be a positive real")
        if not (self.a2 >= 0 and math.isfinite(self.a2)):
            raise ValueError("a2 must be a non-negative real")
        if self.b1 <= 0 or self.b2 <= 0:
            raise ValueError("exponents must be positive")

    @property
    def extended(self) -> bool:
        return self.b1 <= 1 or self.b2 <= 1

    @property
    def case(self) -> Case:
        return classify_case(self)

    def growth_rate(self) -> float:
        return max(self.b1, math.sqrt(self.b2), 1.0)

    def _require_standard(self, what: str) -> None:
        if self.extended:
            raise ValueError(f"{what} requires b1 > 1 and b2 > 1 (not extended mode)")

    def _require_two_terms(self, what: str) -> None:
        if self.a2 == 0:
            raise ValueError(f"{what} requires a2 > 0")


def classify_case(p: TwoStepParams) -> Case:
    """Sign of b1^2 - b2 decides the dominant term; compared exactly on the
    rationals as entered."""
    p._require_standard("case classification")
    diff = p.b1_exact * p.b1_exact - p.b2_exact
    if diff > 0:
        return Case.I
    if diff == 0:
        return Case.II
    return Case.III


# ---------------------------------------------------------------------------
# orbit generation


def _log_params(p: TwoStepParams) -> Tuple[float, float]:
    la1 = math.log10(p.a1)
    la2 = math.log10(p.a2) if p.a2 > 0 else -math.inf
    return la1, la2


def _orbit_float(p: TwoStepParams, y1: float, y2: float, count: int):
    """Plain-double log orbit (y_3 .. y_{count+2}); returns (values,
    escape_index) where escape_index is the first position with |y| > 20,
    or None if the orbit stayed in the band."""
    la1, la2 = _log_params(p)
    b1, b2 = p.b1, p.b2
    yp, y = y1, y2
    out = []
    escape = None
    for i in range(count):
        yn = logaddexp10(la1 + b1 * y, la2 + b2 * yp)
        out.append(yn)
        yp, y = y, yn
        if escape is None and abs(yn) > 20.0:
            escape = i
        if abs(yn) > 1e300:
            # continue exactly on the dominant linear recursion
            return out + _float_tail(p, yp, y, count - i - 1), escape
    return out, escape


def _float_tail(p, yp, y, count):
    # dominant-term recursion, saturated at the +-1e300 log cap so the
    # cheap path never overflows (fractional parts out here are only
    # meaningful via the high-precision path anyway)
    la1, la2 = _log_params(p)
    cap = 1e300
    out = []
    for _ in range(count):
        u = la1 + p.b1 * y
        v = la2 + p.b2 * yp
        yn = u if u >= v else v
        yn = cap if yn > cap else (-cap if yn < -cap else yn)
        out.append(yn)
        yp, y = y, yn
    return out


def _orbit_mp(p: TwoStepParams, y1_in, y2_in, count: int, bits: int):
    """Full-precision log orbit: returns mpf list [y_1 .. y_{count+2}].

    Inputs may be floats or exact strings/Fractions understood by mpf.
    The two-term log-sum-exp evaluates its transcendental correction only
    while the correction exceeds the precision still needed by the
    remaining amplification, which makes the doubly-exponential regimes
    nearly free after the transient.
    """
    b1, b2 = p.b1, p.b2
    log2_rate = math.log2(p.growth_rate())
    with mp.workprec(bits):
        la1 = mp.log10(mp.mpf(p.a1))
        la2 = mp.log10(mp.mpf(p.a2)) if p.a2 > 0 else mp.mpf("-inf")
        ys = [mp.mpf(y1_in), mp.mpf(y2_in)]
        for step in range(count):
            u = la1 + b1 * ys[-1]
            v = la2 + b2 * ys[-2]
            if v == mp.mpf("-inf"):
                ys.append(u)
                continue
            m, d = (u, v - u) if u >= v else (v, u - v)
            # amplification left after this step, in log10 units
            needed = -((count - step) * log2_rate + 64.0) * math.log10(2.0)
            if float(d) > needed:
                m = m + mp.log10(1 + mp.power(10, d))
            ys.append(m)
        return ys


def _seed_logs_float(x1: float, x2: float) -> Tuple[float, float]:
    if not (x1 > 0 and x2 > 0):
        raise ValueError("seeds must be positive")
    return math.log10(x1), math.log10(x2)


def orbit_log(
    p: TwoStepParams,
    x1: float,
    x2: float,
    n: int,
    precision: str = "auto",
) -> List[SignedLogValue]:
    """The n generated terms (x_3, ..., x_{n+2}) in the log domain.

    precision: "auto" iterates in doubles and reruns at full working
    precision only if the orbit escapes the |log10 x| <= 20 band (a bounded
    orbit's fractional parts are already exact in doubles); "float" and
    "high" force the respective paths.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if precision not in ("auto", "float", "high"):
        raise ValueError("precision must be auto, float or high")
    y1, y2 = _seed_logs_float(float(x1), float(x2))
    if precision != "high":
        ys, escape = _orbit_float(p, y1, y2, n)
        if precision == "float" or escape is None:
            return [slv_from_log10(1, y) for y in ys]
    bits = required_bits(n, p.growth_rate())
    with mp.workprec(bits):
        ys_mp = _orbit_mp(p, mp.log10(mp.mpf(float(x1))),
                          mp.log10(mp.mpf(float(x2))), n, bits)
        return [slv_from_mpf(1, y) for y in ys_mp[2:]]


def _orbit_fracs(p: TwoStepParams, x1: float, x2: float, n: int) -> np.ndarray:
    """frac(log10 x_k) for the n generated terms; auto precision."""
    y1, y2 = _seed_logs_float(float(x1), float(x2))
    ys, escape = _orbit_float(p, y1, y2, n)
    if escape is None:
        return np.asarray(ys) % 1.0
    bits = required_bits(n, p.growth_rate())
    with mp.workprec(bits):
        ys_mp = _orbit_mp(p, mp.log10(mp.mpf(float(x1))),
                          mp.log10(mp.mpf(float(x2))), n, bits)
        return np.asarray(
            [float(y - mp.floor(y)) for y in ys_mp[2:]], dtype=float
        ) % 1.0


# ---------------------------------------------------------------------------
# basin structure


@dataclass(frozen=True)
class BasinLabel:
    """Classification of one seed pair: A0, AInfty, or undecided (the
    plateau behaviour of boundary points)."""

    label: BasinKind
    iterations_used: int
    final_log_mag: float


_ESCAPE_Y = 10.0


def classify_basin(
    p: TwoStepParams, x1: float, x2: float, max_iter: int = 10_000
) -> BasinLabel:
    """Iterate in doubles until the log-magnitude clears +-10 twice in a row.

    Two consecutive clearances make the escape irreversible (the dominant
    power term only reinforces it), which guards against transient dips of
    near-boundary orbits.  Seeds that never clear within max_iter are
    labelled BoundaryUndecided, never silently binned.
    """
    p._require_two_terms("basin classification")
    la1, la2 = _log_params(p)
    b1, b2 = p.b1, p.b2
    yp, y = _seed_logs_float(float(x1), float(x2))
    hi = lo = 0
    for i in range(1, max_iter + 1):
        yn = logaddexp10(la1 + b1 * y, la2 + b2 * yp)
        yp, y = y, yn
        if yn > _ESCAPE_Y:
            hi, lo = hi + 1, 0
            if hi >= 2:
                return BasinLabel(BasinKind.A_INFTY, i, yn)
        elif yn < -_ESCAPE_Y:
            lo, hi = lo + 1, 0
            if lo >= 2:
                return BasinLabel(BasinKind.A0, i, yn)
        else:
            hi = lo = 0
        if abs(yn) > 1e300:
            kind = BasinKind.A_INFTY if yn > 0 else BasinKind.A0
            return BasinLabel(kind, i, yn)
    return BasinLabel(BasinKind.BOUNDARY_UNDECIDED, max_iter, y)


def boundary_on_ray(
    p: TwoStepParams,
    direction: Tuple[float, float],
    tol: float = 1e-12,
    r_max: float = 1e6,
    max_iter: int = 10_000,
) -> float:
    """Radius r* where the ray r * (u, v) crosses the basin boundary.

    Valid because the origin's basin is an open bounded convex neighbourhood
    of 0, so a strictly positive ray crosses its boundary exactly once;
    bisection narrows [inside, escaping] to width tol.  In extended mode
    "inside" means "did not escape to infinity" (the bounded attractor need
    not be 0 there).
    """
    p._require_two_terms("boundary location")
    u, v = float(direction[0]), float(direction[1])
    if not (u > 0 and v > 0):
        raise ValueError("direction must be strictly positive in both coordinates")
    if tol < 1e-15:
        raise ValueError("tol below float resolution")
    norm = math.hypot(u, v)
    u, v = u / norm, v / norm

    def escapes(r: float) -> bool:
        lbl = classify_basin(p, r * u, r * v, max_iter=max_iter)
        return lbl.label is BasinKind.A_INFTY

    lo = tol
    if escapes(lo):
        raise ValueError(f"no bracket: ray already escapes at r = {lo}")
    hi = 1.0
    while not escapes(hi):
        hi *= 2.0
        if hi > r_max:
            raise ValueError(f"no bracket: ray does not escape below r_max = {r_max}")
    lo = hi / 2.0 if hi > 1.0 else lo
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if escapes(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _apply_map(p: TwoStepParams, u: float, v: float) -> Tuple[float, float]:
    # (x_{n-1}, x_n) -> (x_n, x_{n+1})
    return v, p.a1 * v ** p.b1 + p.a2 * u ** p.b2


def cycle2_limit(
    p: TwoStepParams,
    x1: float,
    x2: float,
    tol: float = 1e-11,
    max_epochs: int = 120,
) -> Tuple[float, float]:
    """Limits (p_odd, q_even) of the odd/even subsequences of a boundary
    orbit, found by iterating with periodic re-projection onto the boundary.

    The boundary is transversally repelling, so a finite-precision orbit
    drifts off it; every epoch the current pair is re-projected along its
    own ray (fresh bisection), which suppresses the drift while the
    along-boundary contraction pulls the pair into the 2-cycle.  The result
    satisfies the exchange identity T(p, q) = (q, p) to 1e-8 or the call
    fails.
    """
    p._require_standard("2-cycle limits")
    p._require_two_terms("2-cycle limits")
    if not (x1 > 0 and x2 > 0):
        raise ValueError("seeds must be positive")
    pair = (float(x1), float(x2))
    index_of_second = 2  # pair = (x_{i-1}, x_i)
    prev_snapshot = None
    for _ in range(max_epochs):
        norm = math.hypot(*pair)
        direction = (pair[0] / norm, pair[1] / norm)
        r = boundary_on_ray(p, direction, tol=1e-14)
        pair = (r * direction[0], r * direction[1])
        for _ in range(12):  # 12 double-steps per epoch
            for _ in range(2):
                pair = _apply_map(p, *pair)
                index_of_second += 1
            if not (1e-12 < pair[1] < 1e12):
                break
        if index_of_second % 2 == 0:
            snapshot = (pair[0], pair[1])  # (odd-index value, even-index value)
        else:
            snapshot = (pair[1], pair[0])
        if prev_snapshot is not None:
            if max(
                abs(snapshot[0] - prev_snapshot[0]),
                abs(snapshot[1] - prev_snapshot[1]),
            ) < tol:
                break
        prev_snapshot = snapshot
    else:
        raise RuntimeError("2-cycle iteration did not settle within max_epochs")
    p_odd, q_even = snapshot
    _, q_image = _apply_map(p, p_odd, q_even)
    if abs(q_image - p_odd) > 1e-8:
        raise RuntimeError(
            f"projected limit violates the exchange identity: |T2 - p| = "
            f"{abs(q_image - p_odd):.3e}"
        )
    return p_odd, q_even


# ---------------------------------------------------------------------------
# shadowing


@dataclass(frozen=True)
class DeltaSequence:
    """Dominance gaps d_n = b2 y_{n-1} - b1 y_n for n = 2..len(ys); the sign
    of d_n says which power term controls step n."""

    values: Tuple[float, ...]


def delta_sequence(p: TwoStepParams, ys: Sequence[float]) -> DeltaSequence:
    vals = tuple(
        p.b2 * ys[i - 1] - p.b1 * ys[i] for i in range(1, len(ys))
    )
    return DeltaSequence(vals)


def delta_limits(
    p: TwoStepParams,
    x1: float,
    x2: float,
    max_pairs: int = 200,
    tol: float = 1e-9,
    divergence: float = 100.0,
) -> Tuple[float, float]:
    """Limits of the odd and even dominance-gap subsequences, as floats or
    +inf (case III escaping orbits; each finite limit is an R0 fixed point).

    The gaps are differences of two log-magnitudes that grow geometrically,
    so they are evaluated on the working-precision orbit; doubles would
    cancel to noise after ~50 terms.
    """
    p._require_standard("dominance-gap limits")
    p._require_two_terms("dominance-gap limits")
    count = 2 * max_pairs + 2
    bits = required_bits(count, p.growth_rate())
    with mp.workprec(bits):
        ys = _orbit_mp(
            p,
            mp.log10(mp.mpf(float(x1))),
            mp.log10(mp.mpf(float(x2))),
            count,
            bits,
        )

        def limit(first_pos: int) -> float:
            # gap d_{m+1} = b2 y_m - b1 y_{m+1} read from list positions
            # (m-1, m); stepping by 2 walks one parity class
            prev = None
            for m in range(first_pos, len(ys) - 1, 2):
                d = float(p.b2 * ys[m - 1] - p.b1 * ys[m])
                if d > divergence and prev is not None and d > prev:
                    return math.inf
                if prev is not None and abs(d - prev) < tol:
                    return d
                prev = d
            raise RuntimeError(
                "gap subsequence neither settled nor diverged within the window"
            )

        # odd gaps d_3, d_5, ... start at positions (1, 2); even d_2, d_4, ...
        # at (0, 1), i.e. first_pos 2 and 1 respectively in the m-indexing
        return limit(2), limit(1)


@dataclass(frozen=True)
class ShadowResult:
    y_hat: float
    residuals: Tuple[float, ...]


def shadow_limit(b: float, y_seq: Sequence[float]) -> ShadowResult:
    """The unique y with sup_n |y_n - b^n y| finite, for a window with
    bounded increments y_n - b y_{n-1}:

        y_hat = y_1/b + sum_{k>=2} (y_k - b y_{k-1}) / b^k,

    truncated once the geometric tail bound (sup increment) * b^-K / (b-1)
    drops below 1e-15 (or the window ends).  Residuals y_n - b^n y_hat are
    reported for the whole window; note the truncation error in y_hat is
    amplified by b^n, so residuals near the window end carry it visibly.
    If the increments converge to c, the residuals approach -c/(b-1).
    """
    b = float(b)
    if b <= 1:
        raise ValueError("shadowing base must satisfy b > 1")
    ys = [float(v) for v in y_seq]
    if len(ys) < 2:
        raise ValueError("need at least two terms")
    increments = [ys[k] - b * ys[k - 1] for k in range(1, len(ys))]
    sup_inc = max(abs(i) for i in increments)
    if len(increments) >= 8:
        quarter = max(2, len(increments) // 4)
        recent = [abs(i) for i in increments[-quarter:]]
        if (
            all(x < y for x, y in zip(recent, recent[1:]))
            and recent[-1] > 4.0 * (recent[0] + 1e-300)
            and recent[-1] > 1e3 * (1.0 + abs(ys[0]))
        ):
            raise ValueError("increments grow without bound over the window")
    y_hat = ys[0] / b
    k_stop = len(ys)
    scale = b
    for k in range(2, len(ys) + 1):
        scale *= b
        y_hat += increments[k - 2] / scale
        if sup_inc / (scale * (b - 1.0) / b) < 1e-15:
            k_stop = k
            break
    residuals = tuple(ys[i] - b ** (i + 1) * y_hat for i in range(min(k_stop, len(ys))))
    return ShadowResult(y_hat=y_hat, residuals=residuals)


def _rescale_shift(a: float, b: float) -> float:
    """log10 of the factor a_coef^(-1/(b-1)) that normalizes the coefficient
    of the x^b term to 1 after replacing x_n by a x_n."""
    return -math.log10(a) / (b - 1.0)


def _case1_normalized(p: TwoStepParams) -> Tuple[TwoStepParams, float]:
    shift = _rescale_shift(p.a1, p.b1)
    a2 = p.a2 * 10.0 ** (shift * (p.b2 - 1.0))
    q = TwoStepParams(a1=1.0, a2=a2, b1=p.b1, b2=p.b2,
                      b1_exact=p.b1_exact, b2_exact=p.b2_exact)
    return q, shift


def _case3_normalized(p: TwoStepParams) -> Tuple[TwoStepParams, float]:
    shift = _rescale_shift(p.a2, p.b2)
    a1 = p.a1 * 10.0 ** (shift * (p.b1 - 1.0))
    q = TwoStepParams(a1=a1, a2=1.0, b1=p.b1, b2=p.b2,
                      b1_exact=p.b1_exact, b2_exact=p.b2_exact)
    return q, shift


_SHADOW_TAIL = 1e-14
_SHADOW_MAX_TERMS = 4096


def shadow_h_case_one(
    p: TwoStepParams, y1: float, y2: float, max_terms: int = _SHADOW_MAX_TERMS
) -> float:
    """Case I shadow constant: h = y2 + sum_{k>=1} b1^-k log10(1 + a2 10^(d_{k+1})),
    where y_n - b1^(n-2) h -> 0 along the orbit from (10^y1, 10^y2).

    Requires case I parameters with the pair in the escaping basin.  For
    a1 != 1 the recursion is first rescaled to a1 = 1 (the shift
    -log10(a1)/(b1-1) applied to both logs); h then shadows the rescaled
    orbit.  The series is truncated on a certified geometric tail bound:
    the gaps d_k decrease monotonically out here, so the remainder is at
    most (last term) / (b1 - 1) after factoring b1^-K.
    """
    p._require_standard("case I shadowing")
    p._require_two_terms("case I shadowing")
    if classify_case(p) is not Case.I:
        raise ValueError("shadow_h_case_one needs case I parameters (b1^2 > b2)")
    q, shift = _case1_normalized(p)
    z1, z2 = float(y1) + shift, float(y2) + shift
    label = classify_basin(q, 10.0 ** z1, 10.0 ** z2)
    if label.label is not BasinKind.A_INFTY:
        raise ValueError(
            f"seed pair is not in the escaping basin (classified {label.label.value})"
        )
    prec = 240
    with mp.workprec(prec):
        b1 = mp.mpf(q.b1)
        la2 = mp.log10(mp.mpf(q.a2))
        ys = [mp.mpf(z1), mp.mpf(z2)]
        h = ys[1]
        scale = mp.mpf(1)
        prev_term = None
        for k in range(1, max_terms + 1):
            # extend orbit to y_{k+2}; d_{k+1} = b2 y_k - b1 y_{k+1}
            while len(ys) < k + 2:
                u = b1 * ys[-1]
                v = la2 + q.b2 * ys[-2]
                m, d = (u, v - u) if u >= v else (v, u - v)
                ys.append(m + mp.log10(1 + mp.power(10, d)))
            d_k1 = q.b2 * ys[k - 1] - q.b1 * ys[k]
            term_log = mp.log10(1 + q.a2 * mp.power(10, d_k1))
            scale *= b1
            h += term_log / scale
            tail_bound = float(term_log / scale) / (q.b1 - 1.0)
            decreasing = prev_term is None or term_log <= prev_term
            prev_term = term_log
            if decreasing and abs(tail_bound) < _SHADOW_TAIL:
                return float(h)
        raise RuntimeError(
            "shadow series did not reach its tail bound; the pair may be "
            "too close to the basin boundary"
        )


def shadow_h_case_three(
    p: TwoStepParams, y1: float, y2: float, max_terms: int = _SHADOW_MAX_TERMS
) -> float:
    """Case III shadow constant for the even subsequence:
    h = y2 + sum_{k>=1} b2^-k log10(1 + a1 10^(-d_{2k+1})), with
    y_{2n} - b2^(n-1) h -> 0.

    Applies on the part of the quadrant where the odd gap subsequence
    (d_{2n-1}) diverges to +oo; membership is detected empirically by
    monotone growth past +50, and the call refuses when the gaps settle at a
    finite limit instead (then the even-subsequence shadow does not exist).
    """
    p._require_standard("case III shadowing")
    p._require_two_terms("case III shadowing")
    if classify_case(p) is not Case.III:
        raise ValueError("shadow_h_case_three needs case III parameters (b1^2 < b2)")
    q, shift = _case3_normalized(p)
    z1, z2 = float(y1) + shift, float(y2) + shift
    prec = 240
    with mp.workprec(prec):
        b2 = mp.mpf(q.b2)
        la1 = mp.log10(mp.mpf(q.a1))
        ys = [mp.mpf(z1), mp.mpf(z2)]

        def extend_to(m):
            while len(ys) < m:
                u = la1 + q.b1 * ys[-1]
                v = b2 * ys[-2]
                mm, d = (u, v - u) if u >= v else (v, u - v)
                ys.append(mm + mp.log10(1 + mp.power(10, d)))

        # V_o membership: odd gaps d_3, d_5, ... must grow past +50
        seen_growth = False
        last = None
        for n in range(1, 200):
            extend_to(2 * n + 2)
            d_odd = float(q.b2 * ys[2 * n - 1] - q.b1 * ys[2 * n])
            if last is not None and d_odd > last and d_odd > 50.0:
                seen_growth = True
                break
            if last is not None and abs(d_odd - last) < 1e-12 and d_odd < 50.0:
                break  # settled at a finite limit
            last = d_odd
        if not seen_growth:
            raise ValueError(
                "even-subsequence shadow not applicable: odd dominance gaps "
                "do not diverge for this seed (finite gap limit detected)"
            )
        h = ys[1]
        scale = mp.mpf(1)
        prev_term = None
        for k in range(1, max_terms + 1):
            extend_to(2 * k + 2)
            d_odd = q.b2 * ys[2 * k - 1] - q.b1 * ys[2 * k]
            term_log = mp.log10(1 + q.a1 * mp.power(10, -d_odd))
            scale *= b2
            h += term_log / scale
            tail_bound = float(term_log / scale) / (q.b2 - 1.0)
            decreasing = prev_term is None or term_log <= prev_term
            prev_term = term_log
            if decreasing and abs(tail_bound) < _SHADOW_TAIL:
                return float(h)
        raise RuntimeError("shadow series did not reach its tail bound")


# ---------------------------------------------------------------------------
# scalar reductions (cases II and III)


def r0_fixed_points(p: TwoStepParams) -> List[float]:
    """Fixed points of R0(r) = b2 log10(a1 + 10^r) (case III, a2 normalized
    to 1): zero, one (tangency) or two reals, sorted, to 1e-12.

    R0 is strictly convex with slope b2 > 1 at +oo and slope 0 at -oo, so
    R0(r) - r is convex with a unique minimum at 10^r = a1/(b2 - 1); the
    sign of the minimum decides the count, and each root is bisected inside
    a monotone half.  These are the only possible finite limits of the odd
    dominance gaps.
    """
    p._require_standard("R0 analysis")
    if classify_case(p) is not Case.III:
        raise ValueError("r0_fixed_points needs case III parameters")
    q, _ = _case3_normalized(p) if p.a2 != 1.0 else (p, 0.0)
    a1, b2 = q.a1, q.b2

    def g(r: float) -> float:
        return b2 * math.log10(a1 + 10.0 ** r) - r

    r_min = math.log10(a1 / (b2 - 1.0))
    g_min = g(r_min)
    if g_min > 1e-10:
        return []
    if abs(g_min) <= 1e-10:
        return [r_min]

    def bisect(lo: float, hi: float) -> float:
        g_lo = g(lo)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            g_mid = g(mid)
            if (g_lo > 0) == (g_mid > 0):
                lo, g_lo = mid, g_mid
            else:
                hi = mid
            if hi - lo < 1e-13:
                break
        return 0.5 * (lo + hi)

    left = r_min - 1.0
    while g(left) < 0:
        left -= max(1.0, abs(left))
    right = r_min + 1.0
    while g(right) < 0:
        right += max(1.0, right)
    return [bisect(left, r_min), bisect(r_min, right)]


@dataclass(frozen=True)
class CaseIIOrbit:
    """Ratio orbit r_n = x_n / x_{n-1}^b1 from r_2, and the fixed point of
    R(r) = 1 + a2 r^(-b1) it converges to."""

    ratios: Tuple[float, ...]
    fixed_point: float


def case2_ratio_orbit(p: TwoStepParams, r2: float, n: int) -> CaseIIOrbit:
    """Iterate the case II ratio map n times from r2 (a1 normalized to 1).

    The recursion x_n = x_{n-1}^b1 + a2 x_{n-2}^b2 with b2 = b1^2 closes on
    the ratio variable: r_n = 1 + a2 r_{n-1}^(-b1).  R is strictly
    decreasing, so the unique positive fixed point is found by monotone
    bisection; the orbit converges to it in the usual two-step oscillating
    fashion.  Reconstruction: x_n = r_n x_{n-1}^b1.
    """
    p._require_standard("case II ratio analysis")
    if classify_case(p) is not Case.II:
        raise ValueError("case2_ratio_orbit needs case II parameters (b1^2 = b2)")
    if not (r2 > 0):
        raise ValueError("r2 must be positive")
    if n < 1:
        raise ValueError("n must be >= 1")
    q, _ = _case1_normalized(p) if p.a1 != 1.0 else (p, 0.0)
    a2, b1 = q.a2, q.b1

    def big_r(r: float) -> float:
        return 1.0 + a2 * r ** (-b1)

    ratios = [float(r2)]
    for _ in range(n - 1):
        ratios.append(big_r(ratios[-1]))

    if a2 == 0.0:
        return CaseIIOrbit(tuple(ratios), 1.0)
    # phi(r) = R(r) - r is strictly decreasing, positive at 1
    lo, hi = 1.0, 2.0
    while big_r(hi) - hi > 0:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if big_r(mid) - mid > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15 * hi:
            break
    return CaseIIOrbit(tuple(ratios), 0.5 * (lo + hi))


# ---------------------------------------------------------------------------
# measure sampling


@dataclass
class BenfordFractionResult:
    """Per-basin pass fractions of sampled seed pairs."""

    passes: Dict[str, int]
    totals: Dict[str, int]
    undecided: int
    samples: int

    def fraction(self, basin: str) -> float:
        total = self.totals.get(basin, 0)
        if total == 0:
            raise ValueError(f"no decided samples in basin {basin!r}")
        return self.passes.get(basin, 0) / total

    @property
    def fractions(self) -> Dict[str, float]:
        return {
            k: self.passes.get(k, 0) / t for k, t in self.totals.items() if t > 0
        }


def benford_fraction(
    p: TwoStepParams,
    region: Tuple[float, float, float, float],
    samples: int,
    n: int,
    seed: int,
    thresholds: ConformanceThresholds | None = None,
    max_iter: int = 10_000,
) -> BenfordFractionResult:
    """Fraction of seed pairs in the rectangle whose orbit passes the
    conformance verdict at length n.

    Each sample gets an independent Philox substream indexed by its
    position, so results do not depend on evaluation order.  Samples that
    remain undecided (boundary plateau) are excluded and counted; when the
    rectangle straddles the boundary, fractions are reported per basin.
    """
    lo1, hi1, lo2, hi2 = region
    if not (0 < lo1 < hi1 and 0 < lo2 < hi2):
        raise ValueError("region must be a rectangle in the open positive quadrant")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    thresholds = thresholds or DEFAULT_THRESHOLDS
    children = np.random.SeedSequence(seed).spawn(samples)
    passes: Dict[str, int] = {}
    totals: Dict[str, int] = {}
    undecided = 0
    for child in children:
        rng = np.random.Generator(np.random.Philox(child))
        x1 = lo1 + (hi1 - lo1) * rng.random()
        x2 = lo2 + (hi2 - lo2) * rng.random()
        label = classify_basin(p, x1, x2, max_iter=max_iter)
        if label.label is BasinKind.BOUNDARY_UNDECIDED:
            undecided += 1
            continue
        key = label.label.value
        totals[key] = totals.get(key, 0) + 1
        fracs = _orbit_fracs(p, x1, x2, n)
        report = _report_from_fracs(fracs, 0, thresholds)
        if report.passed:
            passes[key] = passes.get(key, 0) + 1
    return BenfordFractionResult(
        passes=passes, totals=totals, undecided=undecided, samples=samples
    )

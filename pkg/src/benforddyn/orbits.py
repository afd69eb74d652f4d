"""One-dimensional discrete maps, Newton difference sequences, and scalar flows.

Orbit generation strategy by growth class:

* log-linear growth (pure linear maps ax, contractions toward a fixed point,
  the tent map's escape branch): the log-magnitude moves by a bounded step
  each iteration, so the orbit is iterated natively while representable and
  its log accumulates in 80-bit longdouble afterwards;
* log-geometric growth (x -> a x^b + g with b > 1, quadratically flat fixed
  points, Newton near a simple root): frac(log10 x_N) depends on roughly
  N*log2(b) leading bits of the early terms, so these recursions run under
  mpmath at that working precision, with additive corrections evaluated only
  while they exceed the precision still needed downstream;
* tower growth (x -> e^x): no fixed precision survives more than a handful
  of steps; the orbit is truncated with a reason once the significand
  information is no longer representable.

Scalar flows are integrated with classical fixed-step RK4, in x while the
magnitude is moderate and in y = log10|x| once it is not, and occupation
times of significand intervals are accumulated with sub-step interpolation
at the crossing times.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Sequence

import numpy as np
from mpmath import mp

from .logdomain import (
    frac_part,
    linear_log_fracs,
    logaddexp10,
    required_bits,
    slv_from_log10,
    slv_from_mpf,
)
from .significand import SignedLogValue

__all__ = [
    "MapSpec",
    "FlowSpec",
    "NewtonSequences",
    "OrbitEscapeError",
    "iterate_map",
    "newton_sequences",
    "flow_occupation",
    "flow_log_samples",
    "NEWTON_ROOT",
]

# Switch-over between native-real and log-domain iteration: far from
# overflow, late enough that relative correction terms are < 1e-300.
_NATIVE_LOG_LIMIT = 150.0

# Newton's root for both built-in functions e^x - 2 and (e^x - 2)^3.
NEWTON_ROOT = math.log(2.0)

_FAMILIES = (
    "affine_plus",
    "contraction_fixed_point",
    "power_plus",
    "analytic_flat",
    "exponential",
    "tent",
    "nonauto_linear",
    "nonauto_power",
)
_G_TAGS = ("zero", "one", "exp_decay")
_RULES = ("two_plus_inv", "geometric_square")


class OrbitEscapeError(RuntimeError):
    """Orbit left the region where the family can be iterated; carries the
    truncated prefix and the reason."""

    def __init__(self, reason: str, values: List[SignedLogValue]):
        super().__init__(reason)
        self.reason = reason
        self.values = values


@dataclass(frozen=True)
class MapSpec:
    """One map family plus its parameters.

    family / parameters:
      affine_plus:             T(x) = a x + g(x), a > 1, g in {zero, exp_decay}
      contraction_fixed_point: T(x) = x + a e^(-x) - a, multiplier 1 - a
      power_plus:              T(x) = a x^b + g(x), a > 0, b > 1, g in {zero, one}
      analytic_flat:           T(x) = x - 1 + e^(-x)
      exponential:             T(x) = e^x
      tent:                    T(x) = 1 - |2x - 1|
      nonauto_linear:          T_n(x) = a_n x with rule two_plus_inv (a_n = 2 + 1/n)
      nonauto_power:           T_n(x) = a_n x^(b_n), rule geometric_square
                               (a_n = 2^n, b_n = 2); caller is responsible for
                               liminf |b_n| > 1, which the built-in rule satisfies
    """

    family: str
    a: float | None = None
    b: float | None = None
    g: str = "zero"
    rule: str | None = None

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown map family {self.family!r}")
        if self.g not in _G_TAGS:
            raise ValueError(f"unknown additive tag {self.g!r}")
        if self.family == "affine_plus":
            if self.a is None or self.a <= 1:
                raise ValueError("affine_plus requires a > 1")
        elif self.family == "contraction_fixed_point":
            if self.a is None or not (0 < self.a < 2) or self.a == 1:
                raise ValueError("contraction_fixed_point requires a in (0,1) or (1,2)")
        elif self.family == "power_plus":
            if self.a is None or self.a <= 0 or self.b is None or self.b <= 1:
                raise ValueError("power_plus requires a > 0 and b > 1")
        elif self.family in ("nonauto_linear", "nonauto_power"):
            if self.rule not in _RULES:
                raise ValueError(f"non-autonomous family needs a rule from {_RULES}")

    # -- constructors ------------------------------------------------------
    @classmethod
    def affine_plus(cls, a: float, g: str = "zero") -> "MapSpec":
        return cls("affine_plus", a=float(a), g=g)

    @classmethod
    def contraction_fixed_point(cls, a: float) -> "MapSpec":
        return cls("contraction_fixed_point", a=float(a))

    @classmethod
    def power_plus(cls, a: float, b: float, g: str = "zero") -> "MapSpec":
        return cls("power_plus", a=float(a), b=float(b), g=g)

    @classmethod
    def analytic_flat(cls) -> "MapSpec":
        return cls("analytic_flat")

    @classmethod
    def exponential(cls) -> "MapSpec":
        return cls("exponential")

    @classmethod
    def tent(cls) -> "MapSpec":
        return cls("tent")

    @classmethod
    def nonauto_linear(cls, rule: str = "two_plus_inv") -> "MapSpec":
        return cls("nonauto_linear", rule=rule)

    @classmethod
    def nonauto_power(cls, rule: str = "geometric_square") -> "MapSpec":
        return cls("nonauto_power", rule=rule)


def iterate_map(
    spec: MapSpec,
    x0,
    n: int,
    allow_truncation: bool = False,
) -> List[SignedLogValue]:
    """Orbit (x_1, ..., x_n) of x0 under the family, in the log domain.

    Raises :class:`OrbitEscapeError` (carrying the truncated prefix) when the
    orbit leaves the representable region, unless ``allow_truncation`` is
    set, in which case the truncated orbit is returned.
    """
    if n < 1:
        raise ValueError("orbit length must be >= 1")
    if isinstance(x0, SignedLogValue):
        x0 = x0.to_real()
    x0 = float(x0)
    try:
        return _DISPATCH[spec.family](spec, x0, n)
    except OrbitEscapeError as err:
        if allow_truncation:
            return err.values
        raise


# ---------------------------------------------------------------------------
# log-linear families


def _affine_orbit(spec: MapSpec, x0: float, n: int) -> List[SignedLogValue]:
    if x0 <= 0:
        raise ValueError("affine_plus acts on positive reals")
    a = spec.a
    out: List[SignedLogValue] = []
    x = x0
    while len(out) < n and math.log10(x) < _NATIVE_LOG_LIMIT:
        g = math.exp(-x) if spec.g == "exp_decay" else 0.0
        x = a * x + g
        out.append(SignedLogValue.from_real(x))
    if len(out) < n:
        # additive term is < 1e-300 relative out here; pure log-linear tail
        fr, ym = linear_log_fracs(out[-1].log_mag, math.log10(a), n - len(out))
        out.extend(slv_from_log10(1, m, f) for m, f in zip(ym, fr))
    return out


def _contraction_orbit(spec: MapSpec, x0: float, n: int) -> List[SignedLogValue]:
    a = spec.a
    lam = 1.0 - a
    if x0 < -700.0:
        raise ValueError("x0 is far outside the fixed point's neighbourhood "
                         "(e^(-x0) overflows)")
    out: List[SignedLogValue] = []
    x = x0
    while len(out) < n:
        x = x + a * math.expm1(-x)
        out.append(SignedLogValue.from_real(x))
        if x == 0.0:
            out.extend([SignedLogValue(0)] * (n - len(out)))
            return out
        if abs(x) < 1e-250:
            break
    if len(out) < n:
        count = n - len(out)
        fr, ym = linear_log_fracs(out[-1].log_mag, math.log10(abs(lam)), count)
        s0 = out[-1].sign
        if lam > 0:
            signs = [s0] * count
        else:
            signs = [s0 * (-1) ** k for k in range(1, count + 1)]
        out.extend(slv_from_log10(s, m, f) for s, m, f in zip(signs, ym, fr))
    return out


def _tent_orbit(spec: MapSpec, x0: float, n: int) -> List[SignedLogValue]:
    out: List[SignedLogValue] = []
    x = x0
    while len(out) < n:
        x = 1.0 - abs(2.0 * x - 1.0)
        out.append(SignedLogValue.from_real(x))
        if x == 0.0:
            out.extend([SignedLogValue(0)] * (n - len(out)))
            return out
        if x < 0 and math.log10(-x) > _NATIVE_LOG_LIMIT:
            break  # escape branch doubles forever: T(x) = 2x for x < 0
    if len(out) < n:
        fr, ym = linear_log_fracs(out[-1].log_mag, math.log10(2.0), n - len(out))
        out.extend(slv_from_log10(-1, m, f) for m, f in zip(ym, fr))
    return out


def _nonauto_linear_orbit(spec: MapSpec, x0: float, n: int) -> List[SignedLogValue]:
    if x0 <= 0:
        raise ValueError("nonauto_linear acts on positive reals")
    # x_n = a_n x_{n-1} exactly, so the whole orbit lives in the log domain
    steps = np.log10(2.0 + 1.0 / np.arange(1, n + 1, dtype=np.longdouble))
    y = np.cumsum(steps) + np.longdouble(math.log10(x0))
    fr = (y % np.longdouble(1.0)).astype(float)
    return [slv_from_log10(1, m, f) for m, f in zip(y.astype(float), fr)]


# ---------------------------------------------------------------------------
# log-geometric families (mpmath working precision)


def _power_plus_orbit(spec: MapSpec, x0: float, n: int) -> List[SignedLogValue]:
    if x0 <= 0:
        raise ValueError("power_plus acts on positive reals")
    a, b = spec.a, spec.b
    has_one = spec.g == "one"

    # bounded-orbit detection in plain floats first
    la = math.log10(a)
    y = math.log10(x0)
    escaped = False
    for _ in range(n):
        y = la + b * y
        if has_one:
            y = logaddexp10(y, 0.0)
        if abs(y) > 40.0:
            escaped = True
            break
    if not escaped:
        # orbit stays in a band where doubles carry the fractional part
        out = []
        y = math.log10(x0)
        for _ in range(n):
            y = la + b * y
            if has_one:
                y = logaddexp10(y, 0.0)
            out.append(slv_from_log10(1, y))
        return out

    bits = required_bits(n, b)
    log2_rate = math.log2(b)
    out = []
    with mp.workprec(bits):
        la_mp = mp.log10(mp.mpf(a))
        y_mp = mp.log10(mp.mpf(x0))
        for step in range(1, n + 1):
            y_mp = la_mp + b * y_mp
            if has_one:
                yf = float(y_mp)
                needed = -((n - step) * log2_rate + 64.0) * math.log10(2.0)
                if -yf > needed:  # 10^-y above the still-needed resolution
                    y_mp = y_mp + mp.log10(1 + mp.power(10, -y_mp))
            out.append(slv_from_mpf(1, y_mp))
    return out


def _analytic_flat_orbit(spec: MapSpec, x0: float, n: int) -> List[SignedLogValue]:
    # T(x) = x - 1 + e^(-x) = x + expm1(-x): nonnegative, quadratically flat
    # at the fixed point 0, so decay toward 0 is log-geometric with rate 2.
    out: List[SignedLogValue] = []
    x = x0
    native_cap = min(n, 8)
    while len(out) < native_cap and not (0.0 < x < 0.5):
        x = x + math.expm1(-x)
        out.append(SignedLogValue.from_real(x))
        if x == 0.0:
            out.extend([SignedLogValue(0)] * (n - len(out)))
            return out
    if len(out) == n:
        return out
    remaining = n - len(out)
    bits = required_bits(remaining, 2.0)
    log_half = None
    with mp.workprec(bits):
        x_mp = mp.mpf(x if out else x0)
        y_mp = None
        for step in range(1, remaining + 1):
            if y_mp is None:
                x_mp = x_mp + mp.expm1(-x_mp)
                if x_mp <= 0:
                    out.extend([SignedLogValue(0)] * (remaining - step + 1))
                    return out
                y_mp = mp.log10(x_mp)
                out.append(slv_from_mpf(1, y_mp))
                # drop to the pure quadratic recursion once the cubic term is
                # below the precision still needed downstream
                needed = -((remaining - step) * 1.0 + 64.0) * math.log10(2.0)
                if float(mp.log10(x_mp / 3)) < needed:
                    log_half = mp.log10(mp.mpf(1) / 2)
                else:
                    y_mp = None  # keep iterating in x-space
            else:
                y_mp = 2 * y_mp + log_half
                out.append(slv_from_mpf(1, y_mp))
    return out


def _nonauto_power_orbit(spec: MapSpec, x0: float, n: int) -> List[SignedLogValue]:
    if x0 == 0.0:
        raise ValueError("nonauto_power needs a nonzero start")
    bits = required_bits(n, 2.0)
    out = []
    with mp.workprec(bits):
        log2 = mp.log10(mp.mpf(2))
        y = mp.log10(mp.mpf(abs(x0)))
        for step in range(1, n + 1):
            y = step * log2 + 2 * y
            out.append(slv_from_mpf(1, y))
    return out


def _exponential_orbit(spec: MapSpec, x0: float, n: int) -> List[SignedLogValue]:
    out: List[SignedLogValue] = []
    x = x0
    for _ in range(n):
        if x > 709.0:  # e^x overflows; one more log-level is representable
            y = x * math.log10(math.e)
            if y < 2.0 ** 50:
                out.append(slv_from_log10(1, y))
            raise OrbitEscapeError(
                "tower growth exceeded the range where significand "
                f"information is representable after {len(out)} terms",
                out,
            )
        x = math.exp(x)
        out.append(SignedLogValue.from_real(x))
    return out


_DISPATCH: dict[str, Callable[[MapSpec, float, int], List[SignedLogValue]]] = {
    "affine_plus": _affine_orbit,
    "contraction_fixed_point": _contraction_orbit,
    "power_plus": _power_plus_orbit,
    "analytic_flat": _analytic_flat_orbit,
    "exponential": _exponential_orbit,
    "tent": _tent_orbit,
    "nonauto_linear": _nonauto_linear_orbit,
    "nonauto_power": _nonauto_power_orbit,
}


# ---------------------------------------------------------------------------
# Newton difference sequences


@dataclass
class NewtonSequences:
    """diffs[k] = T^(k+1)(x0) - T^k(x0); errors[k] = T^(k+1)(x0) - root."""

    diffs: List[SignedLogValue]
    errors: List[SignedLogValue]


_NEWTON_FUNCS = ("exp_minus_2", "exp_minus_2_cubed")
# |f''/(2 f')| at the root of e^x - 2; the shadow constant of the
# quadratically convergent tail, computed from the derivatives analytically.
_NEWTON_C_SIMPLE = 0.5
_ASYMPTOTIC_SWITCH = 1e-8
_TRIPLE_RATIO = 2.0 / 3.0


def newton_sequences(
    f: str, x0: float, n: int, neighborhood: float = 0.5
) -> NewtonSequences:
    """Newton iteration sequences for f(x) = e^x - 2 or (e^x - 2)^3.

    Both functions vanish at x* = ln 2.  The error recursions are exact in
    eps = x - x*:  eps' = eps + expm1(-eps) for the simple root (quadratic,
    eps' ~ eps^2/2) and eps' = eps + expm1(-eps)/3 for the triple root
    (linear with ratio 2/3).  Once the simple-root error passes 1e-8 the
    generator switches to the exact log recursion y' = 2y + log10(1/2)
    seeded from the last directly computed error, at a working precision
    sized for the remaining doublings.
    """
    if f not in _NEWTON_FUNCS:
        raise ValueError(f"unknown function tag {f!r}; choose from {_NEWTON_FUNCS}")
    if n < 1:
        raise ValueError("n must be >= 1")
    eps0 = float(x0) - NEWTON_ROOT
    if eps0 == 0.0:
        raise ValueError("x0 equals the root; Newton differences are degenerate")
    if abs(eps0) > neighborhood:
        raise ValueError(
            f"x0 is outside the configured neighbourhood (|x0 - ln 2| = "
            f"{abs(eps0):.4g} > {neighborhood})"
        )
    if f == "exp_minus_2":
        return _newton_simple(eps0, n)
    return _newton_triple(eps0, n)


def _slv_of_real(x: float) -> SignedLogValue:
    return SignedLogValue.from_real(x)


def _newton_simple(eps0: float, n: int) -> NewtonSequences:
    eps = eps0
    errors: List[SignedLogValue] = []
    diffs: List[SignedLogValue] = []
    grow = 0
    while len(errors) < n:
        nxt = eps + math.expm1(-eps)
        diffs.append(_slv_of_real(nxt - eps))
        errors.append(_slv_of_real(nxt))
        if abs(nxt) > abs(eps):
            grow += 1
            if grow > 5 or not math.isfinite(nxt):
                raise ValueError("iteration diverges; x0 is outside the basin")
        else:
            grow = 0
        eps = nxt
        if 0.0 < abs(eps) < _ASYMPTOTIC_SWITCH:
            break
    remaining = n - len(errors)
    if remaining <= 0:
        return NewtonSequences(diffs, errors)
    bits = required_bits(remaining, 2.0)
    with mp.workprec(bits):
        log_c = mp.log10(mp.mpf(1) / 2)
        y = mp.log10(mp.mpf(abs(eps)))
        for _ in range(remaining):
            y_next = 2 * y + log_c
            # diff = eps_{k+1} - eps_k = -eps_k (1 - C eps_k); the parenthesis
            # is 1 up to ~1e-8, folded in at float accuracy
            corr = math.log1p(-_NEWTON_C_SIMPLE * 10.0 ** float(y))
            diffs.append(slv_from_mpf(-1, y + corr / math.log(10.0)))
            errors.append(slv_from_mpf(1, y_next))
            y = y_next
    return NewtonSequences(diffs, errors)


def _newton_triple(eps0: float, n: int) -> NewtonSequences:
    eps = eps0
    errors: List[SignedLogValue] = []
    diffs: List[SignedLogValue] = []
    while len(errors) < n:
        nxt = eps + math.expm1(-eps) / 3.0
        diffs.append(_slv_of_real(nxt - eps))
        errors.append(_slv_of_real(nxt))
        eps = nxt
        if eps == 0.0:
            raise ValueError("error collapsed to exact zero; orbit degenerate")
        if abs(eps) < 1e-250:
            break
    remaining = n - len(errors)
    if remaining > 0:
        # linear contraction: y' = y + log10(2/3) exactly out here
        step = math.log10(_TRIPLE_RATIO)
        sign = errors[-1].sign
        y_last = errors[-1].log_mag
        fr, ym = linear_log_fracs(y_last, step, remaining)
        errors.extend(slv_from_log10(sign, m, f) for m, f in zip(ym, fr))
        # diff_k = eps_k (2/3 - 1) = -(1/3) of the error *entering* the step
        shift = math.log10(1.0 - _TRIPLE_RATIO)
        ym_prev = np.concatenate([[y_last], ym[:-1]])
        fr_prev = np.concatenate([[frac_part(y_last)], fr[:-1]])
        fr_d = (fr_prev + np.float64(shift)) % 1.0
        diffs.extend(
            slv_from_log10(-sign, m + shift, f) for m, f in zip(ym_prev, fr_d)
        )
    return NewtonSequences(diffs, errors)


# ---------------------------------------------------------------------------
# scalar flows


_FLOW_FIELDS = ("linear", "sqrt_quad", "damped_rational")
_LN10 = math.log(10.0)


@dataclass(frozen=True)
class FlowSpec:
    """Initial value problem dx/dt = F(x), x(0) = x0, on [0, t_end].

    Fields: linear (F = x), sqrt_quad (F = sqrt(x^2 + 1)), damped_rational
    (F = -x/(x^2+1)).  dt defaults to t_end / 2e4, guaranteeing >= 1e4
    samples; occupation results are step-refined until halving dt moves no
    reported fraction by more than 1e-4.
    """

    field: str
    x0: float
    t_end: float
    dt: float | None = None

    def __post_init__(self):
        if self.field not in _FLOW_FIELDS:
            raise ValueError(f"unknown flow field {self.field!r}")
        if not (self.t_end > 0 and math.isfinite(self.t_end)):
            raise ValueError("t_end must be positive and finite")
        if self.dt is not None and not (0 < self.dt <= self.t_end / 10_000):
            raise ValueError("dt must be positive and yield at least 1e4 samples")


def _field_x(name: str) -> Callable[[float], float]:
    if name == "linear":
        return lambda x: x
    if name == "sqrt_quad":
        return lambda x: math.sqrt(x * x + 1.0)
    return lambda x: -x / (x * x + 1.0)


def _field_y(name: str) -> Callable[[float, int], float]:
    # dy/dt with y = log10|x|, x = sign * 10^y; forms chosen so 10^(2y)
    # never overflows in the regime where the mode is active
    if name == "linear":
        return lambda y, sign: 1.0 / _LN10
    if name == "sqrt_quad":
        def dy(y, sign):
            # sqrt(x^2+1)/(x ln10) = sign * sqrt(1 + 10^(-2y)) / ln10
            t = 10.0 ** (-2.0 * y) if y > -150.0 else math.inf
            return sign * math.sqrt(1.0 + t) / _LN10
        return dy

    def dy(y, sign):
        t = 10.0 ** (2.0 * y) if y < 150.0 else math.inf
        return -1.0 / ((t + 1.0) * _LN10)
    return dy


def _rk4(fn, v, dt):
    k1 = fn(v)
    k2 = fn(v + 0.5 * dt * k1)
    k3 = fn(v + 0.5 * dt * k2)
    k4 = fn(v + dt * k3)
    return v + dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0


def _measure_frac_below(y0: float, y1: float, level: float) -> float:
    """Fraction of the linear sweep from y0 to y1 spent with frac(y) <= level."""
    if y1 < y0:
        y0, y1 = y1, y0
    d = y1 - y0
    if d < 1e-12:
        return 1.0 if frac_part(y0) <= level else 0.0
    full = math.floor(y1) - math.floor(y0)
    part = min(frac_part(y1), level) - min(frac_part(y0), level)
    return (full * level + part) / d


def flow_log_samples(spec: FlowSpec) -> List[SignedLogValue]:
    """Grid samples of the solution in the log domain (one value per RK4
    step, >= 1e4 of them).  The sampled sequence equidistributes mod 1
    exactly when the occupation fractions converge to the logarithmic law,
    so it is the natural input for a conformance report on a flow."""
    fx = _field_x(spec.field)
    fy = _field_y(spec.field)
    dt = spec.dt if spec.dt is not None else spec.t_end / 20_000
    steps = int(math.ceil(spec.t_end / dt))
    out: List[SignedLogValue] = []
    log_mode = False
    x = float(spec.x0)
    y = 0.0
    sign = 1
    if x != 0.0 and abs(x) >= 1e3:
        log_mode, sign, y = True, (1 if x > 0 else -1), math.log10(abs(x))
    for _ in range(steps):
        if log_mode:
            y = _rk4(lambda v: fy(v, sign), y, dt)
            out.append(slv_from_log10(sign, y))
            if abs(y) < 2.5 and spec.field != "damped_rational":
                log_mode, x = False, sign * 10.0 ** y
        else:
            x = _rk4(fx, x, dt)
            out.append(SignedLogValue.from_real(x) if abs(x) < 1e300
                       else slv_from_log10(1 if x > 0 else -1, math.log10(abs(x))))
            if x != 0.0 and (
                abs(x) >= 1e3
                or (spec.field == "damped_rational" and abs(x) <= 1e-3)
            ):
                log_mode, sign, y = True, (1 if x > 0 else -1), math.log10(abs(x))
    return out


def flow_occupation(spec: FlowSpec, t_targets: Sequence[float]) -> List[float]:
    """Estimated lambda({s < t_end : S(x(s)) <= t}) / t_end per target t.

    Classical RK4 with a fixed step; the step is halved (up to 6 times) until
    every reported fraction moves by less than 1e-4, per the smooth-scalar
    integrator policy.
    """
    levels = []
    for t in t_targets:
        if not (1.0 <= t < 10.0):
            raise ValueError(f"targets must lie in [1, 10), got {t}")
        levels.append(math.log10(t))
    dt = spec.dt if spec.dt is not None else spec.t_end / 20_000
    prev = _occupation_pass(spec, levels, dt)
    for _ in range(6):
        dt *= 0.5
        cur = _occupation_pass(spec, levels, dt)
        if max(abs(a - b) for a, b in zip(cur, prev)) < 1e-4:
            return cur
        prev = cur
    raise RuntimeError("occupation estimate did not stabilize under step halving")


def _occupation_pass(spec: FlowSpec, levels: List[float], dt: float) -> List[float]:
    fx = _field_x(spec.field)
    fy = _field_y(spec.field)
    steps = int(math.ceil(spec.t_end / dt))
    occupied = [0.0] * len(levels)

    def wants_log_mode(xv: float) -> bool:
        # large magnitudes always integrate in y; small magnitudes only for
        # the damped field, where x -> 0 monotonically (the other fields pass
        # through small values transiently and may cross zero)
        if xv == 0.0:
            return False
        if abs(xv) >= 1e3:
            return True
        return spec.field == "damped_rational" and abs(xv) <= 1e-3

    log_mode = False
    x = float(spec.x0)
    y = 0.0
    sign = 1
    if wants_log_mode(x):
        log_mode, sign, y = True, (1 if x > 0 else -1), math.log10(abs(x))

    for _ in range(steps):
        if log_mode:
            y_next = _rk4(lambda v: fy(v, sign), y, dt)
            _accumulate(occupied, levels, y, y_next, dt)
            y = y_next
            if abs(y) < 2.5:
                # re-entered the moderate band (e.g. a negative start shrank
                # toward a zero crossing); resume native integration
                log_mode, x = False, sign * 10.0 ** y
        else:
            x_next = _rk4(fx, x, dt)
            _accumulate_native(occupied, levels, x, x_next, dt, 0)
            x = x_next
            if wants_log_mode(x):
                log_mode, sign, y = True, (1 if x > 0 else -1), math.log10(abs(x))
    return [o / (steps * dt) for o in occupied]


def _accumulate(occupied, levels, y0, y1, dt):
    for i, lv in enumerate(levels):
        occupied[i] += dt * _measure_frac_below(y0, y1, lv)


def _accumulate_native(occupied, levels, x0, x1, dt, depth):
    # the log sweep across a native step can be large near a zero crossing;
    # subdivide (linear secant in x) until each piece is a small log sweep
    if x0 == 0.0 or x1 == 0.0 or (x0 > 0) != (x1 > 0) or abs(
        math.log10(abs(x1)) - math.log10(abs(x0))
    ) > 0.5:
        if depth >= 40 or dt < 1e-15:
            return  # measure-zero sliver around the crossing
        xm = 0.5 * (x0 + x1)
        _accumulate_native(occupied, levels, x0, xm, dt / 2.0, depth + 1)
        _accumulate_native(occupied, levels, xm, x1, dt / 2.0, depth + 1)
        return
    _accumulate(occupied, levels, math.log10(abs(x0)), math.log10(abs(x1)), dt)

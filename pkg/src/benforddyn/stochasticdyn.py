"""Random-variable powers, iid products, and geometric Brownian motion.

Reproducibility contract: all randomness flows through numpy's Philox
counter-based generator, seeded via ``SeedSequence`` so that ensembles can
be split into independent, order-independent substreams (one per task
index) and merged deterministically.  Gaussians are produced by an explicit
Box-Muller transform on open-interval uniforms rather than the generator's
native ziggurat, so the exact sample stream is pinned by this module and not
by the numpy version.

Log-domain accuracy: a power path (X, X^2, ..., X^N) multiplies log10|X| by
up to N = 1e4, so log10|X| is taken once at 50 significant digits and the
products are reduced mod 1 before conversion to float.  Product paths and
GBM paths accumulate their logs in 80-bit longdouble, which holds the
fractional part to ~1e-15 absolute over 1e4-1e6 steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from mpmath import mp

from .conformance import ks_to_benford
from .logdomain import slv_from_log10
from .significand import SignedLogValue

__all__ = [
    "DistSpec",
    "GBMSpec",
    "GBMPath",
    "DistributionTest",
    "make_generator",
    "spawn_generators",
    "box_muller",
    "rv_power_path",
    "distribution_ks_at_n",
    "iid_product_path",
    "gbm_path",
    "gbm_terminal_log10",
]

_CANTOR_DEPTH = 60
_FAMILIES = ("uniform", "exponential", "normal", "cantor10", "point_mass")


def make_generator(seed: int) -> np.random.Generator:
    """Counter-based generator with a documented algorithm (Philox 4x64)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def spawn_generators(seed: int, count: int) -> List[np.random.Generator]:
    """Independent substreams derived from (master seed, task index)."""
    children = np.random.SeedSequence(seed).spawn(count)
    return [np.random.Generator(np.random.Philox(c)) for c in children]


def box_muller(rng: np.random.Generator, size: int) -> np.ndarray:
    """Standard normals via Box-Muller on (0, 1] x [0, 1) uniforms."""
    pairs = (size + 1) // 2
    u1 = 1.0 - rng.random(pairs)  # (0, 1]: keeps the log finite
    u2 = rng.random(pairs)
    r = np.sqrt(-2.0 * np.log(u1))
    z = np.concatenate([r * np.cos(2.0 * np.pi * u2), r * np.sin(2.0 * np.pi * u2)])
    return z[:size]


@dataclass(frozen=True)
class DistSpec:
    """Sampling distribution for the stochastic sequence generators.

    Families: uniform(lo, hi), exponential(rate), normal(mean, sd),
    cantor10 (X = 10^Y with Y uniform on the middle-thirds Cantor set,
    realized as Y = sum 2 d_k 3^-k, d_k iid Bernoulli(1/2), k <= 60), and
    point_mass(value) as the degenerate test hook.
    """

    family: str
    params: Tuple[float, ...] = ()

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown distribution family {self.family!r}")
        p = self.params
        if self.family == "uniform":
            if len(p) != 2 or not p[0] < p[1]:
                raise ValueError("uniform needs lo < hi")
        elif self.family == "exponential":
            if len(p) != 1 or p[0] <= 0:
                raise ValueError("exponential needs rate > 0")
        elif self.family == "normal":
            if len(p) != 2 or p[1] <= 0:
                raise ValueError("normal needs sd > 0")
        elif self.family == "point_mass":
            if len(p) != 1 or p[0] == 0:
                raise ValueError("point_mass needs a nonzero value")

    @classmethod
    def uniform(cls, lo: float, hi: float) -> "DistSpec":
        return cls("uniform", (float(lo), float(hi)))

    @classmethod
    def exponential(cls, rate: float) -> "DistSpec":
        return cls("exponential", (float(rate),))

    @classmethod
    def normal(cls, mean: float, sd: float) -> "DistSpec":
        return cls("normal", (float(mean), float(sd)))

    @classmethod
    def cantor10(cls) -> "DistSpec":
        return cls("cantor10")

    @classmethod
    def point_mass(cls, value: float) -> "DistSpec":
        return cls("point_mass", (float(value),))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.family == "uniform":
            lo, hi = self.params
            return lo + (hi - lo) * rng.random(size)
        if self.family == "exponential":
            return rng.standard_exponential(size) / self.params[0]
        if self.family == "normal":
            mean, sd = self.params
            return mean + sd * box_muller(rng, size)
        if self.family == "cantor10":
            return 10.0 ** self._cantor_y(rng, size)
        if self.family == "point_mass":
            return np.full(size, self.params[0])
        raise AssertionError

    def _cantor_y(self, rng: np.random.Generator, size: int) -> np.ndarray:
        bits = rng.integers(0, 2, size=(size, _CANTOR_DEPTH))
        weights = 2.0 * (3.0 ** -np.arange(1, _CANTOR_DEPTH + 1))
        return bits @ weights

    def sample_log10_exact(self, rng: np.random.Generator) -> Tuple[int, mp.mpf, object]:
        """One draw as (sign, log10|X| at working precision, exact payload).

        The payload is the Cantor numerator (an integer over 3^60) when the
        family supports exact fractional-part arithmetic, else None.
        Zero draws are resampled; the resample count is folded into the
        payload contract (zero has probability 0 for every built-in family
        except a pathological uniform straddling 0 exactly).
        """
        for _ in range(64):
            if self.family == "cantor10":
                bits = rng.integers(0, 2, size=_CANTOR_DEPTH)
                numerator = 0
                for b in bits:
                    numerator = numerator * 3 + 2 * int(b)
                # Y = numerator / 3^60 exactly
                return 1, mp.mpf(numerator) / mp.mpf(3) ** _CANTOR_DEPTH, numerator
            x = float(self.sample(rng, 1)[0])
            if x != 0.0:
                return (1 if x > 0 else -1), mp.log(mp.mpf(abs(x))) / mp.log(10), None
        raise RuntimeError("sampled zero 64 times in a row; distribution degenerate at 0")


@dataclass(frozen=True)
class DistributionTest:
    """Monte Carlo distance of S(X^n) from the Benford distribution."""

    ks: float
    fourier_magnitude: float
    n: int
    samples: int


def rv_power_path(dist: DistSpec, rng: np.random.Generator, n: int) -> List[SignedLogValue]:
    """Draw one X and return (X, X^2, ..., X^n) in the log domain.

    y_k = k * log10|X| is reduced mod 1 at 50-digit working precision; for
    the Cantor family the reduction is exact integer arithmetic on the
    ternary numerator.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    with mp.workprec(max(64, int(3.33 * 50))):
        sign, y1, payload = dist.sample_log10_exact(rng)
        out: List[SignedLogValue] = []
        if payload is not None:
            # exact path: frac(k * numerator / 3^60)
            denom = 3 ** _CANTOR_DEPTH
            y1f = float(y1)
            for k in range(1, n + 1):
                f = (k * payload) % denom / denom
                out.append(slv_from_log10(1, k * y1f, float(f)))
            return out
        y1f = float(y1)
        for k in range(1, n + 1):
            yk = k * y1
            f = float(yk - mp.floor(yk))
            s = sign if (k % 2 == 1 or sign == 1) else 1
            out.append(slv_from_log10(s, k * y1f, f if f < 1.0 else 0.0))
    return out


def distribution_ks_at_n(
    dist: DistSpec, n: int, samples: int, rng: np.random.Generator
) -> DistributionTest:
    """KS distance between the Monte Carlo distribution of S(X^n) and the
    Benford CDF, plus the estimated Fourier magnitude |E exp(2 pi i n log10|X|)|."""
    if samples < 10_000:
        raise ValueError("need at least 1e4 samples for a stable KS estimate")
    if n < 1:
        raise ValueError("n must be >= 1")
    if dist.family == "cantor10":
        rng_bits = rng.integers(0, 2, size=(samples, _CANTOR_DEPTH))
        weights = 2.0 * (3.0 ** -np.arange(1, _CANTOR_DEPTH + 1))
        logs = rng_bits @ weights
    else:
        x = dist.sample(rng, samples)
        nonzero = x != 0.0
        logs = np.log10(np.abs(x[nonzero]))
    fracs = (n * logs) % 1.0
    ks = ks_to_benford(fracs)
    fourier = float(abs(np.exp(2j * np.pi * n * logs).mean()))
    return DistributionTest(ks=ks, fourier_magnitude=fourier, n=n, samples=len(logs))


def iid_product_path(dist: DistSpec, rng: np.random.Generator, n: int) -> List[SignedLogValue]:
    """Partial products X_1, X_1X_2, ... in the log domain (longdouble cumsum).

    A point-mass distribution is routed through :func:`rv_power_path`, since
    the product of n copies of c is exactly c^n; this keeps the degenerate
    case bit-identical between the two generators.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if dist.family == "point_mass":
        return rv_power_path(dist, rng, n)
    x = dist.sample(rng, n)
    resampled = 0
    zero_idx = np.flatnonzero(x == 0.0)
    while len(zero_idx) and resampled < 64:
        x[zero_idx] = dist.sample(rng, len(zero_idx))
        resampled += 1
        zero_idx = np.flatnonzero(x == 0.0)
    signs = np.where(x > 0, 1, -1)
    cum_signs = np.cumprod(signs)
    logs = np.log10(np.abs(x)).astype(np.longdouble)
    y = np.cumsum(logs)
    fr = (y % np.longdouble(1.0)).astype(float)
    ym = y.astype(float)
    return [
        slv_from_log10(int(s), m, f if f < 1.0 else 0.0)
        for s, m, f in zip(cum_signs, ym, fr)
    ]


@dataclass(frozen=True)
class GBMSpec:
    """Geometric Brownian motion X_t = x0 exp((mu - sigma^2/2) t + sigma W_t).

    sigma = 0 is allowed and gives the deterministic log-linear path (useful
    as a degenerate check); path statistics need t_end/dt >= 1e4 samples.
    """

    mu: float
    sigma: float
    x0: float
    t_end: float
    dt: float

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if self.x0 <= 0:
            raise ValueError("x0 must be positive")
        if self.dt <= 0 or self.t_end <= 0:
            raise ValueError("dt and t_end must be positive")

    @property
    def steps(self) -> int:
        return int(round(self.t_end / self.dt))


@dataclass
class GBMPath:
    """A sampled path: grid times and log10 X_t, with occupation helpers.

    The raw arrays are the primary representation (a 1e6-step path as tuples
    of boxed values would be needlessly heavy); ``samples()`` materializes
    the (t, SignedLogValue) view.
    """

    times: np.ndarray
    log10_values: np.ndarray

    def samples(self) -> List[Tuple[float, SignedLogValue]]:
        return [
            (float(t), slv_from_log10(1, float(y)))
            for t, y in zip(self.times, self.log10_values)
        ]

    def fracs(self) -> np.ndarray:
        return self.log10_values % 1.0

    def occupation_fractions(self, t_targets: Sequence[float]) -> List[float]:
        """Fraction of grid time with significand <= target (Riemann sum on
        the sampling grid; inter-sample crossings are not tracked, so the
        bias is O(sqrt(dt)))."""
        fr = self.fracs()
        out = []
        for t in t_targets:
            if not (1.0 <= t < 10.0):
                raise ValueError(f"occupation target must lie in [1, 10), got {t}")
            out.append(float(np.mean(fr <= math.log10(t))))
        return out


def gbm_path(spec: GBMSpec, rng: np.random.Generator) -> GBMPath:
    """Exact-discretization GBM path on the grid t = dt, 2dt, ..., t_end.

    Gaussian increments enter log X directly (no Euler bias); the log
    accumulates in longdouble.
    """
    steps = spec.steps
    if steps < 1:
        raise ValueError("t_end/dt must be >= 1")
    drift = (spec.mu - 0.5 * spec.sigma ** 2) * spec.dt
    z = box_muller(rng, steps)
    increments = drift + spec.sigma * math.sqrt(spec.dt) * z
    y = np.cumsum(increments.astype(np.longdouble))
    y = y / np.longdouble(math.log(10.0)) + np.longdouble(math.log10(spec.x0))
    times = spec.dt * np.arange(1, steps + 1)
    return GBMPath(times=times, log10_values=y.astype(float))


def gbm_terminal_log10(
    spec: GBMSpec, t: float, n_paths: int, rng: np.random.Generator
) -> np.ndarray:
    """log10 X_t over an ensemble, sampled exactly (one Gaussian per path)."""
    if t <= 0:
        raise ValueError("t must be positive")
    z = box_muller(rng, n_paths)
    ln_x = math.log(spec.x0) + (spec.mu - 0.5 * spec.sigma ** 2) * t + spec.sigma * math.sqrt(t) * z
    return ln_x / math.log(10.0)

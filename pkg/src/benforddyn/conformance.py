"""Quantitative closeness of a finite sequence to Benford's law.

A sequence (x_n) conforms to the logarithmic significand distribution when
the empirical CDF of its significands approaches log10(t) on [1, 10), or
equivalently when the fractional parts of log10|x_n| equidistribute in
[0, 1).  This module measures both viewpoints on finite data:

* exact first-digit histograms and the chi-square statistic against the
  digit probabilities log10((j+1)/j);
* the Kolmogorov-Smirnov sup-distance between the empirical significand CDF
  and log10(t), evaluated exactly at the sorted sample points;
* Weyl exponential-sum magnitudes |1/N sum exp(2 pi i h log10|x_n|)|;
* the best integer apportionment of N points to the digit probabilities
  ("Benford vector").

A finite sample never *proves* the limit property, so the pass/fail verdict
is an explicit artifact convention: thresholds calibrated at N = 1e4 and
scaled by sqrt(1e4/N), chosen so that known-conforming sequences pass by an
order of magnitude and rational-log degeneracies fail by an order of
magnitude.  All thresholds are configuration, not constants of nature.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from .significand import SignedLogValue

__all__ = [
    "BENFORD_PROBABILITIES",
    "DigitHistogram",
    "ConformanceThresholds",
    "ConformanceReport",
    "InsufficientDataError",
    "digit_histogram",
    "ks_distance",
    "ks_to_benford",
    "weyl_magnitude",
    "chi_square",
    "benford_vector",
    "conformance_report",
]

# P(D1 = j) = log10((j+1)/j) for j = 1..9
BENFORD_PROBABILITIES = np.log10(1.0 + 1.0 / np.arange(1, 10))


class InsufficientDataError(ValueError):
    """Raised when a sequence is too short for a meaningful verdict."""


def _nonzero_fracs(seq: Sequence[SignedLogValue]) -> Tuple[np.ndarray, int]:
    fracs = [v.log_frac for v in seq if v.sign != 0]
    zeros = len(seq) - len(fracs)
    return np.asarray(fracs, dtype=float), zeros


@dataclass(frozen=True)
class DigitHistogram:
    """Counts of first significant digits 1..9; zero entries are tallied
    separately so sum(counts) + zeros_skipped == total."""

    counts: Tuple[int, ...]
    total: int
    zeros_skipped: int = 0

    def __post_init__(self):
        if len(self.counts) != 9 or any(c < 0 for c in self.counts):
            raise ValueError("counts must be 9 non-negative integers")
        if sum(self.counts) + self.zeros_skipped != self.total:
            raise ValueError("sum(counts) + zeros_skipped must equal total")

    @classmethod
    def from_digits(cls, digits: Iterable[int]) -> "DigitHistogram":
        counts = [0] * 9
        zeros = 0
        total = 0
        for d in digits:
            total += 1
            if d == 0:
                zeros += 1
            elif 1 <= d <= 9:
                counts[d - 1] += 1
            else:
                raise ValueError(f"digit out of range: {d!r}")
        return cls(tuple(counts), total, zeros)

    def frequencies(self) -> np.ndarray:
        """Digit frequencies relative to the full sample (zeros included in
        the denominator), so they sum to <= 1."""
        if self.total == 0:
            return np.zeros(9)
        return np.asarray(self.counts, dtype=float) / self.total

    def percentages(self) -> List[float]:
        return [100.0 * f for f in self.frequencies()]


def digit_histogram(seq: Sequence[SignedLogValue]) -> DigitHistogram:
    """First-digit histogram of a log-domain sequence.

    Digits come from floor(10^log_frac); for log-domain data this is exact up
    to one float step at digit boundaries.  Exact-integer pipelines should
    histogram their digits directly via ``DigitHistogram.from_digits``.
    """
    return DigitHistogram.from_digits(v.first_digit() for v in seq)


def _digits_of_fracs(fracs: np.ndarray) -> np.ndarray:
    s = 10.0 ** fracs
    # same ulp-snap as SignedLogValue.first_digit: integer significands
    # round-trip to one float step below the digit boundary
    r = np.rint(s)
    snapped = np.abs(s - r) < 4e-12 * s
    d = np.minimum(9, s.astype(int))
    r_digit = np.where(r == 10.0, 1, r).astype(int)
    return np.where(snapped & (r >= 1.0), r_digit, d)


def ks_to_benford(fracs: np.ndarray) -> float:
    """KS sup-distance of frac(log10|x|) samples against the uniform CDF,
    equivalently of significands against log10(t).  Exact sup over the sorted
    sample (both one-sided gaps at every jump)."""
    s = np.sort(np.asarray(fracs, dtype=float))
    n = len(s)
    if n == 0:
        raise ValueError("KS distance of an empty sample is undefined")
    i = np.arange(1, n + 1, dtype=float)
    d_plus = np.max(i / n - s)
    d_minus = np.max(s - (i - 1) / n)
    return float(max(d_plus, d_minus))


def ks_distance(seq: Sequence[SignedLogValue]) -> float:
    fracs, _ = _nonzero_fracs(seq)
    if len(fracs) == 0:
        raise ValueError("KS distance requires at least one nonzero element")
    return ks_to_benford(fracs)


def weyl_magnitude(seq: Sequence[SignedLogValue], h: int) -> float:
    """|1/N sum_n exp(2 pi i h log10|x_n|)| over the nonzero entries.

    Values near 0 for every h >= 1 witness equidistribution mod 1; the
    magnitude is scale-invariant because rescaling by a only rotates every
    phase by the same unit-modulus factor exp(2 pi i h log10|a|).
    """
    if not isinstance(h, int) or h < 1:
        raise ValueError(f"harmonic h must be a positive integer, got {h!r}")
    fracs, _ = _nonzero_fracs(seq)
    if len(fracs) == 0:
        raise ValueError("Weyl sum of an empty (or all-zero) sequence is undefined")
    z = np.exp(2j * np.pi * h * fracs)
    return float(abs(z.mean()))


def chi_square(hist: DigitHistogram) -> float:
    """Pearson chi-square of the digit counts against the Benford digit
    probabilities (8 degrees of freedom)."""
    n = sum(hist.counts)
    if n == 0:
        raise ValueError("chi-square of an empty histogram is undefined")
    expected = n * BENFORD_PROBABILITIES
    observed = np.asarray(hist.counts, dtype=float)
    return float(np.sum((observed - expected) ** 2 / expected))


def benford_vector(n: int) -> Tuple[int, ...]:
    """The integer vector (N_1..N_9), sum = n, closest in Euclidean distance
    to n * (log10 2, log10 3/2, ..., log10 10/9); ties toward smaller digits.

    Equivalent to floor apportionment plus one unit to the largest
    fractional parts, since granting digit j the extra unit changes the
    squared distance by 1 - 2*frac_j.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    target = n * BENFORD_PROBABILITIES
    base = np.floor(target).astype(int)
    remainder = int(n - base.sum())
    fracs = target - base
    # argsort is stable, so sorting by -frac breaks ties toward smaller digits
    order = np.argsort(-fracs, kind="stable")
    for j in order[:remainder]:
        base[j] += 1
    return tuple(int(c) for c in base)


@dataclass(frozen=True)
class ConformanceThresholds:
    """Acceptance thresholds, calibrated at reference_n and scaled by
    sqrt(reference_n / n) for other sample sizes."""

    ks_threshold: float = 0.03
    weyl_threshold: float = 0.05
    harmonics: int = 5
    reference_n: int = 10_000
    scale_with_n: bool = True

    def at(self, n: int) -> Tuple[float, float]:
        if n < 1:
            raise ValueError("sample size must be positive")
        s = math.sqrt(self.reference_n / n) if self.scale_with_n else 1.0
        return self.ks_threshold * s, self.weyl_threshold * s


DEFAULT_THRESHOLDS = ConformanceThresholds()

_MIN_SAMPLE = 100


@dataclass
class ConformanceReport:
    """Aggregate statistics plus a reproducible verdict.

    The verdict depends only on (ks, weyl magnitudes, thresholds): Pass iff
    ks <= ks threshold and every tested Weyl magnitude <= weyl threshold.
    """

    n: int
    ks: float
    weyl: List[Tuple[int, float]]
    chi2: float
    digit_freq: List[float]
    verdict: str
    zeros_skipped: int = 0
    thresholds: ConformanceThresholds = field(default_factory=lambda: DEFAULT_THRESHOLDS)

    @property
    def passed(self) -> bool:
        return self.verdict == "Pass"

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "ks": self.ks,
            "weyl": [[h, m] for h, m in self.weyl],
            "chi2": self.chi2,
            "digit_freq": list(self.digit_freq),
            "verdict": self.verdict,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n"

    def csv_header(self) -> str:
        weyl_cols = ",".join(f"weyl_h{h}" for h, _ in self.weyl)
        digit_cols = ",".join(f"d{j}" for j in range(1, 10))
        return f"n,ks,{weyl_cols},chi2,{digit_cols}"

    def to_csv_row(self) -> str:
        cells = [str(self.n), repr(self.ks)]
        cells += [repr(m) for _, m in self.weyl]
        cells.append(repr(self.chi2))
        cells += [repr(f) for f in self.digit_freq]
        return ",".join(cells)


def conformance_report(
    seq: Sequence[SignedLogValue],
    thresholds: ConformanceThresholds | None = None,
) -> ConformanceReport:
    """Full conformance report for a log-domain sequence.

    Requires at least 100 nonzero entries; zeros are excluded from every
    statistic but reported in ``zeros_skipped``.
    """
    thresholds = thresholds or DEFAULT_THRESHOLDS
    fracs, zeros = _nonzero_fracs(seq)
    return _report_from_fracs(fracs, zeros, thresholds)


def _report_from_fracs(
    fracs: np.ndarray, zeros: int, thresholds: ConformanceThresholds
) -> ConformanceReport:
    n = len(fracs)
    if n < _MIN_SAMPLE:
        raise InsufficientDataError(
            f"insufficient data: {n} nonzero elements, need at least {_MIN_SAMPLE}"
        )
    ks = ks_to_benford(fracs)
    z = np.exp(2j * np.pi * fracs)
    zh = np.ones_like(z)
    weyl = []
    for h in range(1, thresholds.harmonics + 1):
        zh = zh * z
        weyl.append((h, float(abs(zh.mean()))))
    digits = _digits_of_fracs(fracs)
    counts = np.bincount(digits, minlength=10)[1:10]
    hist = DigitHistogram(tuple(int(c) for c in counts), n + zeros, zeros)
    ks_thr, weyl_thr = thresholds.at(n)
    verdict = "Pass" if ks <= ks_thr and max(m for _, m in weyl) <= weyl_thr else "Fail"
    return ConformanceReport(
        n=n,
        ks=ks,
        weyl=weyl,
        chi2=chi_square(hist),
        digit_freq=list(hist.frequencies()),
        verdict=verdict,
        zeros_skipped=zeros,
        thresholds=thresholds,
    )

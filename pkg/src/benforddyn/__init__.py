"""benforddyn: significand statistics and Benford-law conformance testing
for dynamical systems.

The package is organized by system class:

* :mod:`benforddyn.significand` -- the log-domain value representation;
* :mod:`benforddyn.oracle` -- exact big-integer first-digit ground truth;
* :mod:`benforddyn.conformance` -- digit histograms, KS distance to the
  logarithmic law, Weyl sums, chi-square, integer apportionment, verdicts;
* :mod:`benforddyn.orbits` -- one-dimensional maps, Newton sequences, flows;
* :mod:`benforddyn.matrixdyn` -- matrix powers, linear recursions, Markov
  difference sequences;
* :mod:`benforddyn.stochasticdyn` -- random-variable powers, iid products,
  geometric Brownian motion;
* :mod:`benforddyn.twostep` -- the nonlinear two-step recursion
  x_n = a1 x_{n-1}^b1 + a2 x_{n-2}^b2: orbits, basins, boundary location,
  2-cycle limits, shadow constants, case analysis, sampled conformance;
* :mod:`benforddyn.cli` -- the ``benforddyn`` command.
"""

from .conformance import (
    BENFORD_PROBABILITIES,
    ConformanceReport,
    ConformanceThresholds,
    DigitHistogram,
    InsufficientDataError,
    benford_vector,
    chi_square,
    conformance_report,
    digit_histogram,
    ks_distance,
    weyl_magnitude,
)
from .significand import (
    SignedLogValue,
    first_digit,
    log_significand,
    significand,
    values_from_reals,
)

__version__ = "0.1.0"

__all__ = [
    "SignedLogValue",
    "significand",
    "first_digit",
    "log_significand",
    "values_from_reals",
    "BENFORD_PROBABILITIES",
    "DigitHistogram",
    "ConformanceReport",
    "ConformanceThresholds",
    "InsufficientDataError",
    "digit_histogram",
    "ks_distance",
    "weyl_magnitude",
    "chi_square",
    "benford_vector",
    "conformance_report",
    "__version__",
]

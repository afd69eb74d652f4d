import math

import numpy as np
import pytest
from mpmath import mp

from benforddyn import oracle
from benforddyn.conformance import (
    BENFORD_PROBABILITIES,
    ConformanceThresholds,
    DigitHistogram,
    InsufficientDataError,
    benford_vector,
    chi_square,
    conformance_report,
    digit_histogram,
    ks_distance,
    ks_to_benford,
    weyl_magnitude,
)
from benforddyn.significand import SignedLogValue, values_from_reals


def slv_from_fracs(fracs, mags=None):
    mags = fracs if mags is None else mags
    return [SignedLogValue(1, m, f) for m, f in zip(mags, fracs)]


def pow2_values(n):
    """(2^k) for k = 1..n with 50-digit fractional parts."""
    with mp.workprec(200):
        l2 = mp.log(2) / mp.log(10)
        out = []
        for k in range(1, n + 1):
            y = k * l2
            out.append(SignedLogValue(1, float(y), float(y - mp.floor(y))))
    return out


class TestDigitHistogram:
    def test_first_ten_powers_of_two(self):
        # derived from the exact oracle digits of 2^1..2^10
        digits = oracle.exact_first_digits(oracle.power_of_two(), 10)
        expected = DigitHistogram.from_digits(digits)
        computed = digit_histogram(values_from_reals([2.0 ** k for k in range(1, 11)]))
        assert computed == expected
        assert computed.counts == (3, 2, 1, 1, 1, 1, 0, 1, 0)

    def test_empty(self):
        hist = digit_histogram([])
        assert hist.counts == (0,) * 9 and hist.total == 0

    def test_zeros_skipped(self):
        hist = digit_histogram(values_from_reals([0.0, 0.0, 5.0]))
        assert hist.counts[4] == 1 and hist.zeros_skipped == 2 and hist.total == 3

    def test_sum_invariant_enforced(self):
        with pytest.raises(ValueError):
            DigitHistogram((1,) * 9, total=5, zeros_skipped=0)


class TestKS:
    def test_single_point_at_one(self):
        assert ks_distance([SignedLogValue.from_real(1.0)]) == 1.0

    def test_midriser_grid(self):
        for n in (10, 100, 1000):
            fracs = (np.arange(1, n + 1) - 0.5) / n
            assert ks_to_benford(fracs) == pytest.approx(1.0 / (2 * n), abs=1e-15)

    def test_exact_grid_halving(self):
        # significands 10^((i-1)/N): ks = 1/N, halving N doubles it
        ks_by_n = {}
        for n in (500, 1000, 2000):
            fracs = np.arange(n) / n
            ks_by_n[n] = ks_to_benford(fracs)
        assert ks_by_n[1000] == pytest.approx(1e-3, abs=1e-15)
        ratio = ks_by_n[500] / ks_by_n[1000]
        assert 2 / 1.5 < ratio < 2 * 1.5

    def test_powers_of_two_small(self):
        vals = pow2_values(10_000)
        ks = ks_distance(vals)
        assert ks < 0.01
        # dual route: same statistic from independently computed fracs
        with mp.workprec(200):
            l2 = mp.log(2) / mp.log(10)
            fracs = np.array(
                [float(k * l2 - mp.floor(k * l2)) for k in range(1, 10_001)]
            )
        assert ks == pytest.approx(ks_to_benford(fracs), abs=1e-12)

    def test_all_zero_rejected(self):
        with pytest.raises(ValueError):
            ks_distance([SignedLogValue(0)])


class TestWeyl:
    def test_constant_sequence(self):
        vals = values_from_reals([7.7] * 50)
        for h in (1, 2, 5):
            assert weyl_magnitude(vals, h) == pytest.approx(1.0, abs=1e-12)

    def test_full_period_grid(self):
        n = 256
        vals = slv_from_fracs(np.arange(n) / n)
        assert weyl_magnitude(vals, 1) == pytest.approx(0.0, abs=1e-12)

    def test_rotation_closed_form(self):
        # y_k = k * alpha: |sum| has the closed geometric-sum form
        n = 10_000
        alpha = math.log10(2.0)
        vals = pow2_values(n)
        for h in (1, 2, 3):
            expected = abs(
                math.sin(math.pi * n * h * alpha)
                / (n * math.sin(math.pi * h * alpha))
            )
            assert weyl_magnitude(vals, h) == pytest.approx(expected, abs=1e-9)
        assert weyl_magnitude(vals, 1) < 0.01

    def test_h_validation(self):
        vals = values_from_reals([1.5, 2.5])
        with pytest.raises(ValueError):
            weyl_magnitude(vals, 0)
        with pytest.raises(ValueError):
            weyl_magnitude([SignedLogValue(0)], 1)

    def test_scale_invariance(self):
        rng = np.random.default_rng(7)
        vals = values_from_reals(rng.lognormal(0, 3, size=400))
        for a in (2.0, -7.3, 1e-5):
            scaled = [v.scaled(a) for v in vals]
            for h in (1, 3, 5):
                assert weyl_magnitude(scaled, h) == pytest.approx(
                    weyl_magnitude(vals, h), abs=1e-12
                )

    def test_sign_invariance(self):
        rng = np.random.default_rng(8)
        vals = values_from_reals(rng.lognormal(0, 3, size=300))
        negated = [v.negated() for v in vals]
        assert weyl_magnitude(negated, 2) == weyl_magnitude(vals, 2)
        assert ks_distance(negated) == ks_distance(vals)


class TestBenfordVector:
    def test_reference_rows(self):
        assert benford_vector(100) == (30, 18, 12, 10, 8, 7, 6, 5, 4)
        assert benford_vector(1000) == (301, 176, 125, 97, 79, 67, 58, 51, 46)
        assert benford_vector(10_000) == (3010, 1761, 1249, 969, 792, 669, 580, 512, 458)

    def test_sum_identity(self):
        for n in (1, 2, 9, 17, 100, 12345):
            assert sum(benford_vector(n)) == n

    def test_optimality_against_brute_force(self):
        # small n: the returned vector beats (or ties) every neighbor move
        for n in (7, 23, 64):
            vec = np.array(benford_vector(n))
            target = n * BENFORD_PROBABILITIES
            base_cost = np.sum((vec - target) ** 2)
            for i in range(9):
                for j in range(9):
                    if i == j or vec[j] == 0:
                        continue
                    alt = vec.copy()
                    alt[i] += 1
                    alt[j] -= 1
                    assert np.sum((alt - target) ** 2) >= base_cost - 1e-9


class TestChiSquare:
    def test_fibonacci_reference(self):
        hist = oracle.exact_digit_histogram(oracle.fibonacci(), 10_000)
        assert chi_square(hist) < 15.51  # 5% critical value, 8 dof

    def test_uniform_digits_fail_hard(self):
        hist = DigitHistogram.from_digits([d for d in range(1, 10)] * 100)
        assert chi_square(hist) > 100.0


class TestReport:
    def test_powers_of_two_pass(self):
        report = conformance_report(pow2_values(10_000))
        assert report.verdict == "Pass"
        assert report.n == 10_000
        assert report.ks < 0.01
        assert max(m for _, m in report.weyl) < 0.05

    def test_powers_of_ten_fail(self):
        vals = slv_from_fracs(np.zeros(1000), np.arange(1, 1001, dtype=float))
        report = conformance_report(vals)
        assert report.verdict == "Fail"
        assert report.ks >= 0.69

    def test_digit_sequence_fails(self):
        # first digits of 2^n, taken as integers: right digit frequencies,
        # wrong significand distribution
        digits = oracle.exact_first_digits(oracle.power_of_two(), 10_000)
        report = conformance_report(values_from_reals([float(d) for d in digits]))
        assert report.verdict == "Fail"

    def test_insufficient_data(self):
        with pytest.raises(InsufficientDataError, match="insufficient data"):
            conformance_report(values_from_reals([2.0] * 99))

    def test_threshold_scaling(self):
        t = ConformanceThresholds()
        ks_thr, weyl_thr = t.at(100)
        assert ks_thr == pytest.approx(0.3) and weyl_thr == pytest.approx(0.5)
        assert t.at(10_000) == (pytest.approx(0.03), pytest.approx(0.05))

    def test_json_fields(self):
        report = conformance_report(pow2_values(200))
        payload = report.to_json_dict()
        assert sorted(payload) == ["chi2", "digit_freq", "ks", "n", "verdict", "weyl"]
        assert payload["weyl"][0][0] == 1
        assert len(payload["digit_freq"]) == 9

    def test_csv_row_shape(self):
        report = conformance_report(pow2_values(200))
        header = report.csv_header().split(",")
        row = report.to_csv_row().split(",")
        assert len(header) == len(row) == 2 + 5 + 1 + 9
        assert header[0] == "n" and header[2] == "weyl_h1" and header[-1] == "d9"

    def test_zeros_reported_not_counted(self):
        vals = pow2_values(300) + [SignedLogValue(0)] * 5
        report = conformance_report(vals)
        assert report.zeros_skipped == 5 and report.n == 300

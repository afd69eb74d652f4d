"""Acceptance gate: one test per criterion, at its stated tolerance.

Each test prints a single PASS/FAIL line (run with ``pytest -s`` to see them
live); a FAIL line is always followed by the pytest assertion failure.
Criteria with a runtime budget assert the elapsed wall time as well.
"""

import math
import time
from contextlib import contextmanager

import numpy as np

from benforddyn import oracle
from benforddyn.conformance import (
    benford_vector,
    conformance_report,
    digit_histogram,
    ks_distance,
    weyl_magnitude,
)
from benforddyn.matrixdyn import (
    RecursionSpec,
    linear_recursion,
    markov_sequences,
    matrix_power_entries,
    random_stochastic_matrix,
)
from benforddyn.orbits import MapSpec, iterate_map
from benforddyn.significand import SignedLogValue, values_from_reals
from benforddyn.stochasticdyn import (
    DistSpec,
    GBMSpec,
    distribution_ks_at_n,
    gbm_terminal_log10,
    iid_product_path,
    make_generator,
    rv_power_path,
)
from benforddyn.twostep import (
    BasinKind,
    TwoStepParams,
    benford_fraction,
    boundary_on_ray,
    classify_basin,
    cycle2_limit,
    delta_limits,
    orbit_log,
    r0_fixed_points,
    shadow_h_case_one,
    shadow_h_case_three,
    shadow_limit,
)
from benforddyn.conformance import ks_to_benford

DIAG = (1.0 / math.sqrt(2.0), 1.0 / math.sqrt(2.0))


@contextmanager
def criterion(cid: int, name: str, budget_s: float | None = None):
    start = time.perf_counter()
    state = {"detail": ""}
    try:
        yield state
    except BaseException:
        elapsed = time.perf_counter() - start
        print(f"ACCEPTANCE {cid:2d} [{name}] FAIL ({elapsed:.1f}s) {state['detail']}")
        raise
    elapsed = time.perf_counter() - start
    print(f"ACCEPTANCE {cid:2d} [{name}] PASS ({elapsed:.1f}s) {state['detail']}")
    if budget_s is not None:
        assert elapsed < budget_s, f"runtime {elapsed:.1f}s exceeded budget {budget_s}s"


def test_criterion_01_reference_digit_percentages():
    with criterion(1, "exact digit table at N=1e4", budget_s=30.0) as st:
        n = 10_000
        golden = {
            "pow2": [30.10, 17.61, 12.49, 9.70, 7.91, 6.70, 5.79, 5.12, 4.58],
            "fib": [30.11, 17.62, 12.50, 9.68, 7.92, 6.68, 5.80, 5.13, 4.56],
            "fact": [29.56, 17.89, 12.76, 9.63, 7.94, 7.15, 5.71, 5.10, 4.26],
        }
        kinds = {
            "pow2": oracle.power_of_two(),
            "fib": oracle.fibonacci(),
            "fact": oracle.factorial(),
        }
        for key, kind in kinds.items():
            hist = oracle.exact_digit_histogram(kind, n)
            pct = [round(100.0 * c / n, 2) for c in hist.counts]
            assert pct == golden[key], key
        st["detail"] = "three sequences match after 2-decimal rounding"


def test_criterion_02_fibonacci_counts_and_apportionment():
    with criterion(2, "Fibonacci counts + integer apportionment", budget_s=10.0) as st:
        digits = oracle.exact_first_digits(oracle.fibonacci(), 10_000)
        golden_counts = {
            100: (30, 18, 13, 9, 8, 6, 5, 7, 4),
            1000: (301, 177, 125, 96, 80, 67, 56, 53, 45),
            10_000: (3011, 1762, 1250, 968, 792, 668, 580, 513, 456),
        }
        golden_vectors = {
            100: (30, 18, 12, 10, 8, 7, 6, 5, 4),
            1000: (301, 176, 125, 97, 79, 67, 58, 51, 46),
            10_000: (3010, 1761, 1249, 969, 792, 669, 580, 512, 458),
        }
        for n, counts in golden_counts.items():
            from benforddyn.conformance import DigitHistogram

            assert DigitHistogram.from_digits(digits[:n]).counts == counts
            assert benford_vector(n) == golden_vectors[n]
        st["detail"] = "all six rows exact"


def test_criterion_03_log_domain_matches_oracle():
    with criterion(3, "log-domain digits vs exact oracle") as st:
        n = 10_000
        # powers of two through the longdouble linear path
        idx = np.arange(1, n + 1, dtype=np.longdouble)
        fr = (idx * np.log10(np.longdouble(2.0))) % np.longdouble(1.0)
        pow2_vals = [SignedLogValue(1, float(m), float(f)) for m, f in zip(idx, fr)]
        pow2_digits = [v.first_digit() for v in pow2_vals]
        mism_pow2 = sum(
            a != b
            for a, b in zip(pow2_digits, oracle.exact_first_digits(oracle.power_of_two(), n))
        )
        # Fibonacci through the scale-and-accumulate recursion path
        seq, _ = linear_recursion(RecursionSpec((1.0, 1.0), (1.0, 1.0)), n)
        fib_digits = [v.first_digit() for v in seq]
        mism_fib = sum(
            a != b
            for a, b in zip(fib_digits, oracle.exact_first_digits(oracle.fibonacci(), n))
        )
        assert mism_pow2 <= 5, mism_pow2
        assert mism_fib <= 5, mism_fib
        st["detail"] = f"mismatches: pow2={mism_pow2}, fib={mism_fib} (allowed 5)"


def test_criterion_04_contraction_multiplier_dichotomy():
    with criterion(4, "contraction orbit dichotomy", budget_s=5.0) as st:
        good = iterate_map(MapSpec.contraction_fixed_point(0.1), 0.05, 10_000)
        ks_good = ks_distance(good)
        assert ks_good < 0.03, ks_good
        bad = iterate_map(MapSpec.contraction_fixed_point(0.9), 0.05, 10_000)
        ks_bad = ks_distance(bad)
        assert ks_bad > 0.1, ks_bad
        st["detail"] = f"ks: multiplier 0.9 -> {ks_good:.4f}, multiplier 0.1 -> {ks_bad:.3f}"


def test_criterion_05_boundary_constants():
    with criterion(5, "basin boundary and 2-cycle constants", budget_s=10.0) as st:
        quad = TwoStepParams(1, 1, 2, 2)
        quad4 = TwoStepParams(1, 4, 2, 2)
        r = boundary_on_ray(quad, DIAG, tol=1e-9)
        assert abs(r * DIAG[0] - 0.5) < 1e-6
        assert abs(r * DIAG[1] - 0.5) < 1e-6
        r4 = boundary_on_ray(quad4, DIAG, tol=1e-9)
        assert abs(r4 * DIAG[0] - 0.2) < 1e-6
        u, v = 2.0 / math.sqrt(5.0), 1.0 / math.sqrt(5.0)
        r_off = boundary_on_ray(quad4, (u, v), tol=1e-12)
        p, q = cycle2_limit(quad4, r_off * u, r_off * v)
        assert abs(p - (5.0 + math.sqrt(5.0)) / 30.0) < 1e-8
        assert abs(q - (5.0 - math.sqrt(5.0)) / 30.0) < 1e-8
        st["detail"] = f"diag 0.5 / 0.2, cycle ({p:.9f}, {q:.9f})"


def test_criterion_06_extended_mode_constants():
    with criterion(6, "extended-mode attractor and threshold") as st:
        exom = TwoStepParams(1.0, 0.25, 2, "0.5")
        rng = make_generator(606)
        for _ in range(10):
            x1, x2 = rng.uniform(0.1, 0.6, size=2)
            vals = orbit_log(exom, float(x1), float(x2), 400)
            assert abs(vals[-1].to_real() - 0.07268) < 5e-4
        r = boundary_on_ray(exom, DIAG, tol=1e-8)
        assert abs(r / math.sqrt(2.0) - 0.7015) < 5e-4
        st["detail"] = f"attractor 0.07268, diagonal threshold {r / math.sqrt(2.0):.6f}"


def test_criterion_07_sampled_conformance_fractions():
    with criterion(7, "sampled conformance in both basins", budget_s=300.0) as st:
        quad = TwoStepParams(1, 1, 2, 2)
        hi = benford_fraction(quad, (1.5, 3.0, 1.5, 3.0), 100, 10_000, seed=701)
        assert hi.totals.get("AInfty") == 100, hi.totals
        assert hi.fraction("AInfty") >= 0.95, hi.fractions
        lo = benford_fraction(quad, (0.05, 0.3, 0.05, 0.3), 100, 10_000, seed=702)
        assert lo.totals.get("A0") == 100, lo.totals
        assert lo.fraction("A0") >= 0.95, lo.fractions
        boundary = conformance_report(orbit_log(quad, 0.5, 0.5, 2000))
        assert boundary.verdict == "Fail"
        assert classify_basin(quad, 0.5, 0.5).label is BasinKind.BOUNDARY_UNDECIDED
        st["detail"] = (
            f"fractions: escape {hi.fraction('AInfty'):.2f}, "
            f"decay {lo.fraction('A0'):.2f}; boundary orbit fails"
        )


def test_criterion_08_shadowing_certificates():
    with criterion(8, "shadowing certificates") as st:
        # geometric input reproduced exactly
        geo = shadow_limit(3.0, [0.75 * 3.0 ** k for k in range(1, 25)])
        assert geo.y_hat == 0.75
        assert max(abs(rv) for rv in geo.residuals) < 1e-12
        # one-step-dominant shadow constant
        quad = TwoStepParams(1, 1, 2, 2)
        h1 = shadow_h_case_one(quad, math.log10(2.0), math.log10(2.0))
        y10 = orbit_log(quad, 2.0, 2.0, 8)[-1].log_mag
        assert abs(y10 - 2.0 ** 8 * h1) < 1e-6
        # two-step-dominant shadow constant on the even subsequence
        case3 = TwoStepParams(1, 1, "1.2", 2)
        h3 = shadow_h_case_three(case3, math.log10(5.0), math.log10(5.0))
        y20 = orbit_log(case3, 5.0, 5.0, 18)[-1].log_mag
        assert abs(y20 - 2.0 ** 9 * h3) < 1e-6
        st["detail"] = (
            f"|y10 - 256 h| = {abs(y10 - 256 * h1):.2e}, "
            f"|y20 - 512 h| = {abs(y20 - 512 * h3):.2e}"
        )


def test_criterion_09_markov_chains():
    with criterion(9, "random two-state chains", budget_s=300.0) as st:
        passes = 0
        for seed in range(100):
            p = random_stochastic_matrix(2, make_generator(9000 + seed))
            x, y = p[0, 1], p[1, 0]
            res = markov_sequences(p, 1, 1, 10_000)
            expected = np.array([[y, x], [y, x]]) / (x + y)
            assert np.max(np.abs(res.p_star - expected)) < 1e-12, seed
            if conformance_report(res.diff).verdict == "Pass":
                passes += 1
        assert passes >= 90, passes
        st["detail"] = f"stationary rows exact (1e-12) on 100 seeds; diff passes {passes}/100"


def test_criterion_10_stochastic_suite():
    with criterion(10, "stochastic suite", budget_s=300.0) as st:
        uniform = DistSpec.uniform(0.0, 1.0)
        power_pass = sum(
            conformance_report(
                rv_power_path(uniform, make_generator(1000 + s), 10_000)
            ).verdict
            == "Pass"
            for s in range(100)
        )
        product_pass = sum(
            conformance_report(
                iid_product_path(uniform, make_generator(2000 + s), 10_000)
            ).verdict
            == "Pass"
            for s in range(100)
        )
        assert power_pass >= 95, power_pass
        assert product_pass >= 95, product_pass
        spec = GBMSpec(mu=0.0, sigma=1.0, x0=1.0, t_end=100.0, dt=0.01)
        logs = gbm_terminal_log10(spec, 100.0, 100_000, make_generator(31415))
        gbm_ks = ks_to_benford(logs % 1.0)
        assert gbm_ks < 0.01, gbm_ks
        cantor_ks = []
        for k in range(1, 6):
            res = distribution_ks_at_n(
                DistSpec.cantor10(), 3 ** k, 100_000, make_generator(4000 + k)
            )
            cantor_ks.append(res.ks)
            assert res.ks > 0.05, (k, res.ks)
        st["detail"] = (
            f"power {power_pass}/100, product {product_pass}/100, "
            f"terminal KS {gbm_ks:.4f}, ternary-power KS min {min(cantor_ks):.3f}"
        )


def test_criterion_11_property_suite():
    with criterion(11, "property suite", budget_s=300.0) as st:
        # Weyl scale invariance, exact to 1e-12
        rng = make_generator(117)
        vals = values_from_reals(rng.lognormal(0, 3, size=1000))
        for a in (2.0, 37.5, -0.004):
            scaled = [v.scaled(a) for v in vals]
            for h in range(1, 6):
                assert abs(
                    weyl_magnitude(scaled, h) - weyl_magnitude(vals, h)
                ) < 1e-12
        # sign invariance: identical statistics under negation
        negated = [v.negated() for v in vals]
        assert ks_distance(negated) == ks_distance(vals)
        assert weyl_magnitude(negated, 3) == weyl_magnitude(vals, 3)
        # histogram and apportionment sum identities
        hist = digit_histogram(vals + [SignedLogValue(0)] * 7)
        assert sum(hist.counts) + hist.zeros_skipped == hist.total
        for n in (1, 10, 99, 1234, 10_000):
            assert sum(benford_vector(n)) == n
        # exact-arithmetic agreement of matrix powers with the oracle
        entries = matrix_power_entries([[1, 1], [1, 0]], 1, 1, 90, exact=True)
        fib_digits = oracle.exact_first_digits(oracle.fibonacci(), 91)
        assert [v.first_digit() for v in entries] == fib_digits[1:91]
        # gap-limit dichotomy over 100 seeds: never both subsequences finite,
        # and every finite limit is a fixed point of the scalar gap map
        p3 = TwoStepParams(0.1, 1.0, "1.2", 2)
        fps = r0_fixed_points(p3)
        finite_count = 0
        rng2 = make_generator(1119)
        for _ in range(100):
            x1 = float(rng2.uniform(1.05, 20.0))
            x2 = float(rng2.uniform(1.05, 20.0))
            if classify_basin(p3, x1, x2).label is not BasinKind.A_INFTY:
                continue
            odd, even = delta_limits(p3, x1, x2)
            assert math.isinf(odd) or math.isinf(even), (x1, x2)
            for lim in (odd, even):
                if math.isfinite(lim):
                    finite_count += 1
                    assert min(abs(lim - r) for r in fps) < 1e-6, (x1, x2, lim)
        st["detail"] = f"all green; {finite_count} finite gap limits, all on fixed points"

import math

import numpy as np
import pytest

from benforddyn.conformance import (
    ConformanceThresholds,
    conformance_report,
    weyl_magnitude,
)
from benforddyn.orbits import (
    FlowSpec,
    MapSpec,
    NEWTON_ROOT,
    OrbitEscapeError,
    flow_log_samples,
    flow_occupation,
    iterate_map,
    newton_sequences,
)


class TestMapSpecValidation:
    def test_affine_requires_expanding(self):
        with pytest.raises(ValueError):
            MapSpec.affine_plus(1.0)

    def test_power_requires_superlinear(self):
        with pytest.raises(ValueError):
            MapSpec.power_plus(1.0, 1.0)
        with pytest.raises(ValueError):
            MapSpec.power_plus(-1.0, 2.0)

    def test_contraction_multiplier_range(self):
        with pytest.raises(ValueError):
            MapSpec.contraction_fixed_point(1.0)  # multiplier would be 0
        with pytest.raises(ValueError):
            MapSpec.contraction_fixed_point(2.5)

    def test_unknown_family(self):
        with pytest.raises(ValueError):
            MapSpec("does_not_exist")


class TestAffine:
    def test_doubling_orbit_values(self):
        vals = iterate_map(MapSpec.affine_plus(2.0), 1.0, 4)
        assert [v.to_real() for v in vals] == pytest.approx([2, 4, 8, 16], rel=1e-14)
        assert [v.first_digit() for v in vals] == [2, 4, 8, 1]

    def test_doubling_passes_and_decade_fails(self):
        two = iterate_map(MapSpec.affine_plus(2.0), 1.0, 10_000)
        assert conformance_report(two).verdict == "Pass"
        ten = iterate_map(MapSpec.affine_plus(10.0), 1.0, 10_000)
        report = conformance_report(ten)
        assert report.verdict == "Fail"
        assert report.weyl[0][1] == pytest.approx(1.0, abs=1e-9)

    def test_additive_term_does_not_spoil(self):
        # T(x) = 2x + e^(-x)
        vals = iterate_map(MapSpec.affine_plus(2.0, g="exp_decay"), 0.3, 10_000)
        assert conformance_report(vals).verdict == "Pass"


class TestContraction:
    def test_multiplier_dichotomy(self):
        good = iterate_map(MapSpec.contraction_fixed_point(0.1), 0.05, 4000)
        bad = iterate_map(MapSpec.contraction_fixed_point(0.9), 0.05, 4000)
        assert conformance_report(good).ks < 0.03 * math.sqrt(10_000 / 4000)
        assert conformance_report(bad).ks > 0.1

    def test_alternating_side(self):
        # a in (1, 2): the multiplier 1 - a is negative and iterates alternate
        vals = iterate_map(MapSpec.contraction_fixed_point(1.5), 0.01, 2000)
        signs = {v.sign for v in vals[1500:]}
        assert signs == {-1, 1}


class TestTent:
    def test_escape_orbit_doubles_negatively(self):
        vals = iterate_map(MapSpec.tent(), 2.5, 10_000)
        assert [v.to_real() for v in vals[:3]] == pytest.approx(
            [-3, -6, -12], rel=1e-13
        )
        assert conformance_report(vals).verdict == "Pass"

    def test_interior_float_orbit_degenerates(self):
        # Exploratory: the interval [0, 1] is invariant and the conforming
        # starts form a nullset there; in double arithmetic the binary
        # structure of the map collapses every float orbit onto 0 within
        # ~60 steps, so there is not even enough nonzero data for a verdict.
        from benforddyn.conformance import InsufficientDataError

        vals = iterate_map(MapSpec.tent(), 1.0 / math.pi, 2000)
        tail = vals[100:]
        assert all(v.sign == 0 for v in tail)
        with pytest.raises(InsufficientDataError):
            conformance_report(vals)


class TestPowerPlus:
    def test_quadratic_plus_one_passes(self):
        vals = iterate_map(MapSpec.power_plus(1.0, 2.0, g="one"), 1.0, 10_000)
        assert [round(v.to_real()) for v in vals[:4]] == [2, 5, 26, 677]
        assert conformance_report(vals).verdict == "Pass"

    def test_log_native_agreement(self):
        # overlap window: both native iteration and the log recursion valid
        # (native doubles overflow after ~11 squarings from this seed)
        spec = MapSpec.power_plus(1.0, 2.0, g="one")
        vals = iterate_map(spec, 1.5, 25)
        x = 1.5
        for v in vals:
            x = x * x + 1.0
            assert v.log_mag == pytest.approx(math.log10(x), rel=1e-9)
            if x > 1e100:
                break

    def test_decaying_branch(self):
        # pure power map with small seed decays to 0 at rate b
        vals = iterate_map(MapSpec.power_plus(1.0, 2.0), 0.5, 3000)
        assert vals[-1].log_mag < -1e100
        assert conformance_report(vals).verdict == "Pass"

    def test_bounded_orbit_stays_float(self):
        # tiny coefficient pins the orbit near the fixed point of a x^2 + 1
        vals = iterate_map(MapSpec.power_plus(1e-3, 2.0, g="one"), 1.0, 500)
        mags = [v.log_mag for v in vals]
        assert max(abs(m) for m in mags) < 1.0


class TestAnalyticFlat:
    def test_matches_direct_iteration(self):
        vals = iterate_map(MapSpec.analytic_flat(), 2.0, 12)
        x = 2.0
        for v in vals:
            x = x + math.expm1(-x)
            assert v.to_real() == pytest.approx(x, rel=1e-12)

    def test_quadratic_decay_conforms(self):
        vals = iterate_map(MapSpec.analytic_flat(), 2.0, 3000)
        assert vals[-1].log_mag < -1e100
        assert conformance_report(vals).verdict == "Pass"

    def test_negative_start_recovers(self):
        # T(-1) = -2 + e > 0: one step lands in the decay funnel
        vals = iterate_map(MapSpec.analytic_flat(), -1.0, 1500)
        assert vals[0].to_real() == pytest.approx(math.e - 2.0, rel=1e-12)
        assert conformance_report(vals).verdict == "Pass"

    def test_slow_descent_from_large_start(self):
        # x drops by ~1 per step until the quadratic regime takes over
        vals = iterate_map(MapSpec.analytic_flat(), 30.0, 2000)
        assert conformance_report(vals).verdict == "Pass"


class TestNonAutonomous:
    def test_linear_rule_passes_and_scale_invariant(self):
        spec = MapSpec.nonauto_linear()
        vals = iterate_map(spec, 1.0, 10_000)
        assert vals[0].to_real() == pytest.approx(3.0, rel=1e-14)
        assert conformance_report(vals).verdict == "Pass"
        scaled = iterate_map(spec, 7.0, 10_000)
        for h in range(1, 6):
            assert weyl_magnitude(scaled, h) == pytest.approx(
                weyl_magnitude(vals, h), abs=1e-12
            )

    def test_power_rule_mass_of_starts(self):
        # T_n(x) = 2^n x^2; most starts conform
        spec = MapSpec.nonauto_power()
        thresholds = ConformanceThresholds()
        rng = np.random.default_rng(2024)
        passed = 0
        for _ in range(100):
            x0 = rng.uniform(1.0, 10.0)
            vals = iterate_map(spec, x0, 2000)
            if conformance_report(vals, thresholds).verdict == "Pass":
                passed += 1
        assert passed >= 95


class TestExponential:
    def test_tower_truncation(self):
        with pytest.raises(OrbitEscapeError) as err:
            iterate_map(MapSpec.exponential(), 3.0, 50)
        assert len(err.value.values) < 50
        truncated = iterate_map(MapSpec.exponential(), 3.0, 50, allow_truncation=True)
        assert truncated == err.value.values
        assert truncated[0].to_real() == pytest.approx(math.exp(3.0), rel=1e-13)


class TestNewton:
    def test_root_refusal(self):
        with pytest.raises(ValueError, match="degenerate"):
            newton_sequences("exp_minus_2", NEWTON_ROOT, 10)

    def test_neighborhood_refusal(self):
        with pytest.raises(ValueError, match="neighbourhood"):
            newton_sequences("exp_minus_2", 4.0, 10)

    def test_unknown_function(self):
        with pytest.raises(ValueError):
            newton_sequences("cosine", 1.0, 10)

    def test_triple_root_sequences_conform(self):
        seqs = newton_sequences("exp_minus_2_cubed", 1.0, 5000)
        assert conformance_report(seqs.errors).verdict == "Pass"
        assert conformance_report(seqs.diffs).verdict == "Pass"

    def test_triple_root_diff_error_consistency(self):
        # diffs must be the literal difference sequence while representable
        seqs = newton_sequences("exp_minus_2_cubed", 1.0, 40)
        eps = 1.0 - NEWTON_ROOT
        for k in range(40):
            nxt = eps + math.expm1(-eps) / 3.0
            assert seqs.diffs[k].to_real() == pytest.approx(nxt - eps, rel=1e-12)
            assert seqs.errors[k].to_real() == pytest.approx(nxt, rel=1e-12)
            eps = nxt

    def test_triple_root_tail_ratio(self):
        # deep in the linear tail, consecutive errors sit at ratio 2/3 and
        # diffs at 1/3 of the entering error
        seqs = newton_sequences("exp_minus_2_cubed", 1.0, 3000)
        e = seqs.errors
        d = seqs.diffs
        for k in (2500, 2700, 2900):
            assert e[k].log_mag - e[k - 1].log_mag == pytest.approx(
                math.log10(2.0 / 3.0), abs=1e-12
            )
            assert d[k].log_mag - e[k - 1].log_mag == pytest.approx(
                math.log10(1.0 / 3.0), abs=1e-10
            )

    def test_simple_root_asymptotic_mode(self):
        seqs = newton_sequences("exp_minus_2", 1.0, 300)
        report = conformance_report(seqs.errors)
        assert report.verdict == "Pass"
        # errors decay doubly exponentially: log-magnitude ratio ~ 2
        mags = [v.log_mag for v in seqs.errors[-5:]]
        ratios = [mags[i + 1] / mags[i] for i in range(4)]
        assert all(r == pytest.approx(2.0, rel=1e-3) for r in ratios)

    def test_simple_root_mass_of_starts(self):
        rng = np.random.default_rng(12345)
        passed = 0
        total = 100
        for _ in range(total):
            x0 = NEWTON_ROOT + rng.uniform(-0.5, 0.5)
            if abs(x0 - NEWTON_ROOT) < 1e-4:
                continue
            seqs = newton_sequences("exp_minus_2", x0, 300)
            if conformance_report(seqs.errors).verdict == "Pass":
                passed += 1
        assert passed >= 90


class TestFlows:
    def test_linear_flow_occupation(self):
        spec = FlowSpec("linear", 1.0, 100.0 * math.log(10.0))
        occ = flow_occupation(spec, [2.0])
        assert occ[0] == pytest.approx(math.log10(2.0), abs=0.005)

    def test_sqrt_quad_from_origin(self):
        spec = FlowSpec("sqrt_quad", 0.0, 400.0)
        occ = flow_occupation(spec, [2.0, 5.0])
        assert occ[0] == pytest.approx(math.log10(2.0), abs=0.01)
        assert occ[1] == pytest.approx(math.log10(5.0), abs=0.01)

    def test_damped_decay(self):
        spec = FlowSpec("damped_rational", 1.0, 400.0)
        occ = flow_occupation(spec, [2.0, 5.0])
        assert occ[0] == pytest.approx(math.log10(2.0), abs=0.01)
        assert occ[1] == pytest.approx(math.log10(5.0), abs=0.01)

    def test_log_samples_conform(self):
        samples = flow_log_samples(FlowSpec("linear", 1.0, 700.0))
        assert len(samples) == 20_000
        assert conformance_report(samples).verdict == "Pass"
        down = flow_log_samples(FlowSpec("damped_rational", 1.0, 700.0))
        assert conformance_report(down).verdict == "Pass"

    def test_target_validation(self):
        with pytest.raises(ValueError):
            flow_occupation(FlowSpec("linear", 1.0, 300.0), [0.5])

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            FlowSpec("linear", 1.0, -1.0)
        with pytest.raises(ValueError):
            FlowSpec("linear", 1.0, 100.0, dt=1.0)  # too few samples

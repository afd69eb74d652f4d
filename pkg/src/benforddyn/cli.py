"""Command-line front end: experiment configs, reference-table reproduction,
and report emission.

One binary, one subcommand per concern, batch semantics: exit code 0 means
the run completed and (where a verdict applies) the sequence passed
conformance, 2 flags a conformance Fail for scripting, 1 is an error.

``run`` consumes a JSON experiment config (see :class:`ExperimentConfig`)
and writes a deterministic ``report.json`` plus an ``orbit.csv`` dump with
columns (n, sign, log_mag, first_digit).  Digit frequencies for the three
integer reference sequences come from the exact big-integer oracle while
KS/Weyl statistics come from the log-domain path, so the report is itself a
dual-route check.

``reproduce`` regenerates the bundled reference tables:

* fig1 -- first-digit percentages of 2^n, Fibonacci, n! at N = 1e4 against
  the exact logarithmic-law row;
* fig1a -- Fibonacci digit counts at N = 1e2, 1e3, 1e4 with the nearest
  integer apportionment of the digit-law proportions;
* fig2-boundary -- a 360-ray polar scan of the basin boundary of
  x_n = x_{n-1}^2 + x_{n-2}^2 in the open positive quadrant (plot-ready CSV).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from decimal import ROUND_FLOOR, ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import List, Sequence, Tuple

import numpy as np

from . import conformance, matrixdyn, oracle, orbits, stochasticdyn, twostep
from .conformance import ConformanceThresholds, ConformanceReport
from .logdomain import slv_from_log10
from .significand import SignedLogValue

__all__ = ["ExperimentConfig", "run", "reproduce", "main"]


_SYSTEM_KINDS = (
    "power_of_two",
    "fibonacci",
    "factorial",
    "linear_recursion",
    "map",
    "newton",
    "flow",
    "matrix_power",
    "markov",
    "rv_power",
    "iid_product",
    "gbm",
    "gbm_ensemble",
    "twostep",
)


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: a tagged system description plus run controls.

    Canonical JSON form: keys sorted, two-space indent, floats in shortest
    round-trip notation; ``to_json`` of a parsed config reproduces the
    canonical bytes exactly, which the CLI relies on for reproducible
    artifacts.
    """

    system: dict
    n: int
    seed: int = 0
    thresholds: dict = field(default_factory=dict)
    out_prefix: str = ""

    def __post_init__(self):
        kind = self.system.get("kind")
        if kind not in _SYSTEM_KINDS:
            raise ValueError(
                f"config error at system.kind: {kind!r} is not one of {_SYSTEM_KINDS}"
            )
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError("config error at n: must be a positive integer")

    def conformance_thresholds(self) -> ConformanceThresholds:
        t = self.thresholds
        return ConformanceThresholds(
            ks_threshold=float(t.get("ks", 0.03)),
            weyl_threshold=float(t.get("weyl", 0.05)),
            harmonics=int(t.get("harmonics", 5)),
        )

    def to_json(self) -> str:
        payload = {
            "system": self.system,
            "n": self.n,
            "seed": self.seed,
            "thresholds": self.thresholds,
            "out_prefix": self.out_prefix,
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        raw = json.loads(text)
        known = {"system", "n", "seed", "thresholds", "out_prefix"}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"config error: unknown top-level fields {sorted(unknown)}")
        if "system" not in raw or "n" not in raw:
            raise ValueError("config error: 'system' and 'n' are required")
        return cls(
            system=raw["system"],
            n=raw["n"],
            seed=raw.get("seed", 0),
            thresholds=raw.get("thresholds", {}),
            out_prefix=raw.get("out_prefix", ""),
        )


# ---------------------------------------------------------------------------
# sequence assembly per system kind


def _require(system: dict, key: str):
    if key not in system:
        raise ValueError(f"config error at system.{key}: missing")
    return system[key]


def _oracle_logpath_fracs(kind: str, system: dict, n: int):
    """(exact digit histogram, log-domain fracs) for the integer references."""
    if kind == "power_of_two":
        hist = oracle.exact_digit_histogram(oracle.power_of_two(), n)
        idx = np.arange(1, n + 1, dtype=np.longdouble)
        y = idx * np.log10(np.longdouble(2.0))
    elif kind == "fibonacci":
        seeds = tuple(system.get("seeds", (1, 1)))
        hist = oracle.exact_digit_histogram(oracle.fibonacci(seeds), n)
        seq, _ = matrixdyn.linear_recursion(
            matrixdyn.RecursionSpec((1.0, 1.0), (float(seeds[0]), float(seeds[1]))), n
        )
        return hist, np.asarray([v.log_frac for v in seq]), np.asarray(
            [v.log_mag for v in seq]
        )
    elif kind == "factorial":
        hist = oracle.exact_digit_histogram(oracle.factorial(), n)
        y = np.cumsum(np.log10(np.arange(1, n + 1, dtype=np.longdouble)))
    else:
        raise AssertionError(kind)
    return hist, (y % np.longdouble(1.0)).astype(float), y.astype(float)


def _sequence_for(config: ExperimentConfig) -> Tuple[List[SignedLogValue], object]:
    """Build the log-domain sequence; returns (values, exact_hist_or_None)."""
    system = config.system
    kind = system["kind"]
    n = config.n
    if kind in ("power_of_two", "fibonacci", "factorial"):
        hist, fracs, mags = _oracle_logpath_fracs(kind, system, n)
        values = [slv_from_log10(1, m, f) for m, f in zip(mags, fracs)]
        return values, hist
    if kind == "linear_recursion":
        spec = matrixdyn.RecursionSpec(
            tuple(float(c) for c in _require(system, "coeffs")),
            tuple(float(s) for s in _require(system, "seeds")),
        )
        seq, _ = matrixdyn.linear_recursion(spec, n)
        return seq, None
    if kind == "map":
        spec = orbits.MapSpec(
            family=_require(system, "family"),
            a=system.get("a"),
            b=system.get("b"),
            g=system.get("g", "zero"),
            rule=system.get("rule"),
        )
        return orbits.iterate_map(spec, float(_require(system, "x0")), n), None
    if kind == "newton":
        seqs = orbits.newton_sequences(
            _require(system, "f"), float(_require(system, "x0")), n
        )
        which = system.get("sequence", "errors")
        if which not in ("errors", "diffs"):
            raise ValueError("config error at system.sequence: errors or diffs")
        return getattr(seqs, which), None
    if kind == "flow":
        t_end = float(_require(system, "t_end"))
        dt = system.get("dt")
        if dt is None:
            dt = t_end / max(n, 20_000)  # n requests extra grid resolution
        spec = orbits.FlowSpec(
            field=_require(system, "field"),
            x0=float(_require(system, "x0")),
            t_end=t_end,
            dt=float(dt),
        )
        return orbits.flow_log_samples(spec), None
    if kind == "matrix_power":
        a = np.asarray(_require(system, "matrix"), dtype=float)
        return (
            matrixdyn.matrix_power_entries(
                a, int(_require(system, "k")), int(_require(system, "l")), n
            ),
            None,
        )
    if kind == "markov":
        if "matrix" in system:
            pmat = np.asarray(system["matrix"], dtype=float)
        else:
            rng = stochasticdyn.make_generator(config.seed)
            pmat = matrixdyn.random_stochastic_matrix(int(_require(system, "d")), rng)
        res = matrixdyn.markov_sequences(
            pmat, int(system.get("k", 1)), int(system.get("l", 1)), n
        )
        which = system.get("sequence", "diff")
        if which not in ("diff", "gap"):
            raise ValueError("config error at system.sequence: diff or gap")
        return getattr(res, which), None
    if kind == "rv_power":
        dist = _dist_from(system)
        rng = stochasticdyn.make_generator(config.seed)
        return stochasticdyn.rv_power_path(dist, rng, n), None
    if kind == "iid_product":
        dist = _dist_from(system)
        rng = stochasticdyn.make_generator(config.seed)
        return stochasticdyn.iid_product_path(dist, rng, n), None
    if kind == "gbm":
        spec = stochasticdyn.GBMSpec(
            mu=float(_require(system, "mu")),
            sigma=float(_require(system, "sigma")),
            x0=float(_require(system, "x0")),
            t_end=float(_require(system, "t_end")),
            dt=float(_require(system, "dt")),
        )
        rng = stochasticdyn.make_generator(config.seed)
        path = stochasticdyn.gbm_path(spec, rng)
        fr = path.fracs()
        return [
            slv_from_log10(1, m, f) for m, f in zip(path.log10_values, fr)
        ], None
    if kind == "gbm_ensemble":
        # terminal-time ensemble: n is the number of paths (the report's
        # sample count), one Gaussian per path
        spec = stochasticdyn.GBMSpec(
            mu=float(_require(system, "mu")),
            sigma=float(_require(system, "sigma")),
            x0=float(_require(system, "x0")),
            t_end=float(_require(system, "t")),
            dt=float(system.get("dt", 0.01)),
        )
        rng = stochasticdyn.make_generator(config.seed)
        logs = stochasticdyn.gbm_terminal_log10(
            spec, float(_require(system, "t")), n, rng
        )
        return [
            slv_from_log10(1, float(y)) for y in logs
        ], None
    if kind == "twostep":
        params = twostep.TwoStepParams(
            a1=float(_require(system, "a1")),
            a2=float(_require(system, "a2")),
            b1=_require(system, "b1"),
            b2=_require(system, "b2"),
        )
        return (
            twostep.orbit_log(
                params, float(_require(system, "x1")), float(_require(system, "x2")), n
            ),
            None,
        )
    raise AssertionError(kind)


def _dist_from(system: dict) -> stochasticdyn.DistSpec:
    d = _require(system, "dist")
    return stochasticdyn.DistSpec(d["family"], tuple(d.get("params", ())))


def run(config: ExperimentConfig, out_dir: Path, fmt: str = "json") -> ConformanceReport:
    """Execute one experiment: build the sequence, judge conformance, write
    the report and the orbit dump.  Deterministic given the config bytes."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    values, exact_hist = _sequence_for(config)
    thresholds = config.conformance_thresholds()
    report = conformance.conformance_report(values, thresholds)
    if exact_hist is not None:
        # integer-reference kinds report the oracle's digit table
        report.digit_freq = list(exact_hist.frequencies())
        report.chi2 = conformance.chi_square(exact_hist)
    prefix = config.out_prefix
    report_path = out_dir / f"{prefix}report.json"
    csv_path = out_dir / f"{prefix}orbit.csv"
    if fmt == "json":
        report_path.write_text(report.to_json())
    else:
        report_path = out_dir / f"{prefix}report.csv"
        report_path.write_text(report.csv_header() + "\n" + report.to_csv_row() + "\n")
    with csv_path.open("w") as fh:
        fh.write("n,sign,log_mag,first_digit\n")
        for i, v in enumerate(values, start=1):
            fh.write(f"{i},{v.sign},{v.log_mag!r},{v.first_digit()}\n")
    return report


# ---------------------------------------------------------------------------
# reference tables


def _pct_half_up(count: int, total: int) -> str:
    pct = Decimal(count) * 100 / Decimal(total)
    return str(pct.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def _pct_floor(value: float) -> str:
    # the exact-law row is conventionally truncated, not rounded
    return str(Decimal(value).quantize(Decimal("0.01"), rounding=ROUND_FLOOR))


def _reproduce_fig1(out_dir: Path) -> Path:
    n = 10_000
    cols = {
        "pow2": oracle.exact_first_digits(oracle.power_of_two(), n),
        "fibonacci": oracle.exact_first_digits(oracle.fibonacci(), n),
        "factorial": oracle.exact_first_digits(oracle.factorial(), n),
    }
    hists = {
        name: conformance.DigitHistogram.from_digits(d) for name, d in cols.items()
    }
    path = out_dir / "fig1_digit_percentages.csv"
    with path.open("w") as fh:
        fh.write("digit,pow2,fibonacci,factorial,exact_bl\n")
        for j in range(1, 10):
            row = [str(j)]
            for name in ("pow2", "fibonacci", "factorial"):
                row.append(_pct_half_up(hists[name].counts[j - 1], n))
            row.append(_pct_floor(100.0 * conformance.BENFORD_PROBABILITIES[j - 1]))
            fh.write(",".join(row) + "\n")
    return path


def _reproduce_fig1a(out_dir: Path) -> Path:
    path = out_dir / "fig1a_fibonacci_counts.csv"
    digits_full = oracle.exact_first_digits(oracle.fibonacci(), 10_000)
    with path.open("w") as fh:
        fh.write("n,row," + ",".join(f"d{j}" for j in range(1, 10)) + "\n")
        for n in (100, 1000, 10_000):
            hist = conformance.DigitHistogram.from_digits(digits_full[:n])
            fh.write(f"{n},counts," + ",".join(map(str, hist.counts)) + "\n")
            vec = conformance.benford_vector(n)
            fh.write(f"{n},nearest_vector," + ",".join(map(str, vec)) + "\n")
    return path


def _reproduce_fig2_boundary(out_dir: Path) -> Path:
    params = twostep.TwoStepParams(1.0, 1.0, 2, 2)
    path = out_dir / "fig2_boundary.csv"
    # uniform 0.25-degree grid over the open quadrant; the 90-degree endpoint
    # is pulled inside so every ray stays strictly positive, and 45 degrees
    # (the diagonal through the exchange-symmetric fixed point) is on-grid
    angles = [0.25 * i for i in range(1, 360)] + [89.875]
    with path.open("w") as fh:
        fh.write("angle_deg,r,x1,x2\n")
        for ang in angles:
            rad = math.radians(ang)
            u, v = math.cos(rad), math.sin(rad)
            r = twostep.boundary_on_ray(params, (u, v), tol=1e-9)
            fh.write(f"{ang!r},{r!r},{r * u!r},{r * v!r}\n")
    return path


_FIGURES = {
    "fig1": _reproduce_fig1,
    "fig1a": _reproduce_fig1a,
    "fig2-boundary": _reproduce_fig2_boundary,
}


def reproduce(figure: str, out_dir: Path) -> Path:
    if figure not in _FIGURES:
        raise ValueError(f"unknown figure {figure!r}; choose from {sorted(_FIGURES)}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return _FIGURES[figure](out_dir)


# ---------------------------------------------------------------------------
# argument parsing


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="benforddyn",
        description="Significand-statistics lab for dynamical systems",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("--config", required=True, help="path to the JSON config")
    p_run.add_argument("--out", default=".", help="output directory")
    p_run.add_argument("--seed", type=int, default=None, help="override config seed")
    p_run.add_argument("--format", choices=("json", "csv"), default="json")

    p_rep = sub.add_parser("reproduce", help="regenerate a bundled reference table")
    p_rep.add_argument("figure", choices=sorted(_FIGURES))
    p_rep.add_argument("--out", default=".", help="output directory")

    p_two = sub.add_parser("twostep", help="two-step recursion tools")
    two_sub = p_two.add_subparsers(dest="twostep_command", required=True)

    def add_params(sp):
        sp.add_argument("--a1", type=float, required=True)
        sp.add_argument("--a2", type=float, required=True)
        sp.add_argument("--b1", required=True)
        sp.add_argument("--b2", required=True)

    p_orbit = two_sub.add_parser("orbit", help="generate a log-domain orbit")
    add_params(p_orbit)
    p_orbit.add_argument("--x1", type=float, required=True)
    p_orbit.add_argument("--x2", type=float, required=True)
    p_orbit.add_argument("-N", type=int, required=True, dest="n")
    p_orbit.add_argument("--out", default=".")

    p_basin = two_sub.add_parser("basin", help="boundary radius along a ray")
    add_params(p_basin)
    p_basin.add_argument("--ray", required=True, help="u,v direction (positive)")
    p_basin.add_argument("--tol", type=float, default=1e-9)

    p_cycle = two_sub.add_parser(
        "cycle", help="2-periodic limit of the boundary orbit on a ray"
    )
    add_params(p_cycle)
    p_cycle.add_argument("--ray", required=True, help="u,v direction (positive)")

    p_shadow = two_sub.add_parser("shadow", help="shadow constant of an orbit")
    add_params(p_shadow)
    p_shadow.add_argument("--x1", type=float, required=True)
    p_shadow.add_argument("--x2", type=float, required=True)
    p_shadow.add_argument("--case", choices=("auto", "I", "III"), default="auto")

    p_frac = two_sub.add_parser("fraction", help="sampled conformance fraction")
    add_params(p_frac)
    p_frac.add_argument("--region", required=True, help="lo1,hi1,lo2,hi2")
    p_frac.add_argument("--samples", type=int, default=100)
    p_frac.add_argument("--seed", type=int, default=0)
    p_frac.add_argument("-N", type=int, default=10_000, dest="n")

    return parser


def _twostep_params(args) -> twostep.TwoStepParams:
    return twostep.TwoStepParams(a1=args.a1, a2=args.a2, b1=args.b1, b2=args.b2)


def _cmd_run(args) -> int:
    config = ExperimentConfig.from_json(Path(args.config).read_text())
    if args.seed is not None:
        config = ExperimentConfig(
            system=config.system,
            n=config.n,
            seed=args.seed,
            thresholds=config.thresholds,
            out_prefix=config.out_prefix,
        )
    report = run(config, Path(args.out), fmt=args.format)
    print(
        f"n={report.n} ks={report.ks:.6f} "
        f"weyl_max={max(m for _, m in report.weyl):.6f} verdict={report.verdict}"
    )
    return 0 if report.passed else 2


def _cmd_reproduce(args) -> int:
    path = reproduce(args.figure, Path(args.out))
    print(f"wrote {path}")
    return 0


def _cmd_twostep(args) -> int:
    params = _twostep_params(args)
    if args.twostep_command == "orbit":
        values = twostep.orbit_log(params, args.x1, args.x2, args.n)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        path = out / "twostep_orbit.csv"
        with path.open("w") as fh:
            fh.write("n,sign,log_mag,first_digit\n")
            for i, v in enumerate(values, start=1):
                fh.write(f"{i},{v.sign},{v.log_mag!r},{v.first_digit()}\n")
        print(f"wrote {path}")
        return 0
    if args.twostep_command == "basin":
        u, v = (float(t) for t in args.ray.split(","))
        r = twostep.boundary_on_ray(params, (u, v), tol=args.tol)
        norm = math.hypot(u, v)
        print(
            json.dumps(
                {"r": r, "x1": r * u / norm, "x2": r * v / norm}, sort_keys=True
            )
        )
        return 0
    if args.twostep_command == "cycle":
        u, v = (float(t) for t in args.ray.split(","))
        norm = math.hypot(u, v)
        u, v = u / norm, v / norm
        r = twostep.boundary_on_ray(params, (u, v), tol=1e-12)
        p_odd, q_even = twostep.cycle2_limit(params, r * u, r * v)
        print(json.dumps({"p_odd": p_odd, "q_even": q_even}, sort_keys=True))
        return 0
    if args.twostep_command == "shadow":
        case = args.case
        if case == "auto":
            case = twostep.classify_case(params).value
        y1, y2 = math.log10(args.x1), math.log10(args.x2)
        if case == "I":
            h = twostep.shadow_h_case_one(params, y1, y2)
        elif case == "III":
            h = twostep.shadow_h_case_three(params, y1, y2)
        else:
            raise ValueError(
                "case II has no geometric shadow constant; use the ratio orbit"
            )
        print(json.dumps({"case": case, "h": h}, sort_keys=True))
        return 0
    if args.twostep_command == "fraction":
        lo1, hi1, lo2, hi2 = (float(t) for t in args.region.split(","))
        res = twostep.benford_fraction(
            params, (lo1, hi1, lo2, hi2), args.samples, args.n, args.seed
        )
        print(
            json.dumps(
                {
                    "fractions": res.fractions,
                    "totals": res.totals,
                    "undecided": res.undecided,
                },
                sort_keys=True,
            )
        )
        return 0
    raise AssertionError(args.twostep_command)


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "reproduce":
            return _cmd_reproduce(args)
        if args.command == "twostep":
            return _cmd_twostep(args)
        raise AssertionError(args.command)
    except (ValueError, OSError, RuntimeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

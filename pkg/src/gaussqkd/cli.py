"""Command-line interface: key rates, sweeps, noise thresholds, Monte-Carlo runs, symmetry checks.

All tables go to stdout as CSV with a fixed header and 12 significant
digits. Diagnostics go to stderr. Exit codes: 0 success, 1 a check failed,
2 invalid usage.
"""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

import numpy as np

from . import symmetry
from .channels import ChannelParams
from .exceptions import GaussQKDError
from .keyrate import Bounds, noise_threshold, optimize_rate
from .protocols import FloodlightParams, TwoWayParams, build_floodlight, build_two_way
from .simulator import CSV_HEADER, TestRegion, calibrated_radius, run_test, sample_outcomes
from .states import outcome_covariance

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2

RATE_HEADER = "tau,xi,beta,K,I,chi,va,vb,T,g"


class UsageError(Exception):
    pass


def fmt(x: float) -> str:
    return format(float(x), ".12g")


def _row(values) -> str:
    return ",".join(v if isinstance(v, str) else fmt(v) for v in values)


def parse_range(text: str) -> np.ndarray:
    """Parse 'a:b:step' into the grid a, a+step, ... <= b (inclusive within rounding)."""
    try:
        a, b, step = (float(s) for s in text.split(":"))
    except ValueError:
        raise UsageError(f"range must look like a:b:step, got {text!r}") from None
    if not step > 0 or b < a:
        raise UsageError(f"empty range {text!r}")
    count = int(np.floor((b - a) / step + 1e-9)) + 1
    return np.round(a + step * np.arange(count), 12)


def _bounds(args) -> Bounds:
    return Bounds(V_max=args.v_max, g_max=args.g_max)


def _fixed(args) -> dict[str, float]:
    pinned = {"V_A": args.va, "V_B": args.vb, "T": args.T, "g": args.g}
    fixed = {k: v for k, v in pinned.items() if v is not None}
    if args.protocol == "one-way":
        extra = sorted(set(fixed) - {"V_B"})
        if extra:
            raise UsageError(f"one-way protocol takes only --vb, not {extra}")
    return fixed


def _rate_values(protocol: str, tau: float, args):
    ch = ChannelParams(tau, args.xi)
    return optimize_rate(
        ch,
        ch,
        beta=args.beta,
        bounds=_bounds(args),
        budget=args.budget,
        protocol=protocol,
        fixed=_fixed(args) if protocol == args.protocol else {},
        seed=args.seed,
    )


def cmd_rate(args) -> int:
    res = _rate_values(args.protocol, args.tau, args)
    p, r = res.params, res.report
    print(RATE_HEADER)
    print(_row([args.tau, args.xi, args.beta, r.key_rate, r.mutual_info, r.holevo, p.V_A, p.V_B, p.T, p.g]))
    return EXIT_OK


def cmd_sweep(args) -> int:
    taus = parse_range(args.tau_range)
    if args.compare:
        print("tau,xi,beta,K_two_way,K_one_way")
        for tau in taus:
            k2 = _rate_values("two-way", tau, args).report.key_rate
            k1 = _rate_values("one-way", tau, args).report.key_rate
            print(_row([tau, args.xi, args.beta, k2, k1]))
        return EXIT_OK
    print(RATE_HEADER)
    for tau in taus:
        res = _rate_values(args.protocol, tau, args)
        p, r = res.params, res.report
        print(_row([tau, args.xi, args.beta, r.key_rate, r.mutual_info, r.holevo, p.V_A, p.V_B, p.T, p.g]))
    return EXIT_OK


def cmd_threshold(args) -> int:
    taus = parse_range(args.tau_range)
    if np.any(taus <= 0.0) or np.any(taus > 1.0):
        raise UsageError("tau values must lie in (0, 1]")
    print("tau,xi_max_two_way,xi_max_one_way")
    for tau in taus:
        out = [
            noise_threshold(tau, args.beta, _bounds(args), args.tol, proto, args.budget, args.seed).xi_max
            for proto in ("two-way", "one-way")
        ]
        print(_row([tau, *out]))
    return EXIT_OK


def cmd_simulate(args) -> int:
    params = TwoWayParams(args.va, args.vb, args.T, args.g)
    expected = build_two_way(params, ChannelParams(args.tau, args.xi))
    tau_actual = args.tau if args.tau_actual is None else args.tau_actual
    xi_actual = args.xi if args.xi_actual is None else args.xi_actual
    actual = build_two_way(params, ChannelParams(tau_actual, xi_actual))
    ref = outcome_covariance(expected.gamma)
    radius = calibrated_radius(ref, args.rounds) if args.radius is None else args.radius
    region = TestRegion(ref, radius)
    print(CSV_HEADER)
    all_passed = True
    for seed in range(args.seed, args.seed + args.runs):
        record = run_test(sample_outcomes(actual, args.rounds, seed), region, seed)
        all_passed &= record.test_passed
        print(record.csv_row())
    return EXIT_OK if all_passed else EXIT_FAILED


def cmd_symmetry_check(args) -> int:
    if args.protocol == "two-way":
        state = build_two_way(TwoWayParams(3.0, 2.0, 0.6, 1.5), ChannelParams(0.8, 0.05))
    else:
        state = build_floodlight(FloodlightParams(), ChannelParams(0.8, 0.05))
    tags = state.mode_tags
    if args.inject_mistag:
        tags = symmetry.mistag(tags)
    rng = np.random.default_rng(args.seed)
    thetas = 2 * np.pi * rng.random(args.samples)
    reports = [
        symmetry.check_phase_invariance(state, thetas, tags),
        symmetry.check_multicopy_invariance(state, args.copies, samples=args.samples, seed=args.seed, tags=tags),
        symmetry.check_primitive_commutation(args.copies, samples=args.samples, seed=args.seed),
    ]
    print("check,max_deviation,tolerance,passed")
    for r in reports:
        print(_row([r.check, r.max_deviation, r.tolerance, str(r.passed).lower()]))
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAILED


def _add_channel(p, tau_required=True):
    if tau_required:
        p.add_argument("--tau", type=float, required=True, help="channel transmittance")
    p.add_argument("--xi", type=float, default=0.0, help="excess noise (shot-noise units)")


def _add_optimizer(p):
    p.add_argument("--beta", type=float, default=1.0, help="reconciliation efficiency")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=10_000, help="objective evaluations per optimization")
    p.add_argument("--v-max", type=float, default=100.0, help="upper bound on V_A, V_B")
    p.add_argument("--g-max", type=float, default=20.0, help="upper bound on the squeezer gain")


def _add_pins(p):
    p.add_argument("--protocol", choices=["two-way", "one-way"], default="two-way")
    p.add_argument("--va", type=float, help="fix V_A instead of optimizing it")
    p.add_argument("--vb", type=float, help="fix V_B instead of optimizing it")
    p.add_argument("--T", type=float, help="fix Bob's beamsplitter transmittance")
    p.add_argument("--g", type=float, help="fix Alice's squeezer gain")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gaussqkd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rate", help="optimized (or pinned) key rate at one channel")
    _add_pins(p)
    _add_channel(p)
    _add_optimizer(p)
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("sweep", help="key rate over a range of tau")
    _add_pins(p)
    p.add_argument("--tau-range", required=True, help="a:b:step")
    p.add_argument("--compare", action="store_true", help="one row per tau with both protocols")
    _add_channel(p, tau_required=False)
    _add_optimizer(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("threshold", help="largest tolerable excess noise per tau")
    p.add_argument("--tau-range", required=True, help="a:b:step")
    p.add_argument("--tol", type=float, default=1e-3, help="bisection tolerance on xi")
    _add_optimizer(p)
    p.set_defaults(func=cmd_threshold, budget=3_000)

    p = sub.add_parser("simulate", help="Monte-Carlo parameter-estimation runs for the two-way protocol")
    p.add_argument("--tau", type=float, default=0.7)
    p.add_argument("--xi", type=float, default=0.1)
    p.add_argument("--va", type=float, default=3.0)
    p.add_argument("--vb", type=float, default=3.0)
    p.add_argument("--T", type=float, default=0.5)
    p.add_argument("--g", type=float, default=1.5)
    p.add_argument("--rounds", type=int, default=100_000)
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--radius", type=float, help="acceptance radius (default: calibrated)")
    p.add_argument("--tau-actual", type=float, help="true channel transmittance if it differs")
    p.add_argument("--xi-actual", type=float, help="true excess noise if it differs")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("symmetry-check", help="numerical U(n) covariance checks")
    p.add_argument("--protocol", choices=["two-way", "floodlight"], default="two-way")
    p.add_argument("--copies", type=int, choices=[1, 2, 3], default=2)
    p.add_argument("--samples", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--inject-mistag", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_symmetry_check)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on bad flags
    if getattr(args, "rounds", 2) < 2 or getattr(args, "runs", 1) < 1:
        parser.error("need --rounds >= 2 and --runs >= 1")
    if getattr(args, "samples", 1) < 1:
        parser.error("--samples must be positive")
    try:
        return args.func(args)
    except (UsageError, GaussQKDError, ValueError) as exc:
        print(f"gaussqkd {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

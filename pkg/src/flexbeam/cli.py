"""Command-line interface.

Subcommands:
    simulate     Monte Carlo sweep -> raw CSV + <out>_summary.csv
    gradcheck    analytic-vs-finite-difference gradient validation
    convergence  per-iteration AO traces -> CSV

Exit codes: 0 success, 1 configuration/validation error, 2 numerical
failure (failed trials or gradient-check violations).
"""

import argparse
import sys
from dataclasses import replace

from .harness import ConfigError, load_config, run_convergence, \
    run_gradcheck, run_simulate


def _add_common(parser, need_out=True):
    parser.add_argument("--config", required=True,
                        help="path to the JSON experiment configuration")
    parser.add_argument("--out", required=need_out, default=None,
                        help="output CSV path")
    parser.add_argument("--seed", type=int, default=None,
                        help="override base_seed from the config")
    parser.add_argument("--trials", type=int, default=None,
                        help="override N_MC (gradcheck: number of cases)")
    parser.add_argument("--jobs", type=int, default=1,
                        help="worker processes (results are identical "
                             "for any value)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="flexbeam",
        description="Flexible-array secrecy-rate simulations")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="Monte Carlo sweep to CSV")
    _add_common(p_sim)

    p_grad = sub.add_parser("gradcheck",
                            help="validate analytic shape gradients")
    _add_common(p_grad, need_out=False)
    p_grad.add_argument("--h-step", type=float, default=1e-6,
                        help="central-difference step in radians")
    p_grad.add_argument("--threshold", type=float, default=1e-5,
                        help="max allowed relative error")

    p_conv = sub.add_parser("convergence",
                            help="per-iteration AO traces to CSV")
    _add_common(p_conv)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = replace(cfg, base_seed=args.seed)
        if args.trials is not None:
            cfg = replace(cfg, n_mc=args.trials)
    except (ConfigError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1

    try:
        if args.command == "simulate":
            return run_simulate(cfg, args.out, jobs=args.jobs)
        if args.command == "gradcheck":
            n_cases = args.trials if args.trials is not None else cfg.n_mc
            return run_gradcheck(cfg, n_cases, h_step=args.h_step,
                                 threshold=args.threshold,
                                 out_path=args.out)
        if args.command == "convergence":
            return run_convergence(cfg, args.out, jobs=args.jobs)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    return 1


if __name__ == "__main__":
    raise SystemExit(main())

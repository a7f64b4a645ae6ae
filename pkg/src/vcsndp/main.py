"""A module for managing the entry point to the application"""
import argparse
import logging
import signal
import threading
from pathlib import Path
from typing import List, Optional

import yaml

from . import app_config as cfg
from . import __version__
from .builder import BuilderConfig, EscalationExhausted, construct_family
from .formats import FormatError, read_family, read_instance, write_family
from .labels import Variant
from .pipeline import PipelineConfig, VerificationError, solve_single_source, solve_vcsndp
from .report import RunReport, run_benchmark, run_random_baseline, write_benchmark_csv
from .subsolvers import InfeasibleError
from .verifier import (BudgetExceeded, verify_strong_goodness, verify_weak_goodness_bruteforce,
                       verify_weak_goodness_ss_bruteforce)

logger = logging.getLogger(__name__)

# Signal all threads to exit
EXIT_EVENT = threading.Event()

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


# unsure of all the arguments that will be passed when a signal is received, but we don't use any
# pylint: disable=unused-argument
def handler(*args, **kwargs):
    """Signal handler that notifies any threads watching the EXIT_EVENT that it's time to exit."""
    # pylint: disable=global-variable-not-assigned
    global EXIT_EVENT
    EXIT_EVENT.set()


def _say(args: argparse.Namespace, *parts):
    if not args.quiet:
        print(*parts)


def cmd_build_family(args: argparse.Namespace) -> int:
    """Build a family, write it, and optionally write a run report."""
    config = BuilderConfig.from_app_config()
    try:
        result = construct_family(args.n, args.k, args.variant, config)
    except EscalationExhausted as exc:
        print("Error:", exc)
        return EXIT_FAILED

    fam = result.family
    if args.out:
        write_family(fam, args.out)
    else:
        for lab in fam.labels:
            _say(args, " ".join(str(c) for c in lab))

    report = RunReport.from_construction(result, config, family_path=args.out)
    if args.report:
        report.write(args.report)
    p = fam.params
    _say(args, f"{p.variant.value} family: n={p.n} k={p.k} A={p.alphabet.size} gamma={p.gamma} alpha={p.alpha} "
               f"beta={p.beta} |R|={p.subset_count} escalations={p.escalations} max_steps={result.max_steps}")
    return EXIT_OK if report.strongly_good else EXIT_FAILED


def cmd_verify_family(args: argparse.Namespace) -> int:
    """Check strong goodness, and weak goodness by brute force if asked."""
    fam = read_family(args.input)
    status = EXIT_OK
    violations = verify_strong_goodness(fam)
    for violation in violations:
        _say(args, violation)
    if violations:
        status = EXIT_FAILED
    else:
        _say(args, f"{args.input}: strongly good (alpha={fam.params.alpha}, beta={fam.params.beta})")

    if args.weak_bruteforce:
        k = fam.params.k if args.k is None else args.k
        budget = args.budget if args.budget is not None else cfg.get_parameter(['verifier', 'weak_budget'])
        if fam.params.variant is Variant.GENERAL:
            found = verify_weak_goodness_bruteforce(fam, k, budget=budget)
        else:
            found = verify_weak_goodness_ss_bruteforce(fam, k, budget=budget)
        if found is None:
            _say(args, f"{args.input}: weakly good for k={k}")
        else:
            _say(args, f"weak goodness fails for k={k}: labels {found.witnesses} covered by {found.excluded}")
            status = EXIT_FAILED
    return status


def cmd_solve_sndp(args: argparse.Namespace) -> int:
    """Solve an instance with a family, print the cost, and optionally write the solution summary."""
    instance = read_instance(args.graph)
    fam = read_family(args.family)
    overrides = {}
    if args.subsolver:
        overrides["subsolver"] = args.subsolver
    if args.workers:
        overrides["workers"] = args.workers
    config = PipelineConfig.from_app_config(**overrides)

    solve = solve_vcsndp if instance.variant is Variant.GENERAL else solve_single_source
    try:
        solution = solve(instance, fam, config=config, exit_event=EXIT_EVENT)
    except (InfeasibleError, VerificationError) as exc:
        print("Error:", exc)
        return EXIT_FAILED

    if args.out:
        with open(args.out, mode="w", encoding="utf-8") as f:
            yaml.safe_dump(solution.summary(), f, sort_keys=False)
    _say(args, f"cost={solution.total_cost} edges={len(solution.chosen_edges)} m={solution.nonempty_subsets} "
               f"unique={solution.unique_subinstances}")
    for (u, v), got in sorted(solution.feasibility.items()):
        _say(args, f"  r({u},{v})={instance.requirements[(u, v)]} verified={got}")
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    """Sweep the (n, k) grid and write the CSV."""
    frame = run_benchmark(args.n_grid, args.k_grid, variants=args.variant, trials=args.trials,
                          config=BuilderConfig.from_app_config())
    if args.csv:
        write_benchmark_csv(frame, args.csv)
    _say(args, frame.to_string(index=False))
    if not frame["identical"].all():
        print("Error: some grid points produced different families across trials")
        return EXIT_FAILED
    return EXIT_OK


def cmd_random_baseline(args: argparse.Namespace) -> int:
    """Measure how often uniform draws meet the relaxed thresholds."""
    frame = run_random_baseline(args.n, args.k, args.variant, seeds=range(args.seeds),
                                gamma_multiplier=args.gamma_multiplier, config=BuilderConfig.from_app_config())
    _say(args, f"gamma={int(frame['gamma'].iloc[0])} success rate {frame['success'].mean():.3f} over "
               f"{len(frame)} seeds")
    return EXIT_OK


def _variant(value: str) -> Variant:
    try:
        return Variant.parse(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    """The argument parser with every subcommand."""
    parser = argparse.ArgumentParser(prog="VCSNDP",
                                     description="Build good families of subsets and use them to solve vertex "
                                                 "connectivity network design.  Most settings are in cfg.yaml")
    parser.add_argument("-f", "--file", type=str, default=cfg.default_config_file(), help="Configuration file")
    parser.add_argument("-q", "--quiet", action='store_true', help="Suppresses text output")
    parser.add_argument("-v", "--version", action='version', version='%(prog)s ' + __version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-family", help="Build a strongly good family")
    p.add_argument("--n", type=int, required=True, help="Number of terminals")
    p.add_argument("--k", type=int, required=True, help="Largest connectivity requirement")
    p.add_argument("--variant", type=_variant, default=Variant.GENERAL, help="general or ss")
    p.add_argument("--c-mult", type=int, help="Alphabet size is c_mult * k")
    p.add_argument("--zeta", type=float, help="Constant in front of the label length")
    p.add_argument("--out", type=str, help="Family file to write.  Labels are printed if omitted")
    p.add_argument("--report", type=str, help="YAML run report to write")
    p.set_defaults(func=cmd_build_family)

    p = sub.add_parser("verify-family", help="Check a family file")
    p.add_argument("--in", dest="input", type=str, required=True, help="Family file")
    p.add_argument("--weak-bruteforce", action='store_true', help="Also run the brute-force weak goodness check")
    p.add_argument("--k", type=int, help="k for the weak check, default is the family's k")
    p.add_argument("--budget", type=int, help="Largest number of (pair, X) combinations to enumerate")
    p.set_defaults(func=cmd_verify_family)

    p = sub.add_parser("solve-sndp", help="Solve an instance with a family")
    p.add_argument("--graph", type=str, required=True, help="Instance file")
    p.add_argument("--family", type=str, required=True, help="Family file built for the instance's terminals")
    p.add_argument("--subsolver", type=str, choices=["exact", "reverse-delete"], help="Element connectivity solver")
    p.add_argument("--workers", type=int, help="Subsolver threads")
    p.add_argument("--out", type=str, help="YAML solution summary to write")
    p.set_defaults(func=cmd_solve_sndp)

    p = sub.add_parser("bench", help="Sweep n and k and record family sizes")
    p.add_argument("--n-grid", type=int, nargs='+', required=True)
    p.add_argument("--k-grid", type=int, nargs='+', required=True)
    p.add_argument("--variant", type=_variant, nargs='+', default=[Variant.GENERAL])
    p.add_argument("--trials", type=int, default=1, help="Runs per grid point, all must agree")
    p.add_argument("--csv", type=str, help="CSV file to write")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("random-baseline", help="Success rate of uniformly drawn families")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--variant", type=_variant, default=Variant.GENERAL)
    p.add_argument("--seeds", type=int, default=100, help="Seeds 0 .. seeds-1 are drawn")
    p.add_argument("--gamma-multiplier", type=int, default=1, help="Scale the label length")
    p.set_defaults(func=cmd_random_baseline)
    return parser


def process_args_and_cfg(args: argparse.Namespace):
    """Process command line args and config file.  Update cfg as necessary.

    Args:
        args: Command line arguments
    """
    if args.file is not None and Path(args.file).exists():
        cfg.parse_config_file(args.file)
    elif args.file is not None and args.file != cfg.default_config_file():
        raise ValueError(f"Configuration file {args.file} does not exist")

    if getattr(args, "c_mult", None) is not None:
        cfg.set_parameter(["builder", "c_mult"], args.c_mult)
    if getattr(args, "zeta", None) is not None:
        cfg.set_parameter(["builder", "zeta"], args.zeta)

    # Make sure that we have all the configuration we need fully setup
    cfg.validate_config()

    level = "WARNING" if args.quiet else (cfg.get_parameter('log_level') or "INFO")
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def main(argv: Optional[List[str]] = None) -> int:
    """This should be used as the entry point for the application."""
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE

    # Define handlers for common 'exit now' signals
    if threading.current_thread() is threading.main_thread():
        signal.signal(signal.SIGINT, handler)
        signal.signal(signal.SIGTERM, handler)

    try:
        process_args_and_cfg(args)
        return args.func(args)

    except (FormatError, BudgetExceeded, ValueError) as exc:
        print("Error:", exc)
        return EXIT_USAGE

    # I want to give a friendly error message for any likely errors and not a massive stack trace.
    # pylint: disable=broad-exception-caught
    except Exception as exc:
        print("Error:", exc)
        return EXIT_FAILED

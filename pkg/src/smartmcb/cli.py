"""Command line interface.

Four subcommands:

* ``analyze``     set-of-best analysis of observed trial data
* ``power``       Monte Carlo power over a sample size grid
* ``samplesize``  same engine, reported around the recommended n
* ``simulate``    draw synthetic subject-level data from a truth file

Reports embed every run parameter (seed included), so a report is enough
to reproduce itself.  When no --seed is given, one is drawn from entropy
and announced on stderr.  Warnings go to stderr and do not affect the
exit status; errors print on stderr and exit 1.
"""

from __future__ import annotations

import argparse
import sys

from .data import TrialData
from .design import load_design
from .estimator import resolve_seed
from .io import (
    DataFormatError,
    analyze_csv_lines,
    analyze_report,
    curve_csv_lines,
    dump_json,
    power_report,
    power_spec_from_config,
    read_power_config,
    read_trial_data,
    read_truth,
    run_parameters_text,
    subject_csv_text,
)
from .mcb import set_of_best
from .posterior import draw_posterior, posterior_mean_edtr_probs
from .power import sample_size_search, simulate_subjects


def _warn(message: str) -> None:
    print(f"warning: {message}", file=sys.stderr)


def _reference_arg(value: str):
    if value == "auto":
        return value
    try:
        return int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"reference must be 'auto' or an EDTR id, got {value!r}")


def _resolve_cli_seed(seed) -> int:
    if seed is not None:
        return int(seed)
    drawn = resolve_seed(None)
    print(f"seed drawn from entropy: {drawn}", file=sys.stderr)
    return drawn


def _write_output(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_report(report: dict, csv_lines: list[str], args) -> None:
    if args.format == "json":
        _write_output(dump_json(report), args.out)
    else:
        _write_output("\n".join(csv_lines) + "\n", args.out)
        print(run_parameters_text(report), file=sys.stderr)


def cmd_analyze(args) -> int:
    design = load_design(args.design)
    data = read_trial_data(args.data, design, args.data_format)
    violations = data.validate_against(design)
    if violations:
        raise DataFormatError(f"{args.data}: " + "; ".join(violations))
    warnings = []
    prior = tuple(args.prior)
    for k in data.empty_sequences(design):
        warnings.append(
            f"sequence {k} has zero subjects; its posterior falls back to the "
            f"Beta({prior[0]:g}, {prior[1]:g}) prior"
        )
    for message in warnings:
        _warn(message)
    seed = _resolve_cli_seed(args.seed)
    draws = draw_posterior(design, data, args.draws, seed, reference=args.reference, prior=prior)
    result = set_of_best(draws, args.alpha)
    means = posterior_mean_edtr_probs(design, data, prior)
    report = analyze_report(design, data, draws, result, means, seed, prior, warnings)
    _emit_report(report, analyze_csv_lines(report), args)
    return 0


def _run_power(args, command: str) -> int:
    payload = read_power_config(args.config)
    seed = args.seed if args.seed is not None else payload.get("seed")
    seed = _resolve_cli_seed(seed)
    spec = power_spec_from_config(payload, args.config, seed, design_override=args.design)
    curve = sample_size_search(spec, threads=args.threads)
    report = power_report(curve, command)
    if curve.recommended_n is None:
        _warn(
            f"no grid point reaches the target power {curve.target_power:g}; "
            "extend the grid to find a recommendation"
        )
    _emit_report(report, curve_csv_lines(curve), args)
    return 0


def cmd_power(args) -> int:
    return _run_power(args, "power")


def cmd_samplesize(args) -> int:
    return _run_power(args, "samplesize")


def cmd_simulate(args) -> int:
    design = load_design(args.design)
    eta = read_truth(args.eta, design)
    if args.n < 0:
        raise ValueError(f"n must be non-negative, got {args.n}")
    seed = _resolve_cli_seed(args.seed)
    rows = simulate_subjects(eta, args.n, seed)
    _write_output(subject_csv_text(rows), args.out)
    return 0


def _add_output_options(p: argparse.ArgumentParser, formats=("json", "csv")) -> None:
    p.add_argument("--out", metavar="PATH", help="write the main output here instead of stdout")
    if formats:
        p.add_argument(
            "--format",
            choices=formats,
            default=formats[0],
            help="output format (default %(default)s)",
        )
    p.add_argument("--seed", type=int, metavar="S",
                   help="RNG seed; omitted means drawn from entropy and printed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smartmcb",
        description="Bayesian set-of-best analysis and sizing for two-stage SMARTs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="set-of-best analysis of trial data")
    p.add_argument("--design", required=True, metavar="KIND|FILE",
                   help="builtin design kind (design1, general) or design JSON file")
    p.add_argument("--data", required=True, metavar="FILE",
                   help="subject CSV (a1,s,a2,y) or aggregated-counts JSON")
    p.add_argument("--data-format", choices=("auto", "csv", "counts"), default="auto")
    p.add_argument("--alpha", type=float, default=0.05,
                   help="one minus the simultaneous credibility level (default %(default)s)")
    p.add_argument("--draws", type=int, default=1000,
                   help="posterior draws (default %(default)s)")
    p.add_argument("--reference", type=_reference_arg, default="auto",
                   help="reference EDTR id, or 'auto' for highest posterior mean")
    p.add_argument("--prior", type=float, nargs=2, default=(1.0, 1.0), metavar=("A", "B"),
                   help="beta prior hyperparameters (default 1 1)")
    _add_output_options(p)
    p.set_defaults(func=cmd_analyze)

    for name, func, help_text in (
        ("power", cmd_power, "power across a sample size grid"),
        ("samplesize", cmd_samplesize, "smallest n on the grid meeting the power target"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, metavar="FILE", help="JSON power config")
        p.add_argument("--design", metavar="KIND|FILE",
                       help="override the config's design")
        p.add_argument("--threads", type=int, default=1,
                       help="worker processes over grid points; result bytes do not depend on it")
        _add_output_options(p)
        p.set_defaults(func=func)

    p = sub.add_parser("simulate", help="draw synthetic subject-level data")
    p.add_argument("--design", required=True, metavar="KIND|FILE")
    p.add_argument("--eta", required=True, metavar="FILE",
                   help="truth JSON with theta_seq and lambda")
    p.add_argument("--n", required=True, type=int, help="number of subjects")
    _add_output_options(p, formats=())
    p.set_defaults(func=cmd_simulate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        message = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {message}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())

"""``robustspline`` command line.

Exit codes: 0 success, 2 configuration or input error, 3 numerical
failure, 4 I/O error.
"""

import argparse
import os
import sys

import numpy as np

from . import harness
from .config import (
    AttackConfig,
    ExperimentConfig,
    FitConfig,
    KernelConfig,
    LowerBoundConfig,
    load_config,
    with_seed,
)
from .errors import (
    BudgetError,
    ConfigError,
    ConstructionError,
    DensityError,
    DesignError,
    InputError,
    LogicError,
    NumericalError,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4
THREADS_ENV = "ROBUSTSPLINE_THREADS"

_CONFIG_CLASSES = {
    "fit": FitConfig,
    "attack": AttackConfig,
    "experiment": ExperimentConfig,
    "lowerbound": LowerBoundConfig,
    "kernel": KernelConfig,
}


class _ArgumentError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _ArgumentError(message)


def build_parser():
    parser = _Parser(prog="robustspline", description="Smoothing splines under adversarial label corruption.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "fit": "fit a smoothing spline to simulated data or a CSV file with x,y columns",
        "attack": "apply the configured attacks to one clean sample",
        "experiment": "Monte Carlo convergence-rate experiment",
        "lowerbound": "lower-bound construction table",
        "kernel": "spline weights versus the equivalent kernel",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", help="JSON config file (defaults apply when omitted)")
        p.add_argument("--seed", type=int, help="override master_seed")
        p.add_argument("--out", help="output path (stdout when omitted)")
        p.add_argument("--format", choices=("csv", "json"), help="override output.format")
        p.add_argument("--threads", type=int, help=f"worker threads (fallback: ${THREADS_ENV}, then 1)")
        if name == "fit":
            p.add_argument("--data", help="CSV file with header x,y")
    return parser


def _threads(arg):
    if arg is not None:
        value = arg
    else:
        raw = os.environ.get(THREADS_ENV)
        if raw is None:
            return 1
        try:
            value = int(raw)
        except ValueError as exc:
            raise ConfigError(THREADS_ENV, f"expected an integer, got {raw!r}") from exc
    if value < 1:
        raise ConfigError("threads", f"must be >= 1, got {value}")
    return value


def _read_xy(path):
    data = np.genfromtxt(path, delimiter=",", names=True)
    names = data.dtype.names or ()
    if "x" not in names or "y" not in names:
        raise ConfigError("data", "CSV needs a header with columns x and y")
    return np.atleast_1d(data["x"]), np.atleast_1d(data["y"])


def _run(args):
    cls = _CONFIG_CLASSES[args.command]
    cfg = load_config(args.config, cls) if args.config else cls()
    threads = _threads(args.threads)
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("seed", "must be non-negative")
        if hasattr(cfg, "master_seed"):
            cfg = with_seed(cfg, args.seed)
    fmt = args.format or cfg.output.format
    out = args.out or cfg.output.path

    if args.command == "experiment":
        rows, summary, _ = harness.run_convergence(cfg, threads)
        columns = harness.CONVERGENCE_COLUMNS
    elif args.command == "lowerbound":
        rows, summary = harness.run_lowerbound(cfg.q_list, cfg.n, cfg.sigma, cfg.replications,
                                               cfg.risk_trials, cfg.master_seed)
        columns = harness.LOWERBOUND_COLUMNS
    elif args.command == "kernel":
        rows, summary = harness.run_kernel_dump(cfg.n, cfg.lam, cfg.design, cfg.domain, cfg.interior,
                                                cfg.grid_size)
        columns = harness.KERNEL_COLUMNS
    elif args.command == "fit":
        data = _read_xy(args.data) if args.data else None
        rows, summary = harness.run_fit(cfg, data)
        columns = harness.FIT_COLUMNS
    else:
        rows, summary = harness.run_attack(cfg)
        columns = harness.ATTACK_COLUMNS

    text = harness.render(rows, columns, fmt, summary)
    harness.write_output(text, out, sys.stdout, summary if fmt == "csv" else None)


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except _ArgumentError as exc:
        print(f"robustspline: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        _run(args)
    except (ConfigError, InputError, DesignError, BudgetError, ConstructionError) as exc:
        print(f"robustspline: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, DensityError, LogicError, FloatingPointError) as exc:
        print(f"robustspline: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"robustspline: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

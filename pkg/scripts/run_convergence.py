"""Run a convergence-rate experiment and print the fitted log-log slopes.

Usage: python scripts/run_convergence.py configs/experiment_beta03.json [--threads 4] [--out table.csv]
"""

import argparse
import sys

from robustspline import harness
from robustspline.config import load_config


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out")
    args = ap.parse_args(argv)
    cfg = load_config(args.config)
    rows, summary, fits = harness.run_convergence(cfg, args.threads)
    if args.out:
        harness.write_output(harness.render(rows, harness.CONVERGENCE_COLUMNS, "csv"), args.out, None, summary)
    print(f"q = ceil(n^{cfg.q_exponent}), trials = {cfg.trials}, seed = {cfg.master_seed}")
    print(f"{'metric':6} {'attack':13} {'slope':>7} {'r2':>6}  decreasing")
    for f in fits:
        slope = "refused" if f.refused else f"{f.slope:7.3f}"
        r2 = "" if f.refused else f"{f.r2:6.3f}"
        print(f"{f.metric:6} {f.attack:13} {slope:>7} {r2:>6}  {f.decreasing}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

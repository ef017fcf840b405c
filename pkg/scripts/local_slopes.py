"""Local log-log slopes of the worst-case risk between consecutive n, beyond the default grid.

With q = n^0.3 and M = 100 the concentrated attack adds a squared L2 error of
order q^2 M^2 n^(-1.8) = 1e4 n^(-1.2), which exceeds the clean n^(-0.8) term
until n is around 1e10. Local slopes near -1.2 at every reachable n show it.

Usage: python scripts/local_slopes.py --beta 0.3 --max-exp 17 --trials 10
"""

import argparse
import math
import sys

from robustspline.config import ExperimentConfig
from robustspline.harness import run_convergence


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--beta", type=float, default=0.3)
    ap.add_argument("--min-exp", type=int, default=8)
    ap.add_argument("--max-exp", type=int, default=17)
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args(argv)
    grid = tuple(2 ** k for k in range(args.min_exp, args.max_exp + 1))
    cfg = ExperimentConfig(q_exponent=args.beta, n_grid=grid, trials=args.trials, master_seed=args.seed)
    rows, _, _ = run_convergence(cfg, args.threads)
    for metric in cfg.metrics:
        for attack in cfg.attacks + ("max",):
            pts = [(r["n"], r["mean"]) for r in rows if r["metric"] == metric and r["attack"] == attack]
            slopes = [math.log(b[1] / a[1]) / math.log(b[0] / a[0]) for a, b in zip(pts[:-1], pts[1:])]
            print(f"{metric:5} {attack:13} " + " ".join(f"{s:6.2f}" for s in slopes))
    print("columns: slope between n = " + ", ".join(f"{a}->{b}" for a, b in zip(grid[:-1], grid[1:])))
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Relative sup error of the equivalent kernel over a grid of n and smoothing parameters.

Usage: python scripts/kernel_sweep.py --n 500 2000 8000 --lam 1e-2 1e-3 1e-4 1e-5
"""

import argparse
import sys

from robustspline.kernel import kernel_approx_error
from robustspline.targets import DesignSpec, density_for, generate_design


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[500, 2000, 8000])
    ap.add_argument("--lam", type=float, nargs="+", default=[1e-2, 1e-3, 1e-4, 1e-5])
    ap.add_argument("--design", default="uniform", choices=("uniform", "gaussian"))
    args = ap.parse_args(argv)
    print(f"{'n':>6} {'lambda':>10} {'sup_error':>10} {'sup_kernel':>11} {'relative':>9}")
    for n in args.n:
        spec = DesignSpec(args.design, n, (0.0, 1.0))
        design, density = generate_design(spec), density_for(spec)
        for lam in args.lam + [n ** -0.8]:
            res = kernel_approx_error(design, lam, density, (0.25, 0.75), 101)
            print(f"{n:>6} {lam:>10.3g} {res.sup_error:>10.4f} {res.sup_kernel:>11.4f} {res.relative_error:>9.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Small numerical helpers: adaptive Simpson, composite Simpson, golden section."""

import math

import numpy as np

from .errors import NumericalError

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def adaptive_simpson(f, a, b, tol=1e-10, max_depth=40):
    """Integrate a scalar function over ``[a, b]`` by adaptive Simpson.

    Intervals are bisected until the Richardson error estimate
    ``|S_left + S_right - S| / 15`` falls under the local share of ``tol``.

    Raises
    ------
    NumericalError
        If an interval still fails the tolerance at ``max_depth``, or ``f``
        returns a non-finite value.
    """
    if a == b:
        return 0.0
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    fa, fm, fb = float(f(a)), float(f(0.5 * (a + b))), float(f(b))
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    total = 0.0
    # explicit stack: (a, b, fa, fm, fb, whole, tol, depth)
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        lo, hi, flo, fmid, fhi, s, eps, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = float(f(lm)), float(f(rm))
        if not (math.isfinite(flm) and math.isfinite(frm)):
            raise NumericalError(f"integrand not finite near x={mid!r}")
        left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi)
        delta = left + right - s
        if abs(delta) <= 15.0 * eps:
            total += left + right + delta / 15.0
        elif depth >= max_depth:
            raise NumericalError(
                f"adaptive Simpson did not converge on [{lo!r}, {hi!r}] at depth {depth}"
            )
        else:
            stack.append((mid, hi, fmid, frm, fhi, right, 0.5 * eps, depth + 1))
            stack.append((lo, mid, flo, flm, fmid, left, 0.5 * eps, depth + 1))
    return sign * total


def cumulative_adaptive_simpson(f, points, tol=1e-10, max_depth=40):
    """Running integral of ``f`` from ``points[0]`` to each of ``points``.

    ``points`` must be non-decreasing. The tolerance applies per segment.
    """
    points = np.asarray(points, dtype=float)
    out = np.zeros(points.shape)
    for k in range(1, points.size):
        out[k] = out[k - 1] + adaptive_simpson(f, points[k - 1], points[k], tol, max_depth)
    return out


def composite_simpson(values, a, b):
    """Composite Simpson rule for samples on a uniform grid over ``[a, b]``.

    ``values`` must have an odd length of at least 3.
    """
    values = np.asarray(values, dtype=float)
    m = values.size - 1
    if m < 2 or m % 2:
        raise ValueError("composite Simpson needs an even number of intervals")
    h = (b - a) / m
    return h / 3.0 * (values[0] + values[-1] + 4.0 * values[1:-1:2].sum() + 2.0 * values[2:-1:2].sum())


def golden_section_max(f, lo, hi, xtol=1e-8, max_iter=200):
    """Locate a maximiser of a unimodal scalar function on ``[lo, hi]``.

    Returns ``(x, f(x))``; the endpoints are compared too, so a monotone
    function returns the better endpoint.
    """
    c = hi - _INV_PHI * (hi - lo)
    d = lo + _INV_PHI * (hi - lo)
    fc, fd = f(c), f(d)
    a, b = lo, hi
    for _ in range(max_iter):
        if b - a <= xtol:
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    candidates = [(fc, c), (fd, d), (f(lo), lo), (f(hi), hi)]
    best_f, best_x = max(candidates, key=lambda t: t[0])
    return best_x, best_f

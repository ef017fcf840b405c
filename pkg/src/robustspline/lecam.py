"""Two-point lower-bound pair on ``[0, 1]``.

``f1`` is identically zero. ``f2`` equals ``r - x`` up to ``r - eps``,
then a quintic ``g`` that brings value, slope and curvature to zero at
``r``, and vanishes beyond. With ``r = q/n`` and ``eps = r**2`` the pair is
twice continuously differentiable and differs only where an adversary with
budget ``q`` can corrupt the lattice design ``x_i = i/n``.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import ConstructionError, InputError

__all__ = ["BumpPair", "build_pair", "l2_gap_squared", "linf_gap", "lecam_lower_bound"]


def _derivative_rows(t):
    """Value, slope and curvature functionals on powers 0..5 at ``t``, exact."""
    t = Fraction(t)
    value = [t ** k for k in range(6)]
    slope = [k * t ** (k - 1) if k >= 1 else Fraction(0) for k in range(6)]
    curve = [k * (k - 1) * t ** (k - 2) if k >= 2 else Fraction(0) for k in range(6)]
    return value, slope, curve


def _solve_exact(A, b):
    """Gauss-Jordan elimination over the rationals; ``None`` if singular."""
    m = [list(row) + [rhs] for row, rhs in zip(A, b)]
    size = len(m)
    for col in range(size):
        pivot = next((r for r in range(col, size) if m[r][col] != 0), None)
        if pivot is None:
            return None
        m[col], m[pivot] = m[pivot], m[col]
        inv = 1 / m[col][col]
        m[col] = [v * inv for v in m[col]]
        for r in range(size):
            if r != col and m[r][col] != 0:
                factor = m[r][col]
                m[r] = [a - factor * c for a, c in zip(m[r], m[col])]
    return [row[-1] for row in m]


def _unit_bump():
    """Quintic ``h`` on ``[0, 1]`` with ``h(0)=1, h'(0)=-1, h''(0)=0`` and zero value, slope, curvature at 1.

    In ``t = u / eps`` the boundary conditions for ``g`` are those of
    ``eps * h``, whatever ``eps`` is, so one exact solve serves every pair.
    """
    v0, s0, c0 = _derivative_rows(0)
    v1, s1, c1 = _derivative_rows(1)
    sol = _solve_exact([v0, s0, c0, v1, s1, c1], [Fraction(v) for v in (1, -1, 0, 0, 0, 0)])
    if sol is None:
        raise ConstructionError("boundary-condition system is singular")
    # three vanishing conditions at t = 1 make it a triple root; divide it out
    # in s = 1 - t so the cofactor is exact
    in_s = [sum(Fraction(math.comb(k, j)) * (-1) ** j * c for k, c in enumerate(sol) if k >= j) for j in range(6)]
    if any(in_s[:3]):
        raise ConstructionError("quintic does not vanish to third order at the right junction")
    return np.array([float(v) for v in sol]), np.array([float(v) for v in in_s[3:]])


_UNIT_BUMP, _UNIT_COFACTOR = _unit_bump()


def _bump_derivative(t, order):
    """``d^order/dt^order`` of ``(1 - t)^3 c(1 - t)`` with the exact cofactor ``c``."""
    s = 1.0 - np.asarray(t, dtype=float)
    cube = [s ** 3, -3 * s ** 2, 6 * s, -6 * np.ones_like(s)]
    cof = _UNIT_COFACTOR
    out = np.zeros_like(s)
    for j in range(order + 1):
        c = cof
        for _ in range(order - j):
            c = P.polyder(c)
        # d/dt = -d/ds on the cofactor
        out = out + math.comb(order, j) * cube[j] * (-1) ** (order - j) * P.polyval(s, c)
    return out


@dataclass(frozen=True)
class BumpPair:
    """Lower-bound pair for budget ``q`` out of ``n``.

    ``scaled_coeffs`` are the coefficients of ``g`` in ``t = u / eps`` with
    ``u = x - (r - eps)``; ``g_coeffs`` are the same polynomial in powers of
    ``u``. Evaluation goes through the scaled form, which stays well
    conditioned when ``eps`` is tiny.
    """

    q: int
    n: int
    r_q: float
    eps_q: float
    scaled_coeffs: np.ndarray = field(repr=False)

    @property
    def left(self):
        return self.r_q - self.eps_q

    @property
    def g_coeffs(self):
        if self.eps_q == 0.0:
            return np.zeros(6)
        return self.scaled_coeffs / self.eps_q ** np.arange(6)

    def g(self, x, order=0):
        if self.eps_q == 0.0:
            return np.zeros_like(np.asarray(x, dtype=float))
        t = (np.asarray(x, dtype=float) - self.left) / self.eps_q
        return self.eps_q ** (1 - order) * _bump_derivative(t, order)

    def f1(self, x, order=0):
        return np.zeros_like(np.asarray(x, dtype=float))

    def f2(self, x, order=0):
        x = np.asarray(x, dtype=float)
        if order == 0:
            linear = self.r_q - x
        elif order == 1:
            linear = -np.ones_like(x)
        else:
            linear = np.zeros_like(x)
        mid = (x >= self.left) & (x <= self.r_q)
        out = np.where(x < self.left, linear, 0.0)
        if np.any(mid):
            out = np.where(mid, self.g(x, order), out)
        return out

    def junction_mismatch(self):
        """Largest jump of ``f2``, ``f2'`` or ``f2''`` across the two junctions.

        The quintic is evaluated at its own endpoints ``t = 0`` and ``t = 1``:
        in floating point ``r - (r - eps)`` need not equal ``eps``, and the
        third derivative of ``g`` is of order ``eps**-2``.
        """
        if self.eps_q == 0.0:
            return 0.0
        lin = (self.eps_q, -1.0, 0.0)
        worst = 0.0
        for order in range(3):
            scale = self.eps_q ** (1 - order)
            worst = max(worst, abs(scale * float(_bump_derivative(0.0, order)) - lin[order]))
            worst = max(worst, abs(scale * float(_bump_derivative(1.0, order))))
        return worst


def build_pair(q, n):
    """Solve the six boundary conditions for ``g`` and return the pair.

    ``q = 0`` gives the degenerate pair ``f1 = f2 = 0``.
    """
    if q != int(q) or n != int(n):
        raise InputError(f"q and n must be integers, got q={q!r}, n={n!r}")
    q, n = int(q), int(n)
    if n < 1 or q < 0 or q >= n:
        raise ConstructionError(f"need 0 <= q < n, got q={q}, n={n}")
    if q == 0:
        return BumpPair(0, n, 0.0, 0.0, np.zeros(6))
    r = q / n
    eps = r * r
    coeffs = eps * _UNIT_BUMP
    coeffs.setflags(write=False)
    return BumpPair(q, n, r, eps, coeffs)


def l2_gap_squared(pair):
    """``||f1 - f2||^2`` over ``[0, 1]`` from closed-form piece integrals."""
    r, eps = pair.r_q, pair.eps_q
    if r == 0.0:
        return 0.0
    linear = (r ** 3 - eps ** 3) / 3.0
    sq = P.polymul(pair.scaled_coeffs, pair.scaled_coeffs)
    bump = eps * float(np.sum(sq / np.arange(1, sq.size + 1)))
    return linear + bump


def linf_gap(pair):
    """``sup |f1 - f2|``: the larger of the linear piece maximum and the quintic's extrema."""
    r = pair.r_q
    if r == 0.0:
        return 0.0
    c = pair.scaled_coeffs
    crit = P.polyroots(P.polyder(c)) if np.any(c[1:]) else np.array([])
    crit = crit[np.abs(crit.imag) < 1e-12].real
    t = np.concatenate([[0.0, 1.0], crit[(crit >= 0) & (crit <= 1)]])
    bump_max = float(np.abs(P.polyval(t, c)).max())
    return max(r, bump_max)


def lecam_lower_bound(gap_squared, tv):
    """Two-point bound ``gap^2 / 4 * (1 - tv)`` on the worst-case squared error."""
    if not 0.0 <= tv <= 1.0:
        raise InputError(f"total variation must lie in [0, 1], got {tv!r}")
    if not gap_squared >= 0.0:
        raise InputError(f"squared gap must be non-negative, got {gap_squared!r}")
    return 0.25 * gap_squared * (1.0 - tv)

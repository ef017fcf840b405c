"""Linear-smoother view of the smoothing spline and its equivalent kernel.

The fit is linear in the responses, ``ghat(x) = (1/n) sum_j W_n(x, x_j) y_j``.
``W_n`` is extracted exactly by fitting unit responses. The closed-form
equivalent kernel

    What(x, s) = (lam^(-1/4) / 2) (p(s) p(x))^(-3/8)
                 * exp(-lam^(-1/4) phi(x, s)) * sin(lam^(-1/4) phi(x, s) + pi/4),
    phi(x, s)  = 2^(-1/2) * int_{min(x,s)}^{max(x,s)} p(t)^(1/4) dt,

approximates it away from the boundary for a design with limiting density ``p``.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import DensityError, InputError, RegimeWarning
from .quadrature import adaptive_simpson
from .spline import DesignPoints, SmoothingParams, _solve, piecewise_eval

PHASE_TOL = 1e-10
PHASE_MAX_DEPTH = 40


class DensityModel:
    """A positive density on ``[a, b]`` with its CDF.

    Subclasses provide ``pdf``, ``cdf`` and ``p_min``; ``ppf`` defaults to
    bisection on the CDF.
    """

    domain = (0.0, 1.0)

    def pdf(self, x):
        raise NotImplementedError

    def cdf(self, x):
        raise NotImplementedError

    @property
    def p_min(self):
        raise NotImplementedError

    def ppf(self, u, tol=1e-12):
        """Inverse CDF by vectorised bisection to ``tol`` in ``x``."""
        u = np.asarray(u, dtype=float)
        if np.any((u < 0) | (u > 1)):
            raise InputError("quantile levels must lie in [0, 1]")
        a, b = self.domain
        lo = np.full(u.shape, a)
        hi = np.full(u.shape, b)
        iters = int(math.ceil(math.log2((b - a) / tol))) + 1
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            below = self.cdf(mid) < u
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return 0.5 * (lo + hi)

    def _checked_pdf(self, x):
        val = self.pdf(x)
        if np.any(np.asarray(val) <= 0):
            raise DensityError(f"density is not positive at x={x!r}")
        return val


@dataclass(frozen=True)
class UniformDensity(DensityModel):
    a: float = 0.0
    b: float = 1.0

    @property
    def domain(self):
        return (self.a, self.b)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= self.a) & (x <= self.b), 1.0 / (self.b - self.a), 0.0)

    def cdf(self, x):
        return np.clip((np.asarray(x, dtype=float) - self.a) / (self.b - self.a), 0.0, 1.0)

    @property
    def p_min(self):
        return 1.0 / (self.b - self.a)

    def ppf(self, u, tol=1e-12):
        return self.a + (self.b - self.a) * np.asarray(u, dtype=float)


@dataclass(frozen=True)
class TruncatedGaussianDensity(DensityModel):
    """Normal(mean, std) restricted and renormalised to ``[a, b]``."""

    mean: float
    std: float
    a: float
    b: float

    @property
    def domain(self):
        return (self.a, self.b)

    @property
    def _mass(self):
        return ndtr((self.b - self.mean) / self.std) - ndtr((self.a - self.mean) / self.std)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        z = (x - self.mean) / self.std
        val = np.exp(-0.5 * z * z) / (math.sqrt(2 * math.pi) * self.std * self._mass)
        return np.where((x >= self.a) & (x <= self.b), val, 0.0)

    def cdf(self, x):
        x = np.clip(np.asarray(x, dtype=float), self.a, self.b)
        lo = ndtr((self.a - self.mean) / self.std)
        return np.clip((ndtr((x - self.mean) / self.std) - lo) / self._mass, 0.0, 1.0)

    @property
    def p_min(self):
        far = max(abs(self.a - self.mean), abs(self.b - self.mean))
        return float(self.pdf(self.mean + far if self.mean + far <= self.b else self.mean - far))


@dataclass(frozen=True)
class EmpiricalCDF:
    """Step function ``F_n(x) = (1/n) #{i : x_i <= x}``."""

    points: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "points", np.sort(np.asarray(self.points, dtype=float).ravel()))

    def __call__(self, x):
        return np.searchsorted(self.points, np.asarray(x, dtype=float), side="right") / self.points.size


@dataclass(frozen=True)
class SmootherMatrix:
    """Hat matrix ``S`` with ``ghat(x_i) = sum_j S_ij y_j``."""

    entries: np.ndarray
    lam: float
    design: DesignPoints

    @property
    def n(self):
        return self.entries.shape[0]

    def asymmetry(self):
        return float(np.abs(self.entries - self.entries.T).max())

    def weights(self):
        """``W_n(x_i, x_j) = n S_ij``."""
        return self.n * self.entries


def hat_matrix(design, params):
    """Exact smoother matrix; column ``j`` is the fit to the unit response ``e_j``."""
    params = params if isinstance(params, SmoothingParams) else SmoothingParams(params)
    values, _ = _solve(design, np.eye(design.n), params.penalty_scale(design.n))
    return SmootherMatrix(values, params.lam, design)


def weight_matrix(design, params, x, columns=None):
    """``W_n(x_k, x_j)`` for evaluation points ``x`` and design indices ``columns``.

    Returns an array of shape ``(len(x), len(columns))``.
    """
    params = params if isinstance(params, SmoothingParams) else SmoothingParams(params)
    n = design.n
    columns = np.arange(n) if columns is None else np.asarray(columns, dtype=int)
    if columns.size and (columns.min() < 0 or columns.max() >= n):
        raise InputError(f"design index out of range [0, {n})")
    unit = np.zeros((n, columns.size))
    unit[columns, np.arange(columns.size)] = 1.0
    values, gamma = _solve(design, unit, params.penalty_scale(n))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return n * piecewise_eval(design.x, values, gamma, x)


def weight_function(design, params, x, j):
    """``W_n(x, x_j) = n * l_j(x)`` where ``l_j`` is the fit to ``e_j``.

    ``j`` is a zero-based design index.
    """
    n = design.n
    if not (0 <= int(j) < n) or int(j) != j:
        raise InputError(f"index j={j!r} outside [0, {n})")
    if not np.isfinite(x):
        raise InputError("x must be finite")
    return float(weight_matrix(design, params, [x], [int(j)])[0, 0])


def phase(density, x, s, tol=PHASE_TOL):
    """``phi(x, s) = 2^(-1/2) int_{min}^{max} p(t)^(1/4) dt`` by adaptive Simpson."""
    lo, hi = (x, s) if x <= s else (s, x)

    def integrand(t):
        return float(density._checked_pdf(t)) ** 0.25

    return adaptive_simpson(integrand, lo, hi, tol=tol, max_depth=PHASE_MAX_DEPTH) / math.sqrt(2.0)


def phase_primitive(density, points, tol=PHASE_TOL):
    """``Phi(t) = 2^(-1/2) int_a^t p^(1/4)`` at each of ``points`` (any order).

    ``phi(x, s) = |Phi(x) - Phi(s)|``; segments between sorted neighbours are
    integrated by adaptive Simpson, so each value carries at most
    ``len(points) * tol`` accumulated error.
    """
    points = np.asarray(points, dtype=float)
    a = density.domain[0]
    order = np.argsort(points, kind="stable")
    sorted_pts = points[order]

    def integrand(t):
        return float(density._checked_pdf(t)) ** 0.25

    prim = np.empty_like(sorted_pts)
    acc, prev = 0.0, a
    for k, t in enumerate(sorted_pts):
        acc += adaptive_simpson(integrand, prev, t, tol=tol, max_depth=PHASE_MAX_DEPTH)
        prim[k] = acc
        prev = t
    out = np.empty_like(prim)
    out[order] = prim / math.sqrt(2.0)
    return out


def _kernel_formula(lam, px, ps, ph):
    c = lam ** -0.25
    return 0.5 * c * (px * ps) ** -0.375 * np.exp(-c * ph) * np.sin(c * ph + math.pi / 4)


def equivalent_kernel(density, params, x, s):
    """Closed-form equivalent kernel ``What(x, s)``."""
    lam = params.lam if isinstance(params, SmoothingParams) else SmoothingParams(params).lam
    px = float(density._checked_pdf(x))
    ps = float(density._checked_pdf(s))
    return float(_kernel_formula(lam, px, ps, phase(density, x, s)))


def equivalent_kernel_grid(density, params, x, s):
    """``What(x_k, s_j)`` on the outer grid, shape ``(len(x), len(s))``."""
    lam = params.lam if isinstance(params, SmoothingParams) else SmoothingParams(params).lam
    x = np.atleast_1d(np.asarray(x, dtype=float))
    s = np.atleast_1d(np.asarray(s, dtype=float))
    prim = phase_primitive(density, np.concatenate([x, s]))
    px = density._checked_pdf(x)
    ps = density._checked_pdf(s)
    ph = np.abs(prim[: x.size, None] - prim[None, x.size:])
    return _kernel_formula(lam, px[:, None], ps[None, :], ph)


def kernel_bound(density, params):
    """Uniform bound ``(lam^(-1/4) / 2) p_min^(-3/4)`` on ``|What|``."""
    lam = params.lam if isinstance(params, SmoothingParams) else SmoothingParams(params).lam
    return 0.5 * lam ** -0.25 * density.p_min ** -0.75


def default_interior(domain):
    a, b = domain
    return (a + 0.25 * (b - a), a + 0.75 * (b - a))


@dataclass(frozen=True)
class KernelApproxResult:
    """Outcome of comparing ``W_n`` with ``What`` on a grid."""

    sup_error: float
    sup_kernel: float
    x: np.ndarray
    s: np.ndarray
    columns: np.ndarray
    weights: np.ndarray
    approx: np.ndarray

    @property
    def relative_error(self):
        return self.sup_error / self.sup_kernel


def kernel_approx_error(design, params, density, interior=None, grid_size=101):
    """Sup of ``|W_n(x, x_j) - What(x, x_j)|`` over ``x`` in the domain, ``x_j`` interior.

    The ``x`` grid is ``grid_size`` uniform points over the domain united with
    the selected ``x_j`` (so each kernel peak is hit). At most ``grid_size``
    design points inside ``[tau1, tau2]`` are used, evenly subsampled.
    """
    params = params if isinstance(params, SmoothingParams) else SmoothingParams(params)
    a, b = design.domain
    tau1, tau2 = default_interior(design.domain) if interior is None else interior
    if not a < tau1 < tau2 < b:
        raise InputError(f"interior [{tau1}, {tau2}] must lie strictly inside ({a}, {b})")
    if params.lam >= 1:
        warnings.warn("lam >= 1: equivalent-kernel comparison is outside the small-lam regime", RegimeWarning, stacklevel=2)
    inside = np.flatnonzero((design.x >= tau1) & (design.x <= tau2))
    if inside.size == 0:
        raise InputError("no design points inside the interior window")
    if inside.size > grid_size:
        pick = np.unique(np.round(np.linspace(0, inside.size - 1, grid_size)).astype(int))
        inside = inside[pick]
    s = design.x[inside]
    x = np.union1d(np.linspace(a, b, grid_size), s)
    W = weight_matrix(design, params, x, inside)
    What = equivalent_kernel_grid(density, params, x, s)
    return KernelApproxResult(
        sup_error=float(np.abs(W - What).max()),
        sup_kernel=float(np.abs(What).max()),
        x=x,
        s=s,
        columns=inside,
        weights=W,
        approx=What,
    )


def cdf_discrepancy(design, density):
    """Exact ``sup_x |F_n(x) - F(x)|``.

    ``design`` may be a ``DesignPoints`` or any 1-d array of points.
    """
    x = design.x if isinstance(design, DesignPoints) else np.sort(np.asarray(design, dtype=float).ravel())
    n = x.size
    F = np.asarray(density.cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    # F_n jumps from (i-1)/n to i/n at x_i; F is continuous and monotone
    return float(max(np.abs(i / n - F).max(), np.abs((i - 1) / n - F).max()))

"""Cubic smoothing spline: banded Reinsch fit, evaluation and roughness.

The fitted function minimises

    (1/n) sum_i (g(x_i) - y_i)^2 + lam * int (g'')^2

over the second-order Sobolev class. The minimiser is a natural cubic
spline with knots at the design points. It is computed from the banded
system ``(R + p Q^T Q) gamma = Q^T y`` with ``p = n * lam`` and
``values = y - p Q gamma``; everything is O(n) in time and memory.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, cho_solve_banded, cholesky_banded

from .errors import DesignError, InputError, NumericalError, RegimeWarning

__all__ = [
    "DesignPoints",
    "SmoothingParams",
    "NaturalCubicSpline",
    "FitDiagnostics",
    "fit",
    "evaluate",
    "roughness",
    "diagnostics",
]


@dataclass(frozen=True)
class DesignPoints:
    """Strictly increasing sample locations inside a closed domain ``[a, b]``.

    If ``domain`` is omitted it defaults to ``(x[0], x[-1])``.
    """

    x: np.ndarray
    domain: tuple = None

    def __post_init__(self):
        x = np.array(self.x, dtype=float).ravel()
        if x.size < 3:
            raise DesignError(f"need at least 3 design points, got {x.size}")
        if not np.all(np.isfinite(x)):
            raise DesignError("design points must be finite")
        gaps = np.diff(x)
        if np.any(gaps <= 0):
            bad = int(np.argmax(gaps <= 0))
            kind = "duplicate" if gaps[bad] == 0 else "decreasing"
            raise DesignError(f"design points must be strictly increasing ({kind} at index {bad + 1})")
        if self.domain is None:
            a, b = float(x[0]), float(x[-1])
        else:
            a, b = (float(v) for v in self.domain)
        if not a < b:
            raise DesignError(f"domain must satisfy a < b, got [{a}, {b}]")
        if x[0] < a or x[-1] > b:
            raise DesignError(f"design points leave the domain [{a}, {b}]")
        x.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "domain", (a, b))

    @property
    def n(self):
        return self.x.size

    @property
    def spacings(self):
        return np.diff(self.x)

    @property
    def delta_min(self):
        """Smallest separation between two design points."""
        return float(self.spacings.min())

    @property
    def delta_max(self):
        """Largest distance from a domain point to its nearest design point."""
        a, b = self.domain
        return float(max(self.x[0] - a, b - self.x[-1], 0.5 * self.spacings.max()))

    @property
    def quasi_uniformity(self):
        return self.delta_max / self.delta_min


@dataclass(frozen=True)
class SmoothingParams:
    lam: float

    def __post_init__(self):
        lam = float(self.lam)
        if not (np.isfinite(lam) and lam > 0):
            raise InputError(f"smoothing parameter must be positive and finite, got {self.lam!r}")
        object.__setattr__(self, "lam", lam)

    def penalty_scale(self, n):
        """Penalty multiplier ``p = n * lam`` for unscaled residuals."""
        return n * self.lam

    def in_regime(self, n):
        """True when ``lam > n**-2``, the lower end the rate theory assumes."""
        return self.lam > float(n) ** -2


@dataclass(frozen=True)
class NaturalCubicSpline:
    """Natural cubic spline stored by knot values and knot second derivatives."""

    knots: DesignPoints
    values: np.ndarray
    second_derivs: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name in ("values", "second_derivs"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != (self.knots.n,):
                raise InputError(f"{name} must have shape ({self.knots.n},), got {arr.shape}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __call__(self, x, order=0):
        return evaluate(self, x, order)

    def roughness(self):
        return roughness(self)


@dataclass(frozen=True)
class FitDiagnostics:
    residual_mse: float
    roughness: float
    lam: float

    @property
    def objective(self):
        return self.residual_mse + self.lam * self.roughness


def _second_difference_bands(h):
    """Entries of the three non-zero rows of each column of Q."""
    inv = 1.0 / h
    return inv[:-1], -(inv[:-1] + inv[1:]), inv[1:]


def _reinsch_factor(design, p):
    """Banded Cholesky factor of ``R + p Q^T Q`` in upper storage."""
    h = design.spacings
    m = design.n - 2
    q0, q1, q2 = _second_difference_bands(h)
    ab = np.zeros((3, m))
    ab[2] = (h[:-1] + h[1:]) / 3.0 + p * (q0 ** 2 + q1 ** 2 + q2 ** 2)
    if m > 1:
        ab[1, 1:] = h[1:-1] / 6.0 + p * (q1[:-1] * q0[1:] + q2[:-1] * q1[1:])
    if m > 2:
        ab[0, 2:] = p * (q2[:-2] * q0[2:])
    try:
        return cholesky_banded(ab, lower=False)
    except LinAlgError as exc:
        raise NumericalError(f"banded system is not positive definite: {exc}") from exc


def _qt_apply(h, y):
    """``Q^T y`` for a vector or a column-stacked matrix ``y``."""
    q0, q1, q2 = _second_difference_bands(h)
    if y.ndim == 2:
        q0, q1, q2 = q0[:, None], q1[:, None], q2[:, None]
    return q0 * y[:-2] + q1 * y[1:-1] + q2 * y[2:]


def _q_apply(h, gamma):
    """``Q gamma`` where ``gamma`` holds the interior second derivatives."""
    q0, q1, q2 = _second_difference_bands(h)
    if gamma.ndim == 2:
        q0, q1, q2 = q0[:, None], q1[:, None], q2[:, None]
    out = np.zeros((gamma.shape[0] + 2,) + gamma.shape[1:])
    out[:-2] += q0 * gamma
    out[1:-1] += q1 * gamma
    out[2:] += q2 * gamma
    return out


def _solve(design, y, p):
    """Knot values and full second-derivative vectors for response(s) ``y``."""
    h = design.spacings
    chol = _reinsch_factor(design, p)
    gamma_inner = cho_solve_banded((chol, False), _qt_apply(h, y))
    values = y - p * _q_apply(h, gamma_inner)
    gamma = np.zeros_like(values)
    gamma[1:-1] = gamma_inner
    return values, gamma


def fit(design, y, params):
    """Fit the cubic smoothing spline to responses ``y``.

    Parameters
    ----------
    design : DesignPoints
    y : array_like, shape (n,)
    params : SmoothingParams or float
        A bare float is taken as ``lam``.

    Returns
    -------
    NaturalCubicSpline
    """
    if not isinstance(params, SmoothingParams):
        params = SmoothingParams(params)
    if not isinstance(design, DesignPoints):
        design = DesignPoints(design)
    y = np.asarray(y, dtype=float)
    if y.shape != (design.n,):
        raise InputError(f"expected {design.n} responses, got shape {y.shape}")
    if not np.all(np.isfinite(y)):
        raise InputError("responses must be finite")
    if not params.in_regime(design.n):
        warnings.warn(
            "lam <= n^-2: outside the regime assumed by the rate bounds",
            RegimeWarning,
            stacklevel=2,
        )
    values, gamma = _solve(design, y, params.penalty_scale(design.n))
    return NaturalCubicSpline(design, values, gamma)


def _as_query(x):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InputError("evaluation points must be finite")
    return arr


def piecewise_eval(knots, values, gamma, x, order=0):
    """Evaluate natural cubic splines given by knot values and second derivatives.

    ``values`` and ``gamma`` may be ``(n,)`` or ``(n, k)`` for ``k`` splines
    sharing the knots; ``x`` is 1-d. Returns ``(len(x),)`` or ``(len(x), k)``.
    Outside the knot range the extension is linear.
    """
    xk = np.asarray(knots, dtype=float)
    x = np.asarray(x, dtype=float)
    h = np.diff(xk)
    idx = np.clip(np.searchsorted(xk, x, side="right") - 1, 0, xk.size - 2)
    lo, hi = xk[idx], xk[idx + 1]
    hk = h[idx]
    A = np.clip((hi - x) / hk, 0.0, 1.0)
    B = 1.0 - A
    if values.ndim == 2:
        A, B, hk = A[:, None], B[:, None], hk[:, None]
    g0, g1 = values[idx], values[idx + 1]
    c0, c1 = gamma[idx], gamma[idx + 1]
    if order == 0:
        out = A * g0 + B * g1 + ((A ** 3 - A) * c0 + (B ** 3 - B) * c1) * hk ** 2 / 6.0
    elif order == 1:
        out = (g1 - g0) / hk - (3 * A ** 2 - 1) * hk * c0 / 6.0 + (3 * B ** 2 - 1) * hk * c1 / 6.0
    elif order == 2:
        out = A * c0 + B * c1
    else:
        raise InputError(f"order must be 0, 1 or 2, got {order!r}")

    left, right = x < xk[0], x > xk[-1]
    if np.any(left) or np.any(right):
        h0, hn = h[0], h[-1]
        slope_lo = (values[1] - values[0]) / h0 - h0 * (2 * gamma[0] + gamma[1]) / 6.0
        slope_hi = (values[-1] - values[-2]) / hn + hn * (gamma[-2] + 2 * gamma[-1]) / 6.0
        dl = (x[left] - xk[0])
        dr = (x[right] - xk[-1])
        if values.ndim == 2:
            dl, dr = dl[:, None], dr[:, None]
        if order == 0:
            out[left] = values[0] + slope_lo * dl
            out[right] = values[-1] + slope_hi * dr
        elif order == 1:
            out[left] = slope_lo
            out[right] = slope_hi
        else:
            out[left] = 0.0
            out[right] = 0.0
    return out


def evaluate(spline, x, order=0):
    """Value, slope or curvature of ``spline`` at ``x`` (scalar or array)."""
    if order not in (0, 1, 2):
        raise InputError(f"order must be 0, 1 or 2, got {order!r}")
    arr = _as_query(x)
    out = piecewise_eval(spline.knots.x, spline.values, spline.second_derivs, np.atleast_1d(arr), order)
    if arr.ndim == 0:
        return float(out[0])
    return out.reshape(arr.shape)


def roughness(spline):
    """Exact ``int (g'')^2`` over the domain; ``g''`` is piecewise linear and zero outside the knots."""
    h = spline.knots.spacings
    c = spline.second_derivs
    return float(np.sum(h / 3.0 * (c[:-1] ** 2 + c[:-1] * c[1:] + c[1:] ** 2)))


def diagnostics(spline, y, lam):
    y = np.asarray(y, dtype=float)
    mse = float(np.mean((spline.values - y) ** 2))
    return FitDiagnostics(mse, roughness(spline), float(lam))

"""Response-corruption attacks and the two-Gaussian mixture used by the lower bound.

Three bounded attacks replace at most ``q`` responses with values in
``[-M, M]``: random, greedy (smallest baseline residual first) and
concentrated (a window around the median design point). The mixture
attack corrupts only the points where two candidate truths differ, mixing
in residual densities chosen so that the corrupted response laws under
either truth coincide.
"""

import functools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq
from scipy.special import ndtr

from .errors import BudgetError, ConstructionError, InputError, LogicError, NumericalError
from .quadrature import adaptive_simpson
from .spline import DesignPoints, fit

__all__ = [
    "CleanDataset",
    "CorruptedDataset",
    "Normal",
    "MixturePair",
    "random_attack",
    "greedy_attack",
    "concentrated_attack",
    "mixing_weight",
    "residual_densities",
    "mixture_attack",
    "mixture_responses",
    "ATTACKS",
    "apply_attack",
]

SUPPORT_SIGMAS = 12.0
QUAD_TOL = 1e-9


@dataclass(frozen=True)
class CleanDataset:
    design: DesignPoints
    y: np.ndarray
    sigma: float = 0.0
    truth: Optional[Callable] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        y = np.array(self.y, dtype=float)
        if y.shape != (self.design.n,):
            raise InputError(f"expected {self.design.n} responses, got shape {y.shape}")
        if not np.all(np.isfinite(y)):
            raise InputError("responses must be finite")
        y.setflags(write=False)
        object.__setattr__(self, "y", y)

    @property
    def n(self):
        return self.design.n


@dataclass(frozen=True)
class CorruptedDataset:
    """Responses after an attack.

    ``corrupted`` holds zero-based indices in increasing order. ``M`` is
    ``None`` for attacks that are not bounded by construction (mixture).
    """

    design: DesignPoints
    y: np.ndarray
    y_tilde: np.ndarray
    corrupted: np.ndarray
    q: int
    M: Optional[float] = None
    kind: str = ""
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        y_tilde = np.array(self.y_tilde, dtype=float)
        idx = np.unique(np.asarray(self.corrupted, dtype=np.intp))
        if idx.size > self.q:
            raise LogicError(f"{idx.size} corrupted points exceed the budget q={self.q}")
        untouched = np.ones(y_tilde.size, dtype=bool)
        untouched[idx] = False
        if not np.array_equal(y_tilde[untouched], np.asarray(self.y)[untouched]):
            raise LogicError("responses outside the corrupted set were modified")
        if self.M is not None and idx.size and np.abs(y_tilde[idx]).max() > self.M:
            raise LogicError(f"corrupted responses leave [-{self.M}, {self.M}]")
        for arr in (y_tilde, idx):
            arr.setflags(write=False)
        object.__setattr__(self, "y_tilde", y_tilde)
        object.__setattr__(self, "corrupted", idx)

    @property
    def n(self):
        return self.design.n


def _check_budget(n, q, M=None):
    if q != int(q) or q < 0:
        raise BudgetError(f"budget must be a non-negative integer, got {q!r}")
    if q > n:
        raise BudgetError(f"budget q={q} exceeds n={n}")
    if M is not None and not M > 0:
        raise InputError(f"M must be positive, got {M!r}")
    return int(q)


def _replace(ds, idx, values, q, M, kind, **diag):
    y_tilde = ds.y.copy()
    y_tilde[idx] = values
    return CorruptedDataset(ds.design, ds.y, y_tilde, idx, q, M, kind, diag)


def random_attack(ds, q, M, rng):
    """Set ``q`` uniformly chosen responses (without replacement) to ``M``."""
    q = _check_budget(ds.n, q, M)
    idx = np.sort(rng.choice(ds.n, size=q, replace=False))
    return _replace(ds, idx, M, q, M, "random")


def greedy_attack(ds, q, M, lam):
    """Push the ``q`` best-fitted points away from a baseline fit.

    The baseline spline (smoothing parameter ``lam``) is fitted once on the
    clean data. Each round picks the not-yet-corrupted index with the
    smallest squared residual (ties to the smallest index) and moves its
    response by ``M`` away from the fit, ``sign(0) = +1``. Results are
    clamped to ``[-M, M]``; the number of clamped values is reported in
    ``diagnostics["clamped"]``.

    Residuals of untouched points never change, so the rounds amount to a
    stable sort of the baseline residuals.
    """
    q = _check_budget(ds.n, q, M)
    baseline = fit(ds.design, ds.y, lam).values
    loss = (baseline - ds.y) ** 2
    order = np.argsort(loss, kind="stable")[:q]
    step = np.where(baseline[order] - ds.y[order] >= 0, 1.0, -1.0)
    raw = ds.y[order] + M * step
    values = np.clip(raw, -M, M)
    idx = np.sort(order)
    values = values[np.argsort(order, kind="stable")]
    return _replace(ds, idx, values, q, M, "greedy",
                    clamped=int(np.sum(raw != np.clip(raw, -M, M))), order=order.tolist())


def concentrated_window(n, q):
    """Zero-based indices of the ``q`` consecutive points centred on the median."""
    q = _check_budget(n, q)
    median_rank = n // 2 + 1
    start = min(max(median_rank - q // 2, 1), n - q + 1)
    return np.arange(start - 1, start - 1 + q)


def concentrated_attack(ds, q, M):
    """Set a window of ``q`` consecutive responses around the median ``x`` to ``M``."""
    q = _check_budget(ds.n, q, M)
    return _replace(ds, concentrated_window(ds.n, q), M, q, M, "concentrated")


@dataclass(frozen=True)
class Normal:
    mu: float
    sigma: float

    def __post_init__(self):
        if not (math.isfinite(self.mu) and self.sigma > 0 and math.isfinite(self.sigma)):
            raise InputError(f"invalid normal parameters mu={self.mu!r}, sigma={self.sigma!r}")

    def pdf(self, u):
        z = (np.asarray(u, dtype=float) - self.mu) / self.sigma
        return np.exp(-0.5 * z * z) / (self.sigma * math.sqrt(2 * math.pi))

    def cdf(self, u):
        return ndtr((np.asarray(u, dtype=float) - self.mu) / self.sigma)

    def sample(self, rng, size):
        return rng.normal(self.mu, self.sigma, size)


def _support(p1, p2):
    lo = min(p1.mu - SUPPORT_SIGMAS * p1.sigma, p2.mu - SUPPORT_SIGMAS * p2.sigma)
    hi = max(p1.mu + SUPPORT_SIGMAS * p1.sigma, p2.mu + SUPPORT_SIGMAS * p2.sigma)
    return lo, hi


def _crossings(p1, p2, lo, hi, grid=2001):
    """Points in ``(lo, hi)`` where ``p2 - p1`` changes sign."""
    t = np.linspace(lo, hi, grid)
    d = p2.pdf(t) - p1.pdf(t)
    roots = []
    for k in np.flatnonzero(np.sign(d[:-1]) * np.sign(d[1:]) < 0):
        roots.append(brentq(lambda u: float(p2.pdf(u) - p1.pdf(u)), t[k], t[k + 1], xtol=1e-14))
    return [lo] + roots + [hi]


def _positive_part_mass(p1, p2, tol=QUAD_TOL, panels=96):
    """``int (p2 - p1)_+`` by adaptive Simpson between the sign changes.

    The support is first cut into ``panels`` equal pieces (about a quarter
    sigma each) so the initial Simpson samples cannot all miss the bulk.
    """
    lo, hi = _support(p1, p2)
    breaks = np.union1d(np.linspace(lo, hi, panels + 1), _crossings(p1, p2, lo, hi))
    diff = lambda u: float(p2.pdf(u) - p1.pdf(u))  # noqa: E731
    total = 0.0
    for a, b in zip(breaks[:-1], breaks[1:]):
        if diff(0.5 * (a + b)) > 0:
            total += adaptive_simpson(diff, a, b, tol / breaks.size, 50)
    return total


def _same(p1, p2):
    return p1.mu == p2.mu and p1.sigma == p2.sigma


def mixing_weight(p1, p2):
    """``alpha = T / (1 + T)`` with ``T = int (p2 - p1)_+``."""
    if _same(p1, p2):
        return 0.0
    T = _positive_part_mass(p1, p2)
    if not math.isfinite(T):
        raise NumericalError("mixing mass is not finite")
    return T / (1.0 + T)


@dataclass(frozen=True)
class MixturePair:
    """Residual densities satisfying ``(1-a) p1 + a q1 == (1-a) p2 + a q2``.

    ``q1 = (p2 - p1)_+ / T`` and ``q2 = (p1 - p2)_+ / T`` with
    ``T = alpha / (1 - alpha)``. Both positive parts have mass ``T``
    because ``p1`` and ``p2`` each integrate to one.
    """

    alpha: float
    p1: Normal
    p2: Normal
    mass: float
    _cdf_grid: tuple = field(default=None, repr=False, compare=False)

    def q1(self, u):
        if self.alpha == 0.0:
            return self.p1.pdf(u)
        return np.maximum(self.p2.pdf(u) - self.p1.pdf(u), 0.0) / self.mass

    def q2(self, u):
        if self.alpha == 0.0:
            return self.p2.pdf(u)
        return np.maximum(self.p1.pdf(u) - self.p2.pdf(u), 0.0) / self.mass

    def mixture1(self, u):
        return (1 - self.alpha) * self.p1.pdf(u) + self.alpha * self.q1(u)

    def mixture2(self, u):
        return (1 - self.alpha) * self.p2.pdf(u) + self.alpha * self.q2(u)

    def _rejection(self, proposal, other, rng, size):
        out = np.empty(size)
        filled = 0
        while filled < size:
            # acceptance rate is exactly the mass of (target - other)_+
            batch = max(64, int(1.2 * (size - filled) / max(self.mass, 1e-3)))
            u = proposal.sample(rng, batch)
            pp = proposal.pdf(u)
            accept_prob = np.where(pp > 0, np.maximum(0.0, 1.0 - other.pdf(u) / np.where(pp > 0, pp, 1.0)), 0.0)
            keep = u[rng.random(batch) < accept_prob][: size - filled]
            out[filled:filled + keep.size] = keep
            filled += keep.size
        return out

    def sample_q1(self, rng, size):
        if self.alpha == 0.0:
            return self.p1.sample(rng, size)
        return self._rejection(self.p2, self.p1, rng, size)

    def sample_q2(self, rng, size):
        if self.alpha == 0.0:
            return self.p2.sample(rng, size)
        return self._rejection(self.p1, self.p2, rng, size)

    def cdf(self, which, u, cells=4096):
        """CDF of ``q1`` or ``q2`` from a cumulative Simpson table, interpolated linearly."""
        dens = self.q1 if which == 1 else self.q2
        lo, hi = _support(self.p1, self.p2)
        t = np.linspace(lo, hi, 2 * cells + 1)
        f = dens(t)
        h = t[1] - t[0]
        pieces = h / 3.0 * (f[:-2:2] + 4.0 * f[1:-1:2] + f[2::2])
        table = np.concatenate([[0.0], np.cumsum(pieces)])
        return np.interp(u, t[::2], table, left=0.0, right=table[-1])


def residual_densities(p1, p2, alpha):
    """Build the residual densities ``q1``, ``q2`` for mixing weight ``alpha``."""
    if not 0.0 <= alpha <= 1.0:
        raise InputError(f"alpha must lie in [0, 1], got {alpha!r}")
    if alpha == 0.0:
        if not _same(p1, p2):
            raise LogicError("alpha = 0 but the two densities differ")
        return MixturePair(0.0, p1, p2, 0.0)
    if alpha == 1.0:
        raise LogicError("alpha = 1 requires infinite separation mass")
    return MixturePair(float(alpha), p1, p2, alpha / (1.0 - alpha))


def build_mixture(p1, p2):
    return residual_densities(p1, p2, mixing_weight(p1, p2))


@functools.lru_cache(maxsize=8192)
def _mixture_for_means(m1, m2, sigma):
    # deterministic in its arguments, so sharing across calls cannot change draws
    return build_mixture(Normal(m1, sigma), Normal(m2, sigma))


def _check_lattice(design):
    n = design.n
    if not np.allclose(design.x, np.arange(1, n + 1) / n, rtol=0.0, atol=1e-12):
        raise ConstructionError("the mixture attack requires the design x_i = i/n")


def mixture_responses(design, truth, pair_builder, sigma, q, rng, replications=1):
    """Clean responses, corrupted responses and replacement mask, each ``(replications, n)``.

    Clean responses are ``f(x_i) + sigma * eps`` for the chosen truth; on
    ``x_i < q/n`` each one is replaced with probability ``alpha_i`` by a
    draw from the residual density of that truth.
    """
    if truth not in ("f1", "f2"):
        raise InputError(f"truth must be 'f1' or 'f2', got {truth!r}")
    design = design if isinstance(design, DesignPoints) else DesignPoints(design)
    _check_lattice(design)
    q = _check_budget(design.n, q)
    if not sigma > 0:
        raise InputError(f"the mixture attack needs sigma > 0, got {sigma!r}")
    n, x = design.n, design.x
    clean_mean = np.zeros(n)
    pair = pair_builder(q, n) if q > 0 else None
    if pair is not None:
        clean_mean = (pair.f1 if truth == "f1" else pair.f2)(x)
    clean = clean_mean + sigma * rng.standard_normal((replications, n))
    y = clean.copy()
    mask = np.zeros((replications, n), dtype=bool)
    if pair is None:
        return clean, y, mask
    for i in np.flatnonzero(x < pair.r_q):
        m1, m2 = float(pair.f1(x[i])), float(pair.f2(x[i]))
        if m1 == m2:
            continue
        mp = _mixture_for_means(m1, m2, float(sigma))
        hit = rng.random(replications) < mp.alpha
        k = int(hit.sum())
        if k:
            y[hit, i] = mp.sample_q1(rng, k) if truth == "f1" else mp.sample_q2(rng, k)
            mask[hit, i] = True
    return clean, y, mask


def mixture_attack(design, truth, pair_builder, sigma, q, rng):
    """One corrupted dataset under the mixture strategy.

    ``pair_builder(q, n)`` must return an object with ``r_q``, ``f1`` and
    ``f2`` (see :func:`robustspline.lecam.build_pair`).
    """
    design = design if isinstance(design, DesignPoints) else DesignPoints(design)
    clean, y_tilde, mask = mixture_responses(design, truth, pair_builder, sigma, q, rng)
    idx = np.flatnonzero(mask[0])
    return CorruptedDataset(design, clean[0], y_tilde[0], idx, q, None, "mixture", {"replaced": int(idx.size)})


ATTACKS = ("none", "random", "greedy", "concentrated")


def apply_attack(kind, ds, q, M, rng=None, lam=None):
    """Run a bounded attack by name; ``none`` returns the clean data unchanged."""
    if kind == "none":
        return CorruptedDataset(ds.design, ds.y, ds.y, np.array([], dtype=np.intp), q, M, "none")
    if kind == "random":
        return random_attack(ds, q, M, rng)
    if kind == "greedy":
        if lam is None:
            raise InputError("greedy attack needs a baseline smoothing parameter")
        return greedy_attack(ds, q, M, lam)
    if kind == "concentrated":
        return concentrated_attack(ds, q, M)
    raise InputError(f"unknown attack {kind!r}")

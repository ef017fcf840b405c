"""Regression targets, deterministic design generators and the Gaussian noise model."""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .adversary import CleanDataset
from .errors import DesignError, InputError
from .kernel import TruncatedGaussianDensity, UniformDensity
from .spline import DesignPoints

__all__ = [
    "TargetFunction",
    "MLP3Params",
    "DesignSpec",
    "xsinx",
    "zero",
    "linear",
    "mlp3",
    "custom",
    "make_target",
    "mlp_forward",
    "generate_design",
    "density_for",
    "sample_dataset",
    "DEFAULT_DOMAIN",
    "XSINX_M",
    "MLP_M",
    "NOISE_VARIANCE",
]

DEFAULT_DOMAIN = (-10.0, 10.0)
XSINX_M = 100.0
MLP_M = 500.0
NOISE_VARIANCE = 1.0
MLP_WIDTH = 32


@dataclass(frozen=True)
class TargetFunction:
    """A bounded target ``f`` on ``domain`` with ``|f| <= bound`` there."""

    kind: str
    domain: tuple
    bound: float
    fn: Callable = field(repr=False, compare=False)

    def __call__(self, x):
        return self.fn(np.asarray(x, dtype=float))

    def check_bound(self, grid=10_000):
        """Largest ``|f|`` on a uniform grid; raises if it exceeds ``bound``."""
        t = np.linspace(*self.domain, grid)
        peak = float(np.abs(self(t)).max())
        if peak > self.bound:
            raise InputError(f"{self.kind}: |f| reaches {peak} > bound {self.bound}")
        return peak


def xsinx(domain=DEFAULT_DOMAIN):
    a, b = domain
    return TargetFunction("xsinx", (float(a), float(b)), max(abs(a), abs(b)), lambda x: x * np.sin(x))


def zero(domain=(0.0, 1.0)):
    return TargetFunction("zero", tuple(map(float, domain)), 0.0, lambda x: np.zeros_like(x))


def linear(slope, intercept, domain=(0.0, 1.0)):
    a, b = map(float, domain)
    bound = max(abs(slope * a + intercept), abs(slope * b + intercept))
    return TargetFunction("linear", (a, b), bound, lambda x: slope * x + intercept)


def custom(fn, domain, bound):
    return TargetFunction("custom", tuple(map(float, domain)), float(bound), fn)


@dataclass(frozen=True)
class MLP3Params:
    """Weights of a ``1 -> h -> h -> 1`` tanh network; every entry in ``[-1, 1]``."""

    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    W3: np.ndarray
    b3: np.ndarray
    seed: Optional[int] = None

    def __post_init__(self):
        h = np.asarray(self.W1).shape[0]
        shapes = {"W1": (h, 1), "b1": (h,), "W2": (h, h), "b2": (h,), "W3": (1, h), "b3": (1,)}
        for name, shape in shapes.items():
            arr = np.array(getattr(self, name), dtype=float).reshape(shape)
            if np.any(np.abs(arr) > 1.0):
                raise InputError(f"MLP parameter {name} has entries outside [-1, 1]")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def width(self):
        return self.W1.shape[0]

    @property
    def bound(self):
        """``sum |W3| + |b3|``: the linear output of values in ``[-1, 1]``."""
        return float(np.abs(self.W3).sum() + np.abs(self.b3).sum())

    @classmethod
    def from_seed(cls, seed, width=MLP_WIDTH):
        rng = np.random.default_rng(seed)
        draw = lambda *shape: rng.uniform(-1.0, 1.0, shape)  # noqa: E731
        return cls(draw(width, 1), draw(width), draw(width, width), draw(width), draw(1, width), draw(1), seed)


def mlp_forward(params, x):
    """Network output at ``x`` (scalar or 1-d array); tanh hidden layers, linear output."""
    x = np.asarray(x, dtype=float)
    h1 = np.tanh(np.multiply.outer(x, params.W1[:, 0]) + params.b1)
    h2 = np.tanh(h1 @ params.W2.T + params.b2)
    out = h2 @ params.W3[0] + params.b3[0]
    return float(out) if x.ndim == 0 else out


def mlp3(params, domain=DEFAULT_DOMAIN):
    return TargetFunction("mlp3", tuple(map(float, domain)), params.bound, lambda x: mlp_forward(params, x))


def make_target(kind, domain=None, seed=0, slope=1.0, intercept=0.0):
    """Target by name, as used in experiment configs."""
    if kind == "xsinx":
        return xsinx(domain or DEFAULT_DOMAIN)
    if kind == "mlp3":
        return mlp3(MLP3Params.from_seed(seed), domain or DEFAULT_DOMAIN)
    if kind == "zero":
        return zero(domain or (0.0, 1.0))
    if kind == "linear":
        return linear(slope, intercept, domain or (0.0, 1.0))
    raise InputError(f"unknown target kind {kind!r}")


DESIGN_KINDS = ("uniform", "gaussian", "explicit")


@dataclass(frozen=True)
class DesignSpec:
    """How to place ``n`` design points in ``domain``.

    ``gaussian`` uses the normal law truncated to the domain, by default
    centred with standard deviation a quarter of the domain length.
    """

    kind: str
    n: int
    domain: tuple = (0.0, 1.0)
    mean: Optional[float] = None
    std: Optional[float] = None
    points: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in DESIGN_KINDS:
            raise InputError(f"unknown design kind {self.kind!r}")
        a, b = (float(v) for v in self.domain)
        if not (np.isfinite(a) and np.isfinite(b) and a < b):
            raise InputError(f"invalid domain {self.domain!r}")
        object.__setattr__(self, "domain", (a, b))
        if self.kind != "explicit" and (self.n != int(self.n) or self.n < 3):
            raise InputError(f"need n >= 3 design points, got {self.n!r}")


def density_for(spec):
    """Limiting design density of a quantile spec."""
    a, b = spec.domain
    if spec.kind == "uniform":
        return UniformDensity(a, b)
    if spec.kind == "gaussian":
        mean = 0.5 * (a + b) if spec.mean is None else spec.mean
        std = 0.25 * (b - a) if spec.std is None else spec.std
        return TruncatedGaussianDensity(mean, std, a, b)
    raise InputError("explicit designs have no limiting density")


def generate_design(spec):
    """Design points ``F^{-1}(i/(n+1))``, ``i = 1..n``, or the explicit points validated."""
    if spec.kind == "explicit":
        if spec.points is None:
            raise InputError("explicit design needs points")
        try:
            return DesignPoints(np.asarray(spec.points, dtype=float), spec.domain)
        except DesignError as exc:
            raise InputError(str(exc)) from exc
    n = int(spec.n)
    u = np.arange(1, n + 1) / (n + 1)
    a, b = spec.domain
    if spec.kind == "uniform":
        x = a + (b - a) * u
    else:
        x = density_for(spec).ppf(u, tol=1e-12)
    return DesignPoints(x, spec.domain)


def sample_dataset(f, design, sigma, rng):
    """Responses ``f(x_i) + sigma * eps_i`` with standard normal ``eps_i`` from ``rng``."""
    if not sigma >= 0:
        raise InputError(f"sigma must be non-negative, got {sigma!r}")
    mean = np.asarray(f(design.x), dtype=float)
    # always draw, so the stream position does not depend on sigma
    y = mean + sigma * rng.standard_normal(design.n)
    return CleanDataset(design, y, float(sigma), f)

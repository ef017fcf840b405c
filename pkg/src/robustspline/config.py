"""Experiment configuration: dataclasses plus a strict JSON loader.

Unknown keys are rejected and every validation error names the offending
field path, e.g. ``lambda.value``.
"""

import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Optional

from .errors import ConfigError

__all__ = [
    "LambdaPolicy",
    "OutputSpec",
    "ExperimentConfig",
    "FitConfig",
    "AttackConfig",
    "LowerBoundConfig",
    "KernelConfig",
    "load_config",
    "parse_config",
]

TARGETS = ("xsinx", "mlp3", "zero", "linear")
DESIGNS = ("uniform", "gaussian")
METRICS = ("R2", "Rinf")
ATTACK_KINDS = ("none", "random", "greedy", "concentrated")
DEFAULT_M = {"xsinx": 100.0, "mlp3": 500.0, "zero": 1.0, "linear": 1.0}


@dataclass(frozen=True)
class LambdaPolicy:
    policy: str = "schedule"
    value: Optional[float] = None


@dataclass(frozen=True)
class OutputSpec:
    path: Optional[str] = None
    format: str = "csv"


@dataclass(frozen=True)
class ExperimentConfig:
    target: str = "xsinx"
    target_seed: int = 0
    design: str = "uniform"
    domain: tuple = (-10.0, 10.0)
    sigma: float = 1.0
    M: Optional[float] = None
    q_exponent: float = 0.3
    n_grid: tuple = (256, 512, 1024, 2048, 4096, 8192)
    metrics: tuple = METRICS
    attacks: tuple = ("random", "greedy", "concentrated")
    trials: int = 20
    master_seed: int = 0
    lam: LambdaPolicy = field(default_factory=LambdaPolicy)
    baseline_lambda: Optional[float] = None
    self_test: bool = False
    output: OutputSpec = field(default_factory=OutputSpec)

    @property
    def bound(self):
        return DEFAULT_M[self.target] if self.M is None else self.M


@dataclass(frozen=True)
class FitConfig:
    target: str = "xsinx"
    target_seed: int = 0
    design: str = "uniform"
    domain: tuple = (-10.0, 10.0)
    n: int = 256
    sigma: float = 1.0
    lam: LambdaPolicy = field(default_factory=LambdaPolicy)
    master_seed: int = 0
    output: OutputSpec = field(default_factory=OutputSpec)


@dataclass(frozen=True)
class AttackConfig:
    target: str = "xsinx"
    target_seed: int = 0
    design: str = "uniform"
    domain: tuple = (-10.0, 10.0)
    n: int = 256
    sigma: float = 1.0
    M: Optional[float] = None
    q: Optional[int] = None
    q_exponent: float = 0.3
    attacks: tuple = ("random", "greedy", "concentrated")
    baseline_lambda: Optional[float] = None
    master_seed: int = 0
    output: OutputSpec = field(default_factory=OutputSpec)

    @property
    def bound(self):
        return DEFAULT_M[self.target] if self.M is None else self.M


@dataclass(frozen=True)
class LowerBoundConfig:
    n: int = 200
    q_list: tuple = (10, 20, 40, 100)
    sigma: float = 1.0
    replications: int = 2000
    risk_trials: int = 20
    master_seed: int = 0
    output: OutputSpec = field(default_factory=OutputSpec)


@dataclass(frozen=True)
class KernelConfig:
    n: int = 2000
    lam: Optional[float] = None
    design: str = "uniform"
    domain: tuple = (0.0, 1.0)
    interior: Optional[tuple] = None
    grid_size: int = 101
    output: OutputSpec = field(default_factory=OutputSpec)


# JSON key -> dataclass attribute where they differ
_RENAMED = {"lambda": "lam"}


def _fail(path, message):
    raise ConfigError(path, message)


def _number(v, path, lo=-math.inf, hi=math.inf, lo_open=False, allow_none=False):
    if v is None and allow_none:
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        _fail(path, f"expected a finite number, got {v!r}")
    if v < lo or v > hi or (lo_open and v == lo):
        _fail(path, f"value {v!r} out of range")
    return float(v)


def _integer(v, path, lo=None, allow_none=False):
    if v is None and allow_none:
        return None
    if isinstance(v, bool) or not isinstance(v, int):
        _fail(path, f"expected an integer, got {v!r}")
    if lo is not None and v < lo:
        _fail(path, f"must be >= {lo}, got {v}")
    return v


def _choice(v, path, options):
    if v not in options:
        _fail(path, f"expected one of {list(options)}, got {v!r}")
    return v


def _domain(v, path):
    if not isinstance(v, (list, tuple)) or len(v) != 2:
        _fail(path, "expected [a, b]")
    a, b = (_number(t, f"{path}[{k}]") for k, t in enumerate(v))
    if not a < b:
        _fail(path, f"need a < b, got {list(v)}")
    return (a, b)


def _string_list(v, path, options):
    if not isinstance(v, (list, tuple)) or not v:
        _fail(path, "expected a non-empty list")
    out = tuple(_choice(t, f"{path}[{k}]", options) for k, t in enumerate(v))
    if len(set(out)) != len(out):
        _fail(path, "duplicate entries")
    return out


def _lambda_policy(v, path):
    if not isinstance(v, dict):
        _fail(path, "expected an object")
    _reject_unknown(v, {"policy", "value"}, path)
    policy = _choice(v.get("policy", "schedule"), f"{path}.policy", ("schedule", "fixed"))
    value = v.get("value")
    if policy == "fixed":
        value = _number(value, f"{path}.value", 0.0, lo_open=True)
    elif value is not None:
        _fail(f"{path}.value", "only allowed with policy 'fixed'")
    return LambdaPolicy(policy, value)


def _output(v, path):
    if not isinstance(v, dict):
        _fail(path, "expected an object")
    _reject_unknown(v, {"path", "format"}, path)
    p = v.get("path")
    if p is not None and not isinstance(p, str):
        _fail(f"{path}.path", "expected a string")
    return OutputSpec(p, _choice(v.get("format", "csv"), f"{path}.format", ("csv", "json")))


def _reject_unknown(d, allowed, prefix=""):
    for key in sorted(d):
        if key not in allowed:
            _fail(f"{prefix}.{key}" if prefix else key, "unknown key")


def _int_list(v, path, lo):
    if not isinstance(v, (list, tuple)) or not v:
        _fail(path, "expected a non-empty list")
    return tuple(_integer(t, f"{path}[{k}]", lo) for k, t in enumerate(v))


def _n_grid(v, path):
    grid = _int_list(v, path, 16)
    for k in range(1, len(grid)):
        if grid[k] <= grid[k - 1]:
            _fail(f"{path}[{k}]", "n_grid must be strictly increasing")
    return grid


_VALIDATORS = {
    "target": lambda v, p: _choice(v, p, TARGETS),
    "target_seed": lambda v, p: _integer(v, p, 0),
    "design": lambda v, p: _choice(v, p, DESIGNS),
    "domain": _domain,
    "interior": lambda v, p: None if v is None else _domain(v, p),
    "sigma": lambda v, p: _number(v, p, 0.0),
    "M": lambda v, p: _number(v, p, 0.0, lo_open=True, allow_none=True),
    "q_exponent": lambda v, p: _number(v, p, 0.0, 1.0),
    "q": lambda v, p: _integer(v, p, 0, allow_none=True),
    "q_list": lambda v, p: _int_list(v, p, 1),
    "n": lambda v, p: _integer(v, p, 3),
    "n_grid": _n_grid,
    "metrics": lambda v, p: _string_list(v, p, METRICS),
    "attacks": lambda v, p: _string_list(v, p, ATTACK_KINDS),
    "trials": lambda v, p: _integer(v, p, 1),
    "replications": lambda v, p: _integer(v, p, 10),
    "risk_trials": lambda v, p: _integer(v, p, 1),
    "grid_size": lambda v, p: _integer(v, p, 3),
    "master_seed": lambda v, p: _integer(v, p, 0),
    "baseline_lambda": lambda v, p: _number(v, p, 0.0, lo_open=True, allow_none=True),
    "self_test": lambda v, p: v if isinstance(v, bool) else _fail(p, "expected true or false"),
    "output": _output,
}


def parse_config(data, cls=ExperimentConfig):
    """Validate a decoded JSON object into ``cls``; raises ``ConfigError``."""
    if not isinstance(data, dict):
        raise ConfigError("<root>", "expected a JSON object")
    attrs = {f.name for f in fields(cls)}
    allowed = {k for k, a in _RENAMED.items() if a in attrs} | (attrs - set(_RENAMED.values()))
    _reject_unknown(data, allowed)
    kwargs = {}
    for key, value in data.items():
        attr = _RENAMED.get(key, key)
        if attr == "lam":
            if cls is KernelConfig:
                kwargs[attr] = _number(value, key, 0.0, lo_open=True, allow_none=True)
            else:
                kwargs[attr] = _lambda_policy(value, key)
        else:
            kwargs[attr] = _VALIDATORS[key](value, key)
    cfg = cls(**kwargs)
    if isinstance(cfg, LowerBoundConfig):
        for k, q in enumerate(cfg.q_list):
            if q >= cfg.n:
                raise ConfigError(f"q_list[{k}]", f"need q < n={cfg.n}, got {q}")
        if cfg.sigma <= 0:
            raise ConfigError("sigma", "must be positive for the mixture attack")
    if isinstance(cfg, AttackConfig) and cfg.q is not None and cfg.q > cfg.n:
        raise ConfigError("q", f"budget exceeds n={cfg.n}")
    return cfg


def load_config(path, cls=ExperimentConfig):
    """Read and validate a JSON config file; I/O errors propagate as ``OSError``."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<root>", f"invalid JSON: {exc}") from exc
    return parse_config(data, cls)


def config_to_dict(cfg):
    """Inverse of ``parse_config`` up to defaults; used for output metadata."""
    out = {}
    for k, v in asdict(cfg).items():
        key = {a: j for j, a in _RENAMED.items()}.get(k, k)
        out[key] = list(v) if isinstance(v, tuple) else v
    return out


def with_seed(cfg, seed):
    return cfg if seed is None else replace(cfg, master_seed=seed)

"""Function distances and Monte Carlo estimates of the adversarial risks.

Each trial draws fresh noise, applies every configured attack to the same
clean sample, fits the spline and records squared L2 and squared sup-norm
errors. The worst case over the attack set is the per-trial maximum, so it
dominates every single attack exactly.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .adversary import ATTACKS, apply_attack
from .errors import InputError, LogicError
from .quadrature import composite_simpson, golden_section_max
from .spline import fit
from .targets import sample_dataset

__all__ = [
    "RiskEstimate",
    "TrialResults",
    "l2_distance_squared",
    "linf_distance",
    "lambda_schedule",
    "budget_for",
    "simulate_trials",
    "estimate_risk",
    "trial_seed",
    "METRICS",
]

METRICS = ("R2", "Rinf")
MAX_ATTACK = "max"
# stable stream ids, so adding an attack does not shift the others
_STREAM = {"noise": 0, "none": 1, "random": 2, "greedy": 3, "concentrated": 4,
           "ks_f1": 5, "ks_f2": 6, "risk_f1": 7, "risk_f2": 8}


def _diff(f, g, t):
    d = np.asarray(f(t), dtype=float) - np.asarray(g(t), dtype=float)
    if not np.all(np.isfinite(d)):
        raise InputError("distance integrand is not finite")
    return d


def l2_distance_squared(f, g, domain, grid_size=64, rtol=1e-6, max_points=2 ** 20):
    """``int (f - g)^2`` over ``domain`` by composite Simpson with grid doubling.

    The grid starts at ``grid_size`` intervals and doubles until two
    successive estimates agree to ``rtol`` (relative) or ``max_points``
    intervals are reached.
    """
    if grid_size < 64:
        raise InputError(f"grid_size must be at least 64, got {grid_size}")
    a, b = domain
    m = grid_size + grid_size % 2
    prev = composite_simpson(_diff(f, g, np.linspace(a, b, m + 1)) ** 2, a, b)
    while m < max_points:
        m *= 2
        cur = composite_simpson(_diff(f, g, np.linspace(a, b, m + 1)) ** 2, a, b)
        if abs(cur - prev) <= rtol * abs(cur) or cur == prev:
            return cur
        prev = cur
    return prev


def linf_distance(f, g, domain, grid_size=1024, xtol=1e-8, refine=8):
    """``sup |f - g|`` from a grid scan refined by golden section.

    The ``refine`` largest grid local maxima are polished inside their
    bracketing cells; the best polished value is returned.
    """
    if grid_size < 1024:
        raise InputError(f"grid_size must be at least 1024, got {grid_size}")
    a, b = domain
    t = np.linspace(a, b, grid_size + 1)
    d = np.abs(_diff(f, g, t))
    best = float(d.max())
    interior = np.flatnonzero((d[1:-1] >= d[:-2]) & (d[1:-1] >= d[2:])) + 1
    ends = [k for k in (0, grid_size) if d[k] == best]
    candidates = np.concatenate([interior, ends]).astype(int)
    candidates = candidates[np.argsort(-d[candidates], kind="stable")][:refine]
    absdiff = lambda s: float(abs(_diff(f, g, np.array([s]))[0]))  # noqa: E731
    for k in candidates:
        lo, hi = t[max(k - 1, 0)], t[min(k + 1, grid_size)]
        _, val = golden_section_max(absdiff, lo, hi, xtol)
        best = max(best, val)
    return best


def lambda_schedule(metric, n, q):
    """Smoothing parameter for ``n`` points and budget ``q``.

    Clean branch ``n^(-4/5)`` below the threshold ``n^0.4`` (R2) or
    ``n^0.5`` (Rinf); at or above it ``(q/n)^(4/3)`` or ``(q/n)^(6/5)``.
    """
    if not 0 <= q <= n:
        raise InputError(f"need 0 <= q <= n, got q={q}, n={n}")
    if metric == "R2":
        threshold, power = 0.4, 4.0 / 3.0
    elif metric == "Rinf":
        threshold, power = 0.5, 6.0 / 5.0
    else:
        raise InputError(f"unknown metric {metric!r}")
    # tolerance so q == n**threshold in exact arithmetic lands on the corrupted branch
    if q > 0 and q >= float(n) ** threshold * (1 - 1e-12):
        return (q / n) ** power
    return float(n) ** -0.8


def budget_for(n, beta):
    """``q = ceil(n^beta)``, guarded against ``n^beta`` landing just above an integer."""
    if not 0.0 <= beta <= 1.0:
        raise InputError(f"beta must lie in [0, 1], got {beta!r}")
    return min(n, int(math.ceil(n ** beta - 1e-9)))


def trial_seed(master_seed, n, t, stream):
    return np.random.default_rng([int(master_seed), int(n), int(t), _STREAM[stream]])


@dataclass(frozen=True)
class TrialResults:
    """Per-trial squared errors, shape ``(trials, len(attacks))`` per metric."""

    attacks: tuple
    metrics: tuple
    values: dict
    n: int
    q: int
    lam: float
    master_seed: int

    def column(self, metric, attack):
        vals = self.values[metric]
        if attack == MAX_ATTACK:
            return vals.max(axis=1)
        return vals[:, self.attacks.index(attack)]

    def argmax_attacks(self, metric):
        """How often each attack attains the per-trial maximum."""
        winners = np.argmax(self.values[metric], axis=1)
        return {a: int(np.sum(winners == k)) for k, a in enumerate(self.attacks)}

    def estimate(self, metric, attack):
        vals = self.column(metric, attack)
        trials = vals.size
        sd = float(np.std(vals, ddof=1)) if trials > 1 else 0.0
        return RiskEstimate(metric, float(np.mean(vals)), sd / math.sqrt(trials), trials, attack,
                            self.n, self.q, self.lam, self.master_seed)


@dataclass(frozen=True)
class RiskEstimate:
    metric: str
    mean: float
    stderr: float
    trials: int
    attack: str
    n: int = 0
    q: int = 0
    lam: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not (self.mean >= 0 and self.stderr >= 0 and self.trials >= 1):
            raise LogicError(f"invalid risk estimate {self!r}")

    def to_row(self):
        row = asdict(self)
        row["lambda"] = row.pop("lam")
        return row


def _one_trial(t, target, design, sigma, attacks, lam, baseline_lam, q, M, master_seed, metrics, grids, self_test):
    n = design.n
    ds = sample_dataset(target, design, sigma, trial_seed(master_seed, n, t, "noise"))
    out = {m: np.empty(len(attacks)) for m in metrics}
    for k, kind in enumerate(attacks):
        rng = trial_seed(master_seed, n, t, kind)
        cd = apply_attack(kind, ds, q, M, rng, baseline_lam)
        spline = fit(design, cd.y_tilde, lam)
        if "R2" in metrics:
            out["R2"][k] = l2_distance_squared(spline, target, design.domain, grids[0])
        if "Rinf" in metrics:
            sup = linf_distance(spline, target, design.domain, grids[1])
            out["Rinf"][k] = sup * sup
            if self_test:
                knot_err = float(np.abs(spline.values - target(design.x)).max())
                if sup < knot_err:
                    raise LogicError(f"sup error {sup} below knot error {knot_err} (trial {t}, {kind})")
    return out


def simulate_trials(target, design, sigma, attacks, lam, q, M, trials, master_seed,
                    metrics=METRICS, baseline_lam=None, threads=1, l2_grid=64, linf_grid=4096,
                    self_test=False):
    """Run ``trials`` seeded trials; all attacks in a trial share one clean sample.

    Trial ``t`` uses streams seeded by ``(master_seed, n, t, stream)``, so the
    result does not depend on ``threads`` or on scheduling order.
    """
    if trials < 1:
        raise InputError(f"need at least one trial, got {trials}")
    attacks = tuple(attacks)
    for kind in attacks:
        if kind not in ATTACKS:
            raise InputError(f"unknown attack {kind!r}")
    metrics = tuple(metrics)
    for m in metrics:
        if m not in METRICS:
            raise InputError(f"unknown metric {m!r}")
    baseline_lam = lam if baseline_lam is None else baseline_lam
    job = lambda t: _one_trial(t, target, design, sigma, attacks, lam, baseline_lam, q, M,  # noqa: E731
                               master_seed, metrics, (l2_grid, linf_grid), self_test)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(job, range(trials)))
    else:
        rows = [job(t) for t in range(trials)]
    values = {m: np.vstack([r[m] for r in rows]) for m in metrics}
    return TrialResults(attacks, metrics, values, design.n, q, float(lam), int(master_seed))


def estimate_risk(metric, target, design, sigma, attack, lam, trials, master_seed, q=0, M=None,
                  attack_set=None, baseline_lam=None, threads=1):
    """Monte Carlo estimate of ``R2`` or ``Rinf`` under one attack, or ``"max"`` over ``attack_set``."""
    if attack == MAX_ATTACK:
        attacks = tuple(attack_set or ("random", "greedy", "concentrated"))
    else:
        attacks = (attack,)
    if M is None:
        M = max(1.0, getattr(target, "bound", 1.0))
    res = simulate_trials(target, design, sigma, attacks, lam, q, M, trials, master_seed,
                          (metric,), baseline_lam, threads)
    return res.estimate(metric, attack)

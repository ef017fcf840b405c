"""Experiment drivers behind the CLI, plus deterministic table output.

Every driver returns plain rows (dicts of str/int/float) and a summary
dict. Writers format floats with ``repr`` and sort rows, so identical
inputs give byte-identical files however many threads were used.
"""

import csv
import io
import json
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.stats import ks_2samp, linregress

from .adversary import apply_attack, mixture_responses
from .config import config_to_dict
from .kernel import kernel_approx_error, weight_matrix
from .lecam import build_pair, l2_gap_squared, lecam_lower_bound, linf_gap
from .risk import MAX_ATTACK, budget_for, l2_distance_squared, lambda_schedule, simulate_trials, trial_seed
from .spline import DesignPoints, diagnostics, fit
from .targets import DesignSpec, density_for, generate_design, make_target, sample_dataset

__all__ = [
    "RateFit",
    "fit_rate",
    "run_convergence",
    "run_lowerbound",
    "run_kernel_dump",
    "run_fit",
    "run_attack",
    "render",
    "write_output",
    "CONVERGENCE_COLUMNS",
]

MIN_FIT_POINTS = 4
CONVERGENCE_COLUMNS = ("metric", "attack", "n", "q", "lambda", "mean", "stderr", "trials", "seed")
LOWERBOUND_COLUMNS = ("q", "n", "r_q", "eps_q", "l2_gap_sq", "linf_gap", "lecam_bound",
                      "max_ks", "ks_pass_fraction", "spline_avg_risk")
KERNEL_COLUMNS = ("x", "s", "W", "W_hat", "abs_diff", "row_mean")
FIT_COLUMNS = ("x", "y", "fitted", "truth")
ATTACK_COLUMNS = ("attack", "index", "x", "y", "y_tilde", "corrupted")


@dataclass(frozen=True)
class RateFit:
    """Least-squares slope of ``log mean`` against ``log n``.

    ``refused`` explains why no fit was made (fewer than four points or a
    non-positive mean); the per-point table is kept either way.
    ``decreasing`` is true when every consecutive pair drops, allowing
    three combined standard errors of slack.
    """

    metric: str
    attack: str
    points: tuple
    slope: float = math.nan
    intercept: float = math.nan
    r2: float = math.nan
    decreasing: bool = False
    refused: str = ""

    def to_dict(self):
        d = asdict(self)
        d["points"] = [list(p) for p in self.points]
        for k in ("slope", "intercept", "r2"):
            if math.isnan(d[k]):
                d[k] = None
        return d


def fit_rate(metric, attack, ns, means, stderrs):
    points = tuple(zip(map(int, ns), map(float, means), map(float, stderrs)))
    decreasing = all(
        b[1] - a[1] <= 3.0 * math.hypot(a[2], b[2]) for a, b in zip(points[:-1], points[1:])
    )
    if len(points) < MIN_FIT_POINTS:
        return RateFit(metric, attack, points, decreasing=decreasing,
                       refused=f"need at least {MIN_FIT_POINTS} sample sizes, got {len(points)}")
    if min(p[1] for p in points) <= 0:
        return RateFit(metric, attack, points, decreasing=decreasing, refused="non-positive risk estimate")
    res = linregress(np.log([p[0] for p in points]), np.log([p[1] for p in points]))
    return RateFit(metric, attack, points, float(res.slope), float(res.intercept),
                   float(min(1.0, res.rvalue ** 2)), decreasing)


def _design(kind, n, domain):
    return generate_design(DesignSpec(kind, n, domain))


def _target(cfg):
    return make_target(cfg.target, cfg.domain, cfg.target_seed)


def run_convergence(cfg, threads=1):
    """Risk table over ``cfg.n_grid`` and one rate fit per (metric, attack).

    Metrics whose smoothing parameters coincide share a single simulation,
    which is identical to running them apart since seeds do not depend on
    the metric.
    """
    target = _target(cfg)
    rows, per_key = [], {}
    for n in cfg.n_grid:
        design = _design(cfg.design, n, cfg.domain)
        q = budget_for(n, cfg.q_exponent)
        lams = {}
        for metric in cfg.metrics:
            lam = lambda_schedule(metric, n, q) if cfg.lam.policy == "schedule" else cfg.lam.value
            lams.setdefault(lam, []).append(metric)
        for lam, metrics in sorted(lams.items()):
            res = simulate_trials(target, design, cfg.sigma, cfg.attacks, lam, q, cfg.bound, cfg.trials,
                                  cfg.master_seed, metrics, cfg.baseline_lambda, threads,
                                  self_test=cfg.self_test)
            for metric in metrics:
                for attack in cfg.attacks + (MAX_ATTACK,):
                    est = res.estimate(metric, attack)
                    rows.append({"metric": metric, "attack": attack, "n": n, "q": q, "lambda": lam,
                                 "mean": est.mean, "stderr": est.stderr, "trials": est.trials,
                                 "seed": cfg.master_seed})
                    per_key.setdefault((metric, attack), []).append(est)
    rows.sort(key=lambda r: (r["metric"], r["attack"], r["n"]))
    fits = []
    for (metric, attack), ests in sorted(per_key.items()):
        fits.append(fit_rate(metric, attack, [e.n for e in ests], [e.mean for e in ests], [e.stderr for e in ests]))
    summary = {"config": config_to_dict(cfg), "fits": [f.to_dict() for f in fits],
               "note": "max is the per-trial maximum over the configured attacks, a lower estimate of the worst case"}
    return rows, summary, fits


def _lattice(n):
    return DesignPoints(np.arange(1, n + 1) / n)


def lowerbound_row(q, n, sigma=1.0, replications=2000, risk_trials=20, master_seed=0):
    """Construction quantities for one ``q`` plus empirical checks of the mixture attack.

    ``max_ks`` and ``ks_pass_fraction`` compare corrupted responses under
    the two truths coordinate by coordinate; ``spline_avg_risk`` is the
    smoothing spline's two-hypothesis average squared L2 error under the
    mixture attack, which must sit above ``lecam_bound``.
    """
    pair = build_pair(q, n)
    gap2 = l2_gap_squared(pair)
    row = {"q": q, "n": n, "r_q": pair.r_q, "eps_q": pair.eps_q, "l2_gap_sq": gap2,
           "linf_gap": linf_gap(pair), "lecam_bound": lecam_lower_bound(gap2, 0.0)}
    design = _lattice(n)
    eligible = np.flatnonzero(design.x < pair.r_q)
    if eligible.size and replications:
        _, y1, _ = mixture_responses(design, "f1", build_pair, sigma, q, trial_seed(master_seed, n, q, "ks_f1"),
                                     replications)
        _, y2, _ = mixture_responses(design, "f2", build_pair, sigma, q, trial_seed(master_seed, n, q, "ks_f2"),
                                     replications)
        tests = [ks_2samp(y1[:, i], y2[:, i]) for i in eligible]
        row["max_ks"] = float(max(t.statistic for t in tests))
        row["ks_pass_fraction"] = float(np.mean([t.pvalue > 0.01 for t in tests]))
    else:
        row["max_ks"], row["ks_pass_fraction"] = 0.0, 1.0
    lam = lambda_schedule("R2", n, q)
    risks = []
    for t in range(risk_trials):
        per_truth = []
        for truth, stream in (("f1", "risk_f1"), ("f2", "risk_f2")):
            rng = trial_seed(master_seed, n, q * risk_trials + t, stream)
            _, y, _ = mixture_responses(design, truth, build_pair, sigma, q, rng)
            spline = fit(design, y[0], lam)
            f = pair.f1 if truth == "f1" else pair.f2
            per_truth.append(l2_distance_squared(spline, f, (0.0, 1.0)))
        risks.append(0.5 * sum(per_truth))
    row["spline_avg_risk"] = float(np.mean(risks)) if risks else math.nan
    return row


def run_lowerbound(q_list, n, sigma=1.0, replications=2000, risk_trials=20, master_seed=0):
    rows = [lowerbound_row(q, n, sigma, replications, risk_trials, master_seed) for q in q_list]
    rows.sort(key=lambda r: r["q"])
    return rows, {"n": n, "q_list": list(q_list), "sigma": sigma, "replications": replications,
                  "risk_trials": risk_trials, "master_seed": master_seed}


def run_kernel_dump(n, lam=None, design="uniform", domain=(0.0, 1.0), interior=None, grid_size=101):
    """Exact spline weights against the equivalent kernel on the evaluation grid.

    ``lam`` defaults to ``n^(-4/5)``. The summary is taken from the same
    :func:`kernel_approx_error` call that produced the rows.
    """
    lam = float(n) ** -0.8 if lam is None else lam
    spec = DesignSpec(design, n, domain)
    points = generate_design(spec)
    res = kernel_approx_error(points, lam, density_for(spec), interior, grid_size)
    # (1/n) sum_j W(x, x_j) over every design column, not just the dumped ones
    row_mean = weight_matrix(points, lam, res.x).mean(axis=1)
    rows = []
    for i, x in enumerate(res.x):
        for k, s in enumerate(res.s):
            w, a = float(res.weights[i, k]), float(res.approx[i, k])
            rows.append({"x": float(x), "s": float(s), "W": w, "W_hat": a, "abs_diff": abs(w - a),
                         "row_mean": float(row_mean[i])})
    summary = {"n": n, "lambda": lam, "design": design, "domain": list(domain),
               "interior": list(interior) if interior else None, "sup_error": res.sup_error,
               "sup_kernel": res.sup_kernel, "relative_error": res.relative_error}
    return rows, summary


def _lambda_for(policy, n, q=0, metric="R2"):
    return lambda_schedule(metric, n, q) if policy.policy == "schedule" else policy.value


def run_fit(cfg, data=None):
    """Fit one dataset: simulated from the config, or ``data = (x, y)`` from a file."""
    if data is None:
        design = _design(cfg.design, cfg.n, cfg.domain)
        target = _target(cfg)
        ds = sample_dataset(target, design, cfg.sigma, trial_seed(cfg.master_seed, cfg.n, 0, "noise"))
        y, truth = ds.y, target(design.x)
    else:
        x, y = data
        order = np.argsort(x, kind="stable")
        design = DesignPoints(np.asarray(x, float)[order])
        y, truth = np.asarray(y, float)[order], np.full(design.n, math.nan)
    lam = _lambda_for(cfg.lam, design.n)
    spline = fit(design, y, lam)
    diag = diagnostics(spline, y, lam)
    rows = [{"x": float(a), "y": float(b), "fitted": float(c), "truth": float(d)}
            for a, b, c, d in zip(design.x, y, spline.values, truth)]
    summary = {"n": design.n, "lambda": lam, "residual_mse": diag.residual_mse,
               "roughness": diag.roughness, "objective": diag.objective}
    return rows, summary


def run_attack(cfg):
    """Apply each configured attack to one shared clean sample."""
    design = _design(cfg.design, cfg.n, cfg.domain)
    q = cfg.q if cfg.q is not None else budget_for(cfg.n, cfg.q_exponent)
    target = _target(cfg)
    ds = sample_dataset(target, design, cfg.sigma, trial_seed(cfg.master_seed, cfg.n, 0, "noise"))
    baseline = cfg.baseline_lambda if cfg.baseline_lambda is not None else lambda_schedule("R2", cfg.n, q)
    rows, summary = [], {"n": cfg.n, "q": q, "M": cfg.bound, "baseline_lambda": baseline, "attacks": {}}
    for kind in cfg.attacks:
        cd = apply_attack(kind, ds, q, cfg.bound, trial_seed(cfg.master_seed, cfg.n, 0, kind), baseline)
        hit = set(cd.corrupted.tolist())
        for i in range(cfg.n):
            rows.append({"attack": kind, "index": i, "x": float(design.x[i]), "y": float(ds.y[i]),
                         "y_tilde": float(cd.y_tilde[i]), "corrupted": int(i in hit)})
        summary["attacks"][kind] = {"corrupted": cd.corrupted.tolist(),
                                    "clamped": int(cd.diagnostics.get("clamped", 0))}
    rows.sort(key=lambda r: (r["attack"], r["index"]))
    return rows, summary


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def render(rows, columns, fmt, summary=None):
    """Serialize a table: CSV (table only) or JSON (table and summary)."""
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r[c]) for c in columns])
        return buf.getvalue()
    doc = {"columns": list(columns), "rows": [[r[c] for c in columns] for r in rows], "summary": summary or {}}
    return json.dumps(_jsonable(doc), indent=1, sort_keys=True, allow_nan=False) + "\n"


def write_output(text, path=None, stream=None, summary=None):
    """Write ``text`` to ``path`` (or ``stream``); with CSV output the summary goes to ``<path>.summary.json``."""
    if path is None:
        stream.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    if summary is not None:
        with open(f"{path}.summary.json", "w", encoding="utf-8") as fh:
            fh.write(json.dumps(_jsonable(summary), indent=1, sort_keys=True, allow_nan=False) + "\n")

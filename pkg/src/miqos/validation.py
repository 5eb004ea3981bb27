"""Self-checks run by ``miqos validate``.

Each check compares a measured quantity with a fixed threshold.  Rows
with ``passed=None`` are informational: they report a quantity without
gating on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import ExperimentConfig
from .misalignment import MutualInductanceDist
from .oracle import brute_force_policy
from .policy import (
    PolicyKind,
    QoSParams,
    channel_inversion_policy,
    constant_current_policy,
    kkt_residual,
    optimal_policy,
    peak_xi,
    water_filling_policy,
)
from .qos import effective_capacity, ergodic_capacity

__all__ = ["Check", "run_checks", "ks_statistic", "trapezoid_mass", "format_report"]

ORACLE_THETAS = (0.001, 0.01, 0.1, 1.0)
THRESHOLD_THETAS = (1e-3, 1e-2, 1e-1, 1.0, 10.0)


@dataclass(frozen=True)
class Check:
    name: str
    measured: str
    expected: str
    passed: bool | None


def ks_statistic(samples: np.ndarray, dist: MutualInductanceDist) -> float:
    """Two-sided Kolmogorov-Smirnov distance to the model CDF."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = len(x)
    f = dist.cdf(x)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


def trapezoid_mass(dist: MutualInductanceDist, n: int = 10 ** 7, chunk: int = 10 ** 6) -> float:
    """Trapezoid-rule integral of the density over ``[-m_max, m_max]``."""
    h = 2.0 * dist.m_max / n
    total = 0.0
    for start in range(0, n + 1, chunk):
        k = np.arange(start, min(start + chunk, n + 1))
        w = np.where((k == 0) | (k == n), 0.5, 1.0)
        total += float(np.sum(w * dist.pdf(-dist.m_max + k * h)))
    return total * h


def _row(name, value, op, limit, fmt=".3g"):
    ok = value < limit if op == "<" else value <= limit
    return Check(name, f"{value:{fmt}}", f"{op} {limit:g}", bool(ok))


def _nonincreasing(values, rel=1e-12):
    v = np.asarray(values)
    return bool(np.all(np.diff(v) <= rel * np.abs(v[:-1]) + 1e-15))


def run_checks(cfg: ExperimentConfig, n_samples: int = 10 ** 6) -> list[Check]:
    budget, dist = cfg.link()
    cons, quad, root = cfg.constraints, cfg.quadrature, cfg.root
    checks: list[Check] = []

    # distribution
    checks.append(_row("alignment normalization |c - 1|", abs(dist.normalization - 1.0), "<", 0.1))
    checks.append(_row("density mass |trapezoid(1e7) - 1|", abs(trapezoid_mass(dist) - 1.0), "<", 1e-6))
    rng = np.random.default_rng(cfg.rng_seed)
    ks = ks_statistic(dist.sample(rng, n_samples), dist)
    # 0.002 at the default 1e6 samples; the alpha = 0.01 critical value for fewer
    checks.append(_row(f"KS statistic ({n_samples} samples)", ks, "<",
                       max(0.002, 1.63 / math.sqrt(n_samples))))

    # regime
    probe = optimal_policy(budget, dist, cons, QoSParams(ORACLE_THETAS[0]), quad, root)
    slack = probe.kind is PolicyKind.CAP_EVERYWHERE
    checks.append(Check(
        "power regime",
        "cap-everywhere (power slack)" if slack else "power-limited (binding)",
        "-", None,
    ))

    # closed form against the brute-force oracle, KKT and power equality
    for theta in ORACLE_THETAS:
        pol = optimal_policy(budget, dist, cons, QoSParams(theta), quad, root)
        orc = brute_force_policy(budget, dist, cons.r_max, cons.avg_power, theta)
        err = float(np.max(np.abs(pol(orc.m) - orc.xi)) / np.max(orc.xi))
        checks.append(_row(f"theta={theta:g}: oracle sup |dxi|/max xi", err, "<", 1e-3))
        ec = pol.solution.effective_capacity
        checks.append(_row(f"theta={theta:g}: oracle EC rel. error",
                           abs(ec - orc.effective_capacity) / ec, "<", 1e-4))
        if pol.kind is PolicyKind.OPTIMAL:
            lo = max(pol.solution.m1, budget.m_min)
            hi = min(pol.solution.m2, budget.m_max)
            if hi > lo:
                pts = np.linspace(lo, hi, 102)[1:-1]
                checks.append(_row(f"theta={theta:g}: KKT stationarity residual",
                                   float(np.max(kkt_residual(pol, pts))), "<", 1e-9))
        if pol.solution.power_constraint_binding:
            checks.append(_row(f"theta={theta:g}: power equality rel. error",
                               abs(pol.solution.power_used - cons.avg_power) / cons.avg_power,
                               "<", 1e-6))

    # theta -> 0 limits
    wfwc = water_filling_policy(budget, dist, cons, quad, root, capped=True)
    opt6 = optimal_policy(budget, dist, cons, QoSParams(1e-6), quad, root)
    er = ergodic_capacity(wfwc, dist, quad)
    checks.append(_row("EC(theta=1e-6) vs ergodic E[R] rel. error",
                       abs(opt6.solution.effective_capacity - er) / er, "<", 1e-3))
    opt4 = optimal_policy(budget, dist, cons, QoSParams(1e-4), quad, root)
    m = np.linspace(budget.m_min, budget.m_max, 4001)
    scale = peak_xi(budget.m_min, budget, cons)
    checks.append(_row("sup |xi_opt(1e-4) - xi_wf| / peak scale",
                       float(np.max(np.abs(opt4(m) - wfwc(m)))) / scale, "<", 1e-2))

    # effective-capacity dominance and monotonicity over the configured grid
    if cfg.theta_grid:
        baselines = {
            "wf": water_filling_policy(budget, dist, cons, quad, root, capped=False),
            "wfwc": wfwc,
            "channel_inversion": channel_inversion_policy(budget, dist, cons, quad, root),
            "constant_current": constant_current_policy(budget, dist, cons, quad, root),
        }
        cols = {name: [] for name in ("optimal", *baselines)}
        for theta in cfg.theta_grid:
            q = QoSParams(theta)
            cols["optimal"].append(
                optimal_policy(budget, dist, cons, q, quad, root).solution.effective_capacity)
            for name, pol in baselines.items():
                cols[name].append(effective_capacity(pol, dist, q, quad))
        opt = np.array(cols["optimal"])
        worst = min(float(np.min(opt - np.array(v))) for k, v in cols.items() if k != "optimal")
        checks.append(Check("EC dominance: min(ec_optimal - ec_baseline)",
                            f"{worst:.3g}", ">= -1e-09", worst >= -1e-9))
        mono = all(_nonincreasing(v) for v in cols.values())
        checks.append(Check("EC columns non-increasing in theta", str(mono), "True", mono))

    # threshold behaviour and the theta -> 0 outage comparison
    m1s, m2s = [], []
    for theta in THRESHOLD_THETAS:
        sol = optimal_policy(budget, dist, cons, QoSParams(theta), quad, root).solution
        m1s.append(sol.m1)
        m2s.append(sol.m2)
    if not slack:
        m2_up = bool(np.all(np.diff(m2s) >= 0))
        checks.append(Check("M2(theta) non-decreasing", str(m2_up), "True", m2_up))
        m1_trend = "non-decreasing" if np.all(np.diff(m1s) >= 0) else (
            "non-increasing" if np.all(np.diff(m1s) <= 0) else "mixed")
        checks.append(Check("M1(theta) trend over 1e-3..10", m1_trend, "-", None))
    wf = water_filling_policy(budget, dist, cons, quad, root, capped=False)
    diff = wf.solution.outage_probability - wfwc.solution.outage_probability
    rel = diff / wf.solution.outage_probability if wf.solution.outage_probability > 0 else 0.0
    checks.append(Check(
        "outage(WF) - outage(WFWC), theta -> 0",
        f"abs {diff:.3g}, rel {rel:.3g}; M1 {wf.solution.m1 / budget.m_max:.4f} vs "
        f"{wfwc.solution.m1 / budget.m_max:.4f} m_max", "-", None,
    ))
    return checks


def format_report(checks: list[Check]) -> str:
    width = max(len(c.name) for c in checks)
    mwidth = max(len(c.measured) for c in checks)
    lines = []
    for c in checks:
        status = "INFO" if c.passed is None else ("PASS" if c.passed else "FAIL")
        lines.append(f"{status:4}  {c.name:<{width}}  {c.measured:<{mwidth}}  {c.expected}")
    n_fail = sum(c.passed is False for c in checks)
    lines.append(f"{len(checks)} checks, {n_fail} failed")
    return "\n".join(lines)


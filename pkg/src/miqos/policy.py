"""Transmit-current policies ``xi(M) = I_t(M)**2``.

The QoS-optimal policy maximizes effective capacity under an average
power budget and a peak-rate bound.  Its KKT solution has three branches
in ``|M|``:

* off below the cutoff ``M1``,
* a QoS-weighted water level between ``M1`` and ``M2``,
* the peak bound (rate exactly ``r_max``) above ``M2``.

The single multiplier ``lambda0`` is found by bisection on the power
residual, in ``log(lambda0)`` because it spans many decades as theta
grows.  The baselines (water-filling with and without the cap, channel
inversion, constant current) are built here too.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .channel import LinkBudget
from .errors import ConvergenceError, InvalidParameterError, NoRootError
from .misalignment import MutualInductanceDist
from .numerics import QuadratureSpec, RootSpec, solve_monotone_root
from .qos import LN2, QoSParams, effective_capacity, ergodic_capacity

__all__ = [
    "PolicyKind",
    "PolicyConstraints",
    "QoSParams",
    "PolicySolution",
    "CurrentPolicy",
    "peak_xi",
    "optimal_policy",
    "water_filling_policy",
    "channel_inversion_policy",
    "constant_current_policy",
    "outage_probability",
    "thresholds",
    "kkt_residual",
]


class PolicyKind(str, enum.Enum):
    OPTIMAL = "optimal-qos"
    WATER_FILLING = "water-filling"
    WATER_FILLING_CAPPED = "water-filling-capped"
    CHANNEL_INVERSION = "channel-inversion"
    CONSTANT_CURRENT = "constant-current"
    CAP_EVERYWHERE = "cap-everywhere"


@dataclass(frozen=True)
class PolicyConstraints:
    r_max: float  # bits/s/Hz
    avg_power: float  # W

    def __post_init__(self):
        for name in ("r_max", "avg_power"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise InvalidParameterError(f"{name} must be finite and positive, got {v!r}")


@dataclass(frozen=True)
class PolicySolution:
    """Metadata and diagnostics of a constructed policy.

    ``m1`` is the outage cutoff (0 when the policy never switches off) and
    ``m2`` the start of the peak-bound region (``inf`` when the bound never
    binds).  Both are raw threshold values and may fall outside
    ``[m_min, m_max]``.  ``effective_capacity`` is taken at ``theta``;
    ``theta=None`` means the ergodic (``theta -> 0``) value.
    """

    kind: PolicyKind
    lambda0: float | None
    m1: float
    m2: float
    power_used: float
    outage_probability: float
    effective_capacity: float
    power_constraint_binding: bool
    theta: float | None = None


@dataclass(frozen=True, eq=False)
class CurrentPolicy:
    """Callable ``xi(M)``; zero outside the support of ``M``."""

    solution: PolicySolution
    budget: LinkBudget
    constraints: PolicyConstraints
    xi_abs: Callable[[np.ndarray], np.ndarray]
    breakpoints: tuple[float, ...] = ()

    @property
    def kind(self) -> PolicyKind:
        return self.solution.kind

    def __call__(self, m):
        m = np.abs(np.asarray(m, dtype=float))
        inside = (m >= self.budget.m_min) & (m <= self.budget.m_max)
        out = np.zeros_like(m)
        if np.any(inside):
            out[inside] = self.xi_abs(m[inside])
        return float(out) if out.ndim == 0 else out


def peak_xi(m, budget: LinkBudget, cons: PolicyConstraints):
    """Largest ``xi`` that keeps the Shannon rate at or below ``r_max``."""
    m = np.asarray(m, dtype=float)
    if np.any(m == 0):
        raise InvalidParameterError("peak current is unbounded at M = 0")
    out = 2.0 * math.expm1(cons.r_max * LN2) / (budget.b * m * m)
    return float(out) if out.ndim == 0 else out


def _gain(m, budget: LinkBudget):
    """``M^2 / (R_t + a M^2)``, increasing in ``|M|``."""
    m2 = m * m
    return m2 / (budget.r_tx + budget.a * m2)


def _threshold(log_level: float, budget: LinkBudget) -> float:
    """Solve ``gain(M) = exp(log_level)`` for ``M``; ``inf`` if unreachable."""
    if log_level < -700:
        return 0.0
    den = math.exp(-log_level) - budget.a if log_level < 700 else -budget.a
    if den <= 0:
        return math.inf
    return math.sqrt(budget.r_tx / den)


def thresholds(log_lambda0: float, beta: float, budget: LinkBudget,
               cons: PolicyConstraints, capped: bool = True) -> tuple[float, float]:
    """Cutoff ``M1`` and peak threshold ``M2`` for a given ``log(lambda0)``."""
    m1 = _threshold(log_lambda0, budget)
    m2 = _threshold(log_lambda0 + cons.r_max * (beta + 1.0) * LN2, budget) if capped else math.inf
    return m1, m2


def _qos_xi(m, log_lambda0, beta, m1, m2, budget, cons):
    g = _gain(m, budget)
    mid = 2.0 / (budget.b * m * m) * np.expm1((np.log(g) - log_lambda0) / (beta + 1.0))
    peak = 2.0 * math.expm1(cons.r_max * LN2) / (budget.b * m * m)
    out = np.clip(mid, 0.0, peak)
    out = np.where(m <= m1, 0.0, out)
    return np.where(m >= m2, peak, out)


def _wf_xi(m, lambda0, m1, m2, budget, cons, capped):
    """Water-filling level ``(2/b)(1/(lambda0 (R_t + a M^2)) - 1/M^2)``."""
    m_sq = m * m
    mid = 2.0 / budget.b * (1.0 / (lambda0 * (budget.r_tx + budget.a * m_sq)) - 1.0 / m_sq)
    out = np.maximum(mid, 0.0)
    out = np.where(m <= m1, 0.0, out)
    if capped:
        peak = 2.0 * math.expm1(cons.r_max * LN2) / (budget.b * m_sq)
        out = np.where(m >= m2, peak, np.minimum(out, peak))
    return out


def _power(dist, xi_abs, budget, breakpoints, quad) -> float:
    return dist.expect(
        lambda m: 0.5 * xi_abs(m) * (budget.r_tx + budget.a * m * m), breakpoints, quad
    )


def _cap_power(dist, budget, cons, quad) -> float:
    """Average power of transmitting at the peak bound for every ``M``."""
    k = 2.0 * math.expm1(cons.r_max * LN2) / budget.b
    return dist.expect(lambda m: 0.5 * k * (budget.r_tx / (m * m) + budget.a), (), quad)


def _solve_log_lambda(residual, lo, hi, root, what):
    try:
        return solve_monotone_root(residual, lo, hi, root)
    except NoRootError as exc:
        raise ConvergenceError(
            f"{what}: no power-equality root in log(lambda0) bracket "
            f"[{exc.lo:.6g}, {exc.hi:.6g}] (residuals {exc.g_lo:.3g}, {exc.g_hi:.3g} W)",
            residual=min(abs(exc.g_lo), abs(exc.g_hi)),
        ) from exc
    except ConvergenceError as exc:
        raise ConvergenceError(
            f"{what}: {exc} (best residual {exc.residual:.3g} W)",
            estimate=exc.estimate, residual=exc.residual,
        ) from exc


def outage_probability(policy: CurrentPolicy, dist: MutualInductanceDist) -> float:
    """Probability that the policy is off, ``P(|M| <= M1)``."""
    m1 = policy.solution.m1
    if m1 <= dist.m_min:
        return 0.0
    if m1 >= dist.m_max:
        return 1.0
    return float(min(1.0, max(0.0, 2.0 * dist.cdf(m1) - 1.0)))


def _finish(kind, lambda0, m1, m2, xi_abs, budget, cons, dist, qos, quad, binding):
    breaks = tuple(x for x in (m1, m2) if math.isfinite(x))
    policy = CurrentPolicy(
        PolicySolution(kind, lambda0, m1, m2, 0.0, 0.0, 0.0, binding,
                       None if qos is None else qos.theta),
        budget, cons, xi_abs, breaks,
    )
    power = _power(dist, policy, budget, breaks, quad)
    outage = outage_probability(policy, dist)
    if qos is None or qos.theta == 0:
        ec = ergodic_capacity(policy, dist, quad)
    else:
        ec = effective_capacity(policy, dist, qos, quad)
    solution = replace(policy.solution, power_used=power, outage_probability=outage,
                       effective_capacity=ec)
    return replace(policy, solution=solution)


def _cap_everywhere(budget, cons, dist, qos, quad, kind=PolicyKind.CAP_EVERYWHERE):
    k = 2.0 * math.expm1(cons.r_max * LN2) / budget.b
    return _finish(kind, 0.0, 0.0, 0.0, lambda m: k / (m * m),
                   budget, cons, dist, qos, quad, binding=False)


def optimal_policy(
    budget: LinkBudget,
    dist: MutualInductanceDist,
    cons: PolicyConstraints,
    qos: QoSParams,
    quad: QuadratureSpec | None = None,
    root: RootSpec | None = None,
) -> CurrentPolicy:
    """Effective-capacity-optimal policy at QoS exponent ``qos.theta``.

    ``theta = 0`` is handed to :func:`water_filling_policy` (the exact
    limit).  An infinite ``theta`` is rejected; use a large finite value.
    When transmitting at the peak bound everywhere fits the power budget,
    that is optimal and the solution is reported as ``cap-everywhere``
    with the power constraint slack.
    """
    if math.isinf(qos.theta):
        raise InvalidParameterError(
            "theta = inf has no policy here; use a large finite theta instead"
        )
    if qos.theta == 0:
        return water_filling_policy(budget, dist, cons, quad, root, capped=True, qos=qos)
    if _cap_power(dist, budget, cons, quad) <= cons.avg_power:
        return _cap_everywhere(budget, cons, dist, qos, quad)

    beta = qos.beta

    def xi_for(log_lam):
        m1, m2 = thresholds(log_lam, beta, budget, cons)
        return (lambda m: _qos_xi(m, log_lam, beta, m1, m2, budget, cons)), m1, m2

    def residual(log_lam):
        xi, m1, m2 = xi_for(log_lam)
        return _power(dist, xi, budget, (m1, m2), quad) - cons.avg_power

    # hi: cutoff at m_max (nothing sent); lo: peak threshold at m_min (cap everywhere)
    hi = math.log(_gain(budget.m_max, budget))
    lo = math.log(_gain(budget.m_min, budget)) - cons.r_max * (beta + 1.0) * LN2
    log_lam = _solve_log_lambda(residual, lo, hi, root, f"optimal policy at theta={qos.theta:g}")
    xi, m1, m2 = xi_for(log_lam)
    return _finish(PolicyKind.OPTIMAL, math.exp(log_lam), m1, m2, xi,
                   budget, cons, dist, qos, quad, binding=True)


def water_filling_policy(
    budget: LinkBudget,
    dist: MutualInductanceDist,
    cons: PolicyConstraints,
    quad: QuadratureSpec | None = None,
    root: RootSpec | None = None,
    capped: bool = True,
    qos: QoSParams | None = None,
) -> CurrentPolicy:
    """Ergodic-capacity water-filling, optionally truncated at the peak bound.

    With ``capped=False`` the policy ignores the peak bound entirely; it is
    a comparison baseline and may exceed the bound.  ``qos`` only selects
    the theta at which the reported effective capacity is evaluated.
    """
    kind = PolicyKind.WATER_FILLING_CAPPED if capped else PolicyKind.WATER_FILLING
    if capped and _cap_power(dist, budget, cons, quad) <= cons.avg_power:
        return _cap_everywhere(budget, cons, dist, qos, quad)

    def xi_for(log_lam):
        m1, m2 = thresholds(log_lam, 0.0, budget, cons, capped)
        lam = math.exp(log_lam)
        return (lambda m: _wf_xi(m, lam, m1, m2, budget, cons, capped)), m1, m2

    def residual(log_lam):
        xi, m1, m2 = xi_for(log_lam)
        return _power(dist, xi, budget, (m1, m2), quad) - cons.avg_power

    hi = math.log(_gain(budget.m_max, budget))
    lo = math.log(_gain(budget.m_min, budget)) - cons.r_max * LN2
    log_lam = _solve_log_lambda(residual, lo, hi, root, f"{kind.value} policy")
    xi, m1, m2 = xi_for(log_lam)
    return _finish(kind, math.exp(log_lam), m1, m2, xi,
                   budget, cons, dist, qos, quad, binding=True)


def channel_inversion_policy(
    budget: LinkBudget,
    dist: MutualInductanceDist,
    cons: PolicyConstraints,
    quad: QuadratureSpec | None = None,
    root: RootSpec | None = None,
    qos: QoSParams | None = None,
) -> CurrentPolicy:
    """Constant receive SNR: ``xi = k / M^2`` with ``k`` set by the power budget.

    If ``k`` would exceed the peak bound the policy sits on the bound
    everywhere and the budget is not fully used.
    """
    inv_m2 = dist.expect(lambda m: 1.0 / (m * m), (), quad)
    k = 2.0 * cons.avg_power / (budget.r_tx * inv_m2 + budget.a)
    k_cap = 2.0 * math.expm1(cons.r_max * LN2) / budget.b
    if k > k_cap:
        return _cap_everywhere(budget, cons, dist, qos, quad, PolicyKind.CHANNEL_INVERSION)
    return _finish(PolicyKind.CHANNEL_INVERSION, None, 0.0, math.inf,
                   lambda m: k / (m * m), budget, cons, dist, qos, quad, binding=True)


def constant_current_policy(
    budget: LinkBudget,
    dist: MutualInductanceDist,
    cons: PolicyConstraints,
    quad: QuadratureSpec | None = None,
    root: RootSpec | None = None,
    qos: QoSParams | None = None,
) -> CurrentPolicy:
    """Same ``xi0`` for every ``M``, clipped at the peak bound.

    Clipping frees power, so ``xi0`` is re-solved with the clip in place
    until the budget is met exactly.
    """
    k_cap = 2.0 * math.expm1(cons.r_max * LN2) / budget.b

    def xi_for(xi0):
        m2 = math.sqrt(k_cap / xi0) if xi0 > 0 else math.inf
        return (lambda m: np.minimum(xi0, k_cap / (m * m))), m2

    mean_load = dist.expect(lambda m: budget.r_tx + budget.a * m * m, (), quad)
    xi0 = 2.0 * cons.avg_power / mean_load
    if xi0 > k_cap / budget.m_max ** 2:
        if _cap_power(dist, budget, cons, quad) <= cons.avg_power:
            return _cap_everywhere(budget, cons, dist, qos, quad, PolicyKind.CONSTANT_CURRENT)

        def residual(x):
            xi, m2 = xi_for(x)
            return _power(dist, xi, budget, (m2,), quad) - cons.avg_power

        try:
            xi0 = solve_monotone_root(residual, k_cap / budget.m_max ** 2,
                                      k_cap / budget.m_min ** 2, root)
        except NoRootError as exc:
            raise ConvergenceError("constant-current level: no power-equality root") from exc
    xi, m2 = xi_for(xi0)
    if m2 >= budget.m_max:
        m2 = math.inf
    return _finish(PolicyKind.CONSTANT_CURRENT, None, 0.0, m2, xi,
                   budget, cons, dist, qos, quad, binding=True)


def kkt_residual(policy: CurrentPolicy, m) -> np.ndarray:
    """Relative stationarity residual of the QoS-optimal policy at ``m``.

    On the water-level branch the marginal objective gain
    ``beta c M^2 (1 + c M^2 xi)^(-beta-1)`` (with ``c = b/2``) must equal the
    marginal power price ``lambda0 b beta (R_t + a M^2) / 2``.
    """
    sol = policy.solution
    if sol.kind is not PolicyKind.OPTIMAL or sol.theta is None:
        raise InvalidParameterError("KKT residual is defined for the QoS-optimal policy only")
    budget = policy.budget
    beta = sol.theta / LN2
    m = np.abs(np.asarray(m, dtype=float))
    c = 0.5 * budget.b * m * m
    gain = beta * c * np.exp(-(beta + 1.0) * np.log1p(c * policy(m)))
    price = sol.lambda0 * budget.b * beta * 0.5 * (budget.r_tx + budget.a * m * m)
    return np.abs(gain - price) / price

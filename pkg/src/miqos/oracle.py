"""Brute-force reference solver used to check the closed-form policy.

``|M|`` is cut into equal-width bins that carry exact probability masses.
For a trial power multiplier ``nu``, every bin solves its own scalar convex
problem

    minimize  (1 + b M^2 xi / 2)**(-beta) + nu * xi (R_t + a M^2) / 2
    over      0 <= xi <= peak(M)

by bisection on the derivative.  An outer bisection on ``log(nu)`` then
meets the power budget.  Nothing here uses the threshold formulas or the
closed-form water level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import LinkBudget
from .errors import InvalidParameterError
from .misalignment import MutualInductanceDist

__all__ = ["OracleSolution", "brute_force_policy"]

_INNER_ITERS = 200
_OUTER_ITERS = 400


@dataclass(frozen=True, eq=False)
class OracleSolution:
    m: np.ndarray  # bin centres, henries
    mass: np.ndarray  # probability of |M| falling in each bin
    xi: np.ndarray
    multiplier: float  # nu; 0 when the budget is slack
    power: float
    effective_capacity: float


def _bin_xi(nu, m, beta, budget, peak):
    c = 0.5 * budget.b * m * m
    cost = 0.5 * nu * (budget.r_tx + budget.a * m * m)

    def slope(xi):
        # derivative of the per-bin Lagrangian, increasing in xi
        return -beta * c * np.exp(-(beta + 1.0) * np.log1p(c * xi)) + cost

    lo = np.zeros_like(m)
    hi = peak.copy()
    for _ in range(_INNER_ITERS):
        mid = 0.5 * (lo + hi)
        pos = slope(mid) > 0
        hi = np.where(pos, mid, hi)
        lo = np.where(pos, lo, mid)
    xi = 0.5 * (lo + hi)
    xi = np.where(slope(np.zeros_like(m)) >= 0, 0.0, xi)
    return np.where(slope(peak) <= 0, peak, xi)


def brute_force_policy(
    budget: LinkBudget,
    dist: MutualInductanceDist,
    r_max: float,
    avg_power: float,
    theta: float,
    n_bins: int = 512,
) -> OracleSolution:
    if not theta > 0:
        raise InvalidParameterError("oracle needs theta > 0")
    beta = theta / math.log(2.0)
    edges = np.linspace(dist.m_min, dist.m_max, n_bins + 1)
    m = 0.5 * (edges[:-1] + edges[1:])
    mass = 2.0 * np.diff(dist.cdf(edges))
    mass /= mass.sum()
    peak = 2.0 * (2.0 ** r_max - 1.0) / (budget.b * m * m)
    load = 0.5 * (budget.r_tx + budget.a * m * m)

    def power(xi):
        return float(np.sum(mass * xi * load))

    if power(peak) <= avg_power:
        xi, nu = peak, 0.0
    else:
        lo, hi = -800.0, 100.0
        for _ in range(_OUTER_ITERS):
            mid = 0.5 * (lo + hi)
            if not lo < mid < hi:
                break
            if power(_bin_xi(math.exp(mid), m, beta, budget, peak)) > avg_power:
                lo = mid
            else:
                hi = mid
        nu = math.exp(0.5 * (lo + hi))
        xi = _bin_xi(nu, m, beta, budget, peak)

    rate = np.minimum(np.log2(1.0 + 0.5 * budget.b * m * m * xi), r_max)
    ec = -math.log1p(float(np.sum(mass * np.expm1(-theta * rate)))) / theta
    return OracleSolution(m, mass, xi, nu, power(xi), ec)

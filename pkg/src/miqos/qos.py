"""Statistical delay-QoS metrics.

One channel use per unit time is assumed throughout, so a spectral
efficiency in bits/s/Hz doubles as the service rate of the queue and the
QoS exponent ``theta`` is per normalized bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError
from .numerics import QuadratureSpec

__all__ = [
    "QoSParams",
    "QueueModel",
    "served_rate",
    "effective_capacity",
    "ergodic_capacity",
    "supported_arrival_rate",
    "overflow_probability",
    "required_qos_exponent",
]

LN2 = math.log(2.0)


@dataclass(frozen=True)
class QoSParams:
    """QoS exponent ``theta`` and its base-2 counterpart ``beta = theta / ln 2``."""

    theta: float
    beta: float = field(init=False)

    def __post_init__(self):
        if math.isnan(self.theta) or self.theta < 0:
            raise InvalidParameterError(f"theta must be >= 0, got {self.theta!r}")
        object.__setattr__(self, "beta", self.theta / LN2)


@dataclass(frozen=True)
class QueueModel:
    q_threshold: float  # bits
    arrival_rate: float = 0.0  # bits per channel use

    def __post_init__(self):
        if not (self.q_threshold >= 0 and self.arrival_rate >= 0):
            raise InvalidParameterError("queue threshold and arrival rate must be >= 0")


def served_rate(policy, m):
    """Rate the link actually delivers: Shannon rate capped at ``r_max``.

    For policies that respect the peak-current bound the cap is inactive.
    Uncapped policies cannot push the transmitter past its hardware rate,
    so current above the bound is wasted.
    """
    m = np.asarray(m, dtype=float)
    snr = 0.5 * policy.budget.b * policy(m) * m * m
    return np.minimum(np.log1p(snr) / LN2, policy.constraints.r_max)


def effective_capacity(policy, dist, qos: QoSParams,
                       quad: QuadratureSpec | None = None) -> float:
    """``-(1/theta) ln E[exp(-theta R(M))]`` in bits/s/Hz.

    Evaluated as ``-log1p(E[expm1(-theta R)]) / theta`` so that tiny
    ``theta`` keeps full precision.  The result is clipped to
    ``[0, r_max]`` to absorb rounding.
    """
    if not qos.theta > 0:
        raise InvalidParameterError("effective capacity needs theta > 0")
    if math.isinf(qos.theta):
        raise InvalidParameterError("theta must be finite")
    theta = qos.theta
    shortfall = dist.expect(
        lambda m: np.expm1(-theta * served_rate(policy, m)), policy.breakpoints, quad
    )
    ec = -math.log1p(shortfall) / theta
    return min(max(ec, 0.0), policy.constraints.r_max)


def ergodic_capacity(policy, dist, quad: QuadratureSpec | None = None) -> float:
    """``E[R(M)]``, the ``theta -> 0`` limit of the effective capacity."""
    return dist.expect(lambda m: served_rate(policy, m), policy.breakpoints, quad)


def supported_arrival_rate(policy, dist, qos: QoSParams,
                           quad: QuadratureSpec | None = None) -> float:
    """Largest constant arrival rate the link serves at QoS exponent ``theta``."""
    return effective_capacity(policy, dist, qos, quad)


def overflow_probability(qos: QoSParams, queue: QueueModel) -> float:
    """Large-deviation estimate ``P(Q > Q_th) = exp(-theta Q_th)``."""
    return min(1.0, max(0.0, math.exp(-qos.theta * queue.q_threshold)))


def required_qos_exponent(queue: QueueModel, target_overflow: float) -> float:
    """Exponent needed so that ``P(Q > Q_th)`` equals ``target_overflow``."""
    if not 0.0 < target_overflow < 1.0:
        raise InvalidParameterError("target_overflow must lie in (0, 1)")
    if not queue.q_threshold > 0:
        raise InvalidParameterError("q_threshold must be positive")
    return -math.log(target_overflow) / queue.q_threshold

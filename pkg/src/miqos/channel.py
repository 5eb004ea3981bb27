"""Physical model of a resonant two-coil magnetic-induction link.

All quantities are SI.  Both loops are assumed tuned to resonance, so the
only frequency dependence left is through the angular frequency folded
into the constants ``a`` and ``b`` of :class:`LinkBudget`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from .errors import InvalidParameterError

__all__ = [
    "VACUUM_PERMEABILITY",
    "CoilGeometry",
    "CircuitParams",
    "LinkBudget",
    "mutual_inductance_max",
    "derive_link_budget",
    "transmit_power",
    "receive_snr",
    "instantaneous_rate",
]

# Seawater is effectively non-magnetic.
VACUUM_PERMEABILITY = 4e-7 * math.pi


def _require_positive(obj) -> None:
    for f in fields(obj):
        v = getattr(obj, f.name)
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
            raise InvalidParameterError(
                f"{type(obj).__name__}.{f.name} must be a finite positive number, got {v!r}"
            )


@dataclass(frozen=True)
class CoilGeometry:
    """Coil pair geometry.

    The misalignment model assumes the receive coil sits in the uniform
    field of a much larger transmit coil (``radius_rx << radius_tx``).
    Other geometries are accepted; the result is then only as good as
    that assumption.
    """

    turns_tx: int
    turns_rx: int
    radius_tx: float  # m
    radius_rx: float  # m
    distance: float  # m
    permeability: float = VACUUM_PERMEABILITY  # H/m

    def __post_init__(self):
        _require_positive(self)


@dataclass(frozen=True)
class CircuitParams:
    frequency: float  # Hz
    r_tx: float  # ohm
    r_rx: float  # ohm
    r_load: float  # ohm
    noise_power: float  # W, baseband noise variance

    def __post_init__(self):
        _require_positive(self)


@dataclass(frozen=True)
class LinkBudget:
    """Constants derived from geometry and circuit.

    Attributes
    ----------
    a : float
        Reflected-resistance scale, ``(2 pi f)^2 / (R_L + R_r)``.  The
        transmit loop sees ``R_t + a M^2``.
    b : float
        SNR scale, ``(2 pi f)^2 R_L / ((R_L + R_r)^2 sigma^2)``, so that the
        receive SNR is ``b xi M^2 / 2``.
    m_max : float
        Mutual inductance of the coaxial, parallel configuration.
    m_min : float
        Lower edge of the ``|M|`` support, ``m_max / sqrt(3)``.
    r_tx : float
        Transmit loop resistance, carried here because every power
        expression needs it.
    """

    a: float
    b: float
    m_max: float
    m_min: float
    r_tx: float

    def __post_init__(self):
        _require_positive(self)


def mutual_inductance_max(geom: CoilGeometry) -> float:
    """Mutual inductance of perfectly aligned coils, in henries.

    Scales as ``distance**-3``.
    """
    return (
        geom.permeability * math.pi * geom.turns_tx * geom.turns_rx
        * geom.radius_tx ** 2 * geom.radius_rx ** 2 / (2.0 * geom.distance ** 3)
    )


def derive_link_budget(geom: CoilGeometry, circ: CircuitParams) -> LinkBudget:
    w2 = (2.0 * math.pi * circ.frequency) ** 2
    r_rx_total = circ.r_load + circ.r_rx
    m_max = mutual_inductance_max(geom)
    return LinkBudget(
        a=w2 / r_rx_total,
        b=w2 * circ.r_load / (r_rx_total ** 2 * circ.noise_power),
        m_max=m_max,
        m_min=m_max / math.sqrt(3.0),
        r_tx=circ.r_tx,
    )


def _check_xi(xi):
    xi = np.asarray(xi, dtype=float)
    if np.any(xi < 0) or np.any(np.isnan(xi)):
        raise InvalidParameterError("squared current xi must be non-negative")
    return xi


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


def transmit_power(xi, m, budget: LinkBudget, circ: CircuitParams | None = None):
    """Time-averaged transmit power ``xi (R_t + a M^2) / 2`` in watts.

    ``xi`` is the squared transmit current amplitude.  The reflected
    resistance ``a M^2`` grows with coupling, so the same current costs
    more power on a strong channel.
    """
    xi = _check_xi(xi)
    r_tx = circ.r_tx if circ is not None else budget.r_tx
    m = np.asarray(m, dtype=float)
    return _scalar_or_array(0.5 * xi * (r_tx + budget.a * m * m))


def receive_snr(xi, m, budget: LinkBudget):
    """Receive SNR ``b xi M^2 / 2`` (dimensionless, even in ``M``)."""
    xi = _check_xi(xi)
    m = np.asarray(m, dtype=float)
    return _scalar_or_array(0.5 * budget.b * xi * m * m)


def instantaneous_rate(xi, m, budget: LinkBudget):
    """Shannon spectral efficiency ``log2(1 + SNR)`` in bits/s/Hz."""
    snr = np.asarray(receive_snr(xi, m, budget))
    return _scalar_or_array(np.log1p(snr) / math.log(2.0))

"""Delay-QoS-aware transmit-current control for magnetic-induction links."""

from .channel import (
    CircuitParams,
    CoilGeometry,
    LinkBudget,
    derive_link_budget,
    instantaneous_rate,
    mutual_inductance_max,
    receive_snr,
    transmit_power,
)
from .config import ExperimentConfig, default_config, load_config
from .errors import ConvergenceError, InvalidParameterError, NoRootError
from .misalignment import MutualInductanceDist, alignment_pdf, build_distribution
from .numerics import QuadratureSpec, RootSpec, integrate, solve_monotone_root
from .policy import (
    CurrentPolicy,
    PolicyConstraints,
    PolicyKind,
    PolicySolution,
    channel_inversion_policy,
    constant_current_policy,
    optimal_policy,
    outage_probability,
    peak_xi,
    water_filling_policy,
)
from .qos import (
    QoSParams,
    QueueModel,
    effective_capacity,
    ergodic_capacity,
    overflow_probability,
    required_qos_exponent,
    supported_arrival_rate,
)

__version__ = "0.1.0"

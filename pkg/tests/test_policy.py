import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from miqos.channel import transmit_power
from miqos.errors import ConvergenceError, InvalidParameterError
from miqos.misalignment import alignment_pdf
from miqos.numerics import RootSpec
from miqos.oracle import brute_force_policy
from miqos.policy import (
    PolicyConstraints,
    PolicyKind,
    QoSParams,
    channel_inversion_policy,
    constant_current_policy,
    kkt_residual,
    optimal_policy,
    peak_xi,
    thresholds,
    water_filling_policy,
)
from miqos.qos import effective_capacity, ergodic_capacity

# mpmath: 2 P / E[R_t + a M^2] with E[J^2] = 0.70088593028119469967
XI0_REF = 0.89998064026103408


@pytest.fixture(scope="module")
def wf(budget, dist, cons):
    return water_filling_policy(budget, dist, cons, capped=False)


@pytest.fixture(scope="module")
def wfwc(budget, dist, cons):
    return water_filling_policy(budget, dist, cons, capped=True)


@pytest.fixture(scope="module")
def link20(cfg20):
    budget, dist = cfg20.link()
    return budget, dist, cfg20.constraints


def mc_power(pol, dist, budget, n=400_000, seed=5):
    m = dist.sample(np.random.default_rng(seed), n)
    return float(np.mean(transmit_power(pol(m), m, budget)))


def closed_form_threshold(level, budget):
    # gain(M) = level  <=>  M^2 = level R_t / (1 - a level)
    return math.sqrt(level * budget.r_tx / (1.0 - budget.a * level))


# ---- water-filling -------------------------------------------------------

def test_wf_threshold_closed_form(wf, budget):
    s = wf.solution
    assert s.m1 == pytest.approx(closed_form_threshold(s.lambda0, budget), rel=1e-12)
    assert s.m1 / budget.m_max == pytest.approx(0.84532278, rel=1e-6)
    assert s.m2 == math.inf


def test_wf_level_is_zero_at_cutoff(wf, budget):
    m1 = wf.solution.m1
    assert wf(m1 * (1 + 1e-9)) == pytest.approx(0.0, abs=1e-6 * peak_xi(m1, budget, wf.constraints))
    assert wf(m1 * 0.999) == 0.0
    assert wf(m1 * 1.001) > 0.0


def test_wf_uses_exact_budget(wf, wfwc, budget, dist, cons):
    for pol in (wf, wfwc):
        assert pol.solution.power_used == pytest.approx(cons.avg_power, rel=1e-9)
        assert mc_power(pol, dist, budget) == pytest.approx(cons.avg_power, rel=5e-3)


def test_wfwc_peak_threshold_closed_form(wfwc, budget, cons):
    s = wfwc.solution
    level = s.lambda0 * 2.0 ** cons.r_max
    assert s.m2 == pytest.approx(closed_form_threshold(level, budget), rel=1e-12)


def test_wfwc_never_exceeds_peak(wfwc, budget, cons):
    m = np.linspace(budget.m_min, budget.m_max, 2001)
    assert np.all(wfwc(m) <= peak_xi(m, budget, cons) * (1 + 1e-12))


def test_cap_inactive_at_reference_budget(wf, wfwc, budget):
    # the capped peak threshold lies beyond m_max, so both policies coincide
    assert wfwc.solution.m2 > budget.m_max
    assert wfwc.solution.m1 == wf.solution.m1
    assert wfwc.solution.outage_probability == pytest.approx(0.53596835, rel=1e-6)


def test_cap_shifts_cutoff_left_when_it_binds(link20):
    budget, dist, cons = link20
    wf = water_filling_policy(budget, dist, cons, capped=False)
    wfwc = water_filling_policy(budget, dist, cons, capped=True)
    assert wfwc.solution.m2 < budget.m_max
    assert wfwc.solution.lambda0 != wf.solution.lambda0
    assert wfwc.solution.m1 < wf.solution.m1
    diff = wf.solution.outage_probability - wfwc.solution.outage_probability
    assert 0.03 < diff < 0.04


# ---- QoS-optimal ---------------------------------------------------------

@pytest.mark.parametrize("theta, m1, m2", [
    (1e-3, 0.8452175, 1.0053946),
    (1.0, 0.7681355, 1.1729357),
    (10.0, 0.4879415, 7.0744582),
])
def test_optimal_thresholds_reference(budget, dist, cons, theta, m1, m2):
    s = optimal_policy(budget, dist, cons, QoSParams(theta)).solution
    assert s.kind is PolicyKind.OPTIMAL
    assert s.m1 / budget.m_max == pytest.approx(m1, rel=1e-5)
    assert s.m2 / budget.m_max == pytest.approx(m2, rel=1e-5)
    # both thresholds follow from lambda0 in closed form
    beta = theta / math.log(2)
    assert s.m1 == pytest.approx(closed_form_threshold(s.lambda0, budget), rel=1e-10)
    level = s.lambda0 * 2.0 ** (cons.r_max * (beta + 1))
    if budget.a * level < 1:
        assert s.m2 == pytest.approx(closed_form_threshold(level, budget), rel=1e-10)


def test_optimal_continuous_at_thresholds(link20):
    budget, dist, cons = link20
    pol = optimal_policy(budget, dist, cons, QoSParams(0.5))
    m1, m2 = pol.solution.m1, pol.solution.m2
    assert budget.m_min < m1 < m2 < budget.m_max
    eps = 1e-9
    scale = peak_xi(budget.m_min, budget, cons)
    assert pol(m1 * (1 + eps)) < 1e-6 * scale
    assert pol(m2 * (1 - eps)) == pytest.approx(peak_xi(m2, budget, cons), rel=1e-6)


def test_optimal_matches_oracle_when_cap_binds(link20):
    budget, dist, cons = link20
    pol = optimal_policy(budget, dist, cons, QoSParams(0.01))
    orc = brute_force_policy(budget, dist, cons.r_max, cons.avg_power, 0.01)
    assert np.max(np.abs(pol(orc.m) - orc.xi)) / np.max(orc.xi) < 1e-3
    assert pol.solution.effective_capacity == pytest.approx(orc.effective_capacity, rel=1e-4)


@pytest.mark.parametrize("theta", [0.01, 1.0, 5.0])
def test_kkt_stationarity(budget, dist, cons, theta):
    pol = optimal_policy(budget, dist, cons, QoSParams(theta))
    lo = max(pol.solution.m1, budget.m_min)
    hi = min(pol.solution.m2, budget.m_max)
    m = np.linspace(lo, hi, 102)[1:-1]
    assert np.max(kkt_residual(pol, m)) < 1e-9


def test_kkt_residual_only_for_optimal(wfwc):
    with pytest.raises(InvalidParameterError):
        kkt_residual(wfwc, 2e-5)


@settings(max_examples=12, deadline=None)
@given(log_theta=st.floats(math.log(1e-3), math.log(50.0)))
def test_optimal_feasible_and_dominates(budget, dist, cons, wfwc, log_theta):
    theta = math.exp(log_theta)
    pol = optimal_policy(budget, dist, cons, QoSParams(theta))
    m = np.linspace(budget.m_min, budget.m_max, 501)
    xi = pol(m)
    assert np.all(xi >= 0)
    assert np.all(xi <= peak_xi(m, budget, cons) * (1 + 1e-12))
    assert pol.solution.power_used == pytest.approx(cons.avg_power, rel=1e-6)
    assert pol.solution.effective_capacity >= effective_capacity(
        wfwc, dist, QoSParams(theta)) - 1e-9


def test_cutoff_moves_left_as_theta_grows(budget, dist, cons):
    m1 = [optimal_policy(budget, dist, cons, QoSParams(t)).solution.m1
          for t in (1e-3, 1e-2, 1e-1, 1.0, 10.0)]
    assert np.all(np.diff(m1) < 0)


def test_large_theta_transmits_everywhere(budget, dist, cons):
    s = optimal_policy(budget, dist, cons, QoSParams(100.0)).solution
    assert s.m1 < budget.m_min
    assert s.outage_probability == 0.0
    assert s.m2 == math.inf


def test_theta_zero_is_capped_water_filling(budget, dist, cons, wfwc):
    pol = optimal_policy(budget, dist, cons, QoSParams(0.0))
    assert pol.kind is PolicyKind.WATER_FILLING_CAPPED
    assert pol.solution.lambda0 == wfwc.solution.lambda0


def test_infinite_theta_rejected(budget, dist, cons):
    with pytest.raises(InvalidParameterError, match="large finite"):
        optimal_policy(budget, dist, cons, QoSParams(math.inf))


def test_slack_budget_gives_cap_everywhere(budget, dist):
    cons = PolicyConstraints(r_max=0.5, avg_power=1e6)
    pol = optimal_policy(budget, dist, cons, QoSParams(0.1))
    assert pol.kind is PolicyKind.CAP_EVERYWHERE
    assert not pol.solution.power_constraint_binding
    assert pol.solution.effective_capacity == pytest.approx(0.5, rel=1e-12)
    assert pol.solution.power_used < 1e6


def test_iteration_budget_raises_convergence_error(budget, dist, cons):
    with pytest.raises(ConvergenceError) as info:
        optimal_policy(budget, dist, cons, QoSParams(1.0), root=RootSpec(max_iters=1))
    assert info.value.residual is not None


def test_thresholds_uncapped_has_no_peak(budget, cons):
    assert thresholds(-24.0, 0.0, budget, cons, capped=False)[1] == math.inf


def test_policy_zero_outside_support(budget, dist, cons):
    pol = optimal_policy(budget, dist, cons, QoSParams(1.0))
    assert pol(0.0) == 0.0
    assert pol(1.01 * budget.m_max) == 0.0
    assert pol(-0.99 * budget.m_max) == pol(0.99 * budget.m_max)


# ---- baselines -----------------------------------------------------------

def test_constant_current_reference(budget, dist, cons):
    pol = constant_current_policy(budget, dist, cons)
    assert pol(np.array([budget.m_min, budget.m_max])) == pytest.approx(XI0_REF, rel=1e-10)
    assert pol.solution.m2 == math.inf


def test_constant_current_clips_and_resolves(cfg):
    cfg50 = cfg.with_overrides(avg_power_w=50.0)
    budget, dist = cfg50.link()
    cons = cfg50.constraints
    pol = constant_current_policy(budget, dist, cons)
    s = pol.solution
    assert s.m2 / budget.m_max == pytest.approx(0.8173, abs=1e-4)
    assert s.power_used == pytest.approx(50.0, rel=1e-9)
    m = np.linspace(budget.m_min, budget.m_max, 301)
    assert np.all(pol(m) <= peak_xi(m, budget, cons) * (1 + 1e-12))


def test_channel_inversion_constant_rate(budget, dist, cons):
    pol = channel_inversion_policy(budget, dist, cons)
    # independent E[M^-2]: trapezoid over J on a fine grid
    j = np.linspace(1 / math.sqrt(3), 1.0, 2_000_001)
    f = 2.0 * alignment_pdf(j) / j ** 2
    inv = float(np.sum((f[1:] + f[:-1]) * np.diff(j)) / 2) / budget.m_max ** 2
    k = 2 * cons.avg_power / (budget.r_tx * inv + budget.a)
    rate = math.log2(1 + 0.5 * budget.b * k)
    assert pol.solution.effective_capacity == pytest.approx(rate, rel=1e-6)
    assert ergodic_capacity(pol, dist) == pytest.approx(rate, rel=1e-6)
    assert pol.solution.outage_probability == 0.0

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from miqos.channel import (
    CircuitParams,
    CoilGeometry,
    derive_link_budget,
    instantaneous_rate,
    mutual_inductance_max,
    receive_snr,
    transmit_power,
)
from miqos.errors import InvalidParameterError
from miqos.policy import PolicyConstraints, peak_xi

# 30-digit mpmath evaluations of the closed forms at the reference parameters
M_MAX_REF = 2.92432722995240255372873807404e-05
A_REF = 717789.410988316990460690254537
B_REF = 261014331.268478905622069183468


def geometry(**kw):
    base = dict(turns_tx=20, turns_rx=20, radius_tx=4.0, radius_rx=0.25, distance=3.0)
    base.update(kw)
    return CoilGeometry(**base)


def test_mutual_inductance_reference_value():
    assert mutual_inductance_max(geometry()) == pytest.approx(M_MAX_REF, rel=1e-13)


def test_mutual_inductance_unit_case():
    g = CoilGeometry(1, 1, 1.0, 1.0, 1.0, permeability=1.0)
    assert mutual_inductance_max(g) == pytest.approx(math.pi / 2, rel=1e-15)


def test_doubling_distance_divides_by_eight():
    assert mutual_inductance_max(geometry(distance=6.0)) == pytest.approx(
        mutual_inductance_max(geometry()) / 8, rel=1e-14)


def test_inverse_cube_law_over_log_grid():
    d = np.logspace(-1, 2, 40)
    scaled = np.array([mutual_inductance_max(geometry(distance=x)) * x ** 3 for x in d])
    assert np.ptp(scaled) / scaled.mean() < 1e-12


@pytest.mark.parametrize("field", ["turns_tx", "radius_rx", "distance", "permeability"])
@pytest.mark.parametrize("bad", [0.0, -1.0, float("nan"), float("inf")])
def test_geometry_rejects_non_positive(field, bad):
    with pytest.raises(InvalidParameterError):
        geometry(**{field: bad})


def test_circuit_rejects_negative_resistance():
    with pytest.raises(InvalidParameterError):
        CircuitParams(2000.0, -20.0, 20.0, 200.0, 2.5e-3)


def test_link_budget_reference_values(budget):
    assert budget.a == pytest.approx(A_REF, rel=1e-13)
    assert budget.b == pytest.approx(B_REF, rel=1e-13)
    assert budget.m_min == budget.m_max / math.sqrt(3)


def test_b_is_a_scaled_by_load_share(cfg, budget):
    c = cfg.circuit
    assert budget.b == pytest.approx(
        budget.a * c.r_load / ((c.r_load + c.r_rx) * c.noise_power), rel=1e-14)


def test_b_linear_in_small_load_resistance(cfg):
    b = [derive_link_budget(cfg.geometry, CircuitParams(2000.0, 20.0, 20.0, r, 2.5e-3)).b
         for r in (1e-9, 2e-9)]
    assert b[1] / b[0] == pytest.approx(2.0, rel=1e-7)


def test_transmit_power_examples(budget, cfg):
    assert transmit_power(0.0, 2e-5, budget) == 0.0
    assert transmit_power(1.0, 2e-5, budget, cfg.circuit) == pytest.approx(
        10.0001435578821976633980921381, rel=1e-14)
    assert transmit_power(2.0, 0.0, budget) == 20.0


def test_negative_current_is_rejected(budget):
    for fn in (receive_snr, instantaneous_rate):
        with pytest.raises(InvalidParameterError):
            fn(-1.0, 1e-5, budget)
    with pytest.raises(InvalidParameterError):
        transmit_power(-1e-9, 1e-5, budget)


def test_snr_examples(budget):
    assert receive_snr(0.0, 2e-5, budget) == 0.0
    assert receive_snr(0.9, 2e-5, budget) == pytest.approx(0.0469825796283262030, rel=1e-14)
    assert receive_snr(0.9, -2e-5, budget) == receive_snr(0.9, 2e-5, budget)


def test_rate_examples(budget):
    m = 2e-5
    assert instantaneous_rate(0.0, m, budget) == 0.0
    assert instantaneous_rate(2.0 / (budget.b * m * m), m, budget) == pytest.approx(1.0, rel=1e-15)


def test_rate_at_peak_current_is_r_max(budget, rng):
    cons = PolicyConstraints(r_max=0.5, avg_power=9.0)
    m = rng.uniform(budget.m_min, budget.m_max, 100)
    rate = instantaneous_rate(peak_xi(m, budget, cons), m, budget)
    np.testing.assert_allclose(rate, 0.5, rtol=1e-12)


@settings(max_examples=200, deadline=None)
@given(xi=st.floats(0, 1e3), m=st.floats(-1e-3, 1e-3))
def test_snr_and_rate_non_negative(budget, xi, m):
    assert receive_snr(xi, m, budget) >= 0
    assert instantaneous_rate(xi, m, budget) >= 0


@settings(max_examples=100, deadline=None)
@given(xi=st.floats(1e-3, 100), m=st.floats(1e-6, 1e-4))
def test_power_is_affine_in_xi(budget, xi, m):
    h = 1e-3 * xi
    slope = (transmit_power(xi + h, m, budget) - transmit_power(xi - h, m, budget)) / (2 * h)
    expected = 0.5 * (budget.r_tx + budget.a * m * m)
    assert abs(slope - expected) / expected < 1e-10


def test_rate_strictly_increasing_in_xi(budget):
    xi = np.linspace(0, 50, 500)
    assert np.all(np.diff(instantaneous_rate(xi, 1.5e-5, budget)) > 0)

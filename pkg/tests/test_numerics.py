import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from miqos.errors import ConvergenceError, InvalidParameterError, NoRootError
from miqos.numerics import QuadratureSpec, RootSpec, integrate, solve_monotone_root

SIMPSON = QuadratureSpec(method="adaptive-simpson", abs_tol=1e-13, rel_tol=1e-12)


@pytest.mark.parametrize("spec", [None, SIMPSON], ids=["gauss", "simpson"])
def test_trivial_integrals(spec):
    assert integrate(lambda x: np.ones_like(x), 0, 1, spec=spec) == pytest.approx(1, abs=1e-14)
    assert integrate(lambda x: x ** 2, 0, 1, spec=spec) == pytest.approx(1 / 3, abs=1e-10)
    assert integrate(np.sin, 0, math.pi, spec=spec) == pytest.approx(2, rel=1e-10)


def test_empty_interval_and_bad_order():
    assert integrate(np.exp, 2.0, 2.0) == 0.0
    with pytest.raises(InvalidParameterError):
        integrate(np.exp, 1.0, 0.0)


def test_kink_handled_with_breakpoint():
    f = lambda x: np.abs(x - 0.3)  # noqa: E731
    exact = 0.5 * 0.3 ** 2 + 0.5 * 0.7 ** 2
    assert integrate(f, 0, 1, [0.3]) == pytest.approx(exact, rel=1e-14)
    # without the breakpoint the panel is subdivided until it converges
    assert integrate(f, 0, 1) == pytest.approx(exact, rel=1e-8)


def test_polynomial_exact_up_to_rule_degree():
    spec = QuadratureSpec(gauss_nodes=8)
    coef = np.random.default_rng(3).normal(size=16)  # degree 15 = 2 * 8 - 1
    p = np.polynomial.Polynomial(coef)
    exact = p.integ()(2.0) - p.integ()(-1.0)
    assert integrate(p, -1.0, 2.0, spec=spec) == pytest.approx(exact, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(
    coef=st.lists(st.floats(-10, 10), min_size=1, max_size=12),
    lo=st.floats(-5, 5),
    width=st.floats(1e-3, 10),
)
def test_polynomials_match_antiderivative(coef, lo, width):
    p = np.polynomial.Polynomial(coef)
    P = p.integ()
    hi = lo + width
    exact = P(hi) - P(lo)
    scale = integrate(lambda x: np.abs(p(x)), lo, hi) + 1e-300
    assert abs(integrate(p, lo, hi) - exact) <= 1e-12 * scale + 1e-13


def test_convergence_error_carries_estimate():
    spec = QuadratureSpec(gauss_nodes=4, max_subdivisions=8, abs_tol=1e-14, rel_tol=1e-14)
    with pytest.raises(ConvergenceError) as info:
        integrate(lambda x: x ** -0.5, 0.0, 1.0, spec=spec)
    assert 1.0 < info.value.estimate < 2.0


@pytest.mark.parametrize("kw", [dict(abs_tol=0), dict(rel_tol=-1), dict(gauss_nodes=1),
                                dict(max_subdivisions=1), dict(method="romberg")])
def test_quadrature_spec_validation(kw):
    with pytest.raises(InvalidParameterError):
        QuadratureSpec(**kw)


@pytest.mark.parametrize("kw", [dict(abs_tol=0), dict(max_iters=0), dict(bracket_expansion=1)])
def test_root_spec_validation(kw):
    with pytest.raises(InvalidParameterError):
        RootSpec(**kw)


def test_root_examples():
    assert solve_monotone_root(lambda x: x - 2, 0, 10) == pytest.approx(2, abs=1e-12)
    assert solve_monotone_root(lambda x: x ** 3 - 8, 0, 10) == pytest.approx(2, abs=1e-10)
    assert solve_monotone_root(lambda x: 5 - x, 0, 10) == pytest.approx(5, abs=1e-12)


def test_root_bracket_expansion():
    assert solve_monotone_root(lambda x: x - 40, 0, 1) == pytest.approx(40, abs=1e-10)


def test_no_root_after_expansion():
    with pytest.raises(NoRootError):
        solve_monotone_root(lambda x: x * x + 1, -1, 1)


def test_bisection_stays_in_bracket_and_improves():
    seen = []

    def g(x):
        seen.append(x)
        return math.atan(x - 0.123)

    x = solve_monotone_root(g, -3, 4)
    assert all(-3 <= s <= 4 for s in seen)
    assert abs(g(x)) <= 1e-12
    # the returned point beats every earlier probe
    assert abs(math.atan(x - 0.123)) <= min(abs(math.atan(s - 0.123)) for s in seen[:-1])


def test_bisection_iteration_budget():
    with pytest.raises(ConvergenceError):
        solve_monotone_root(lambda x: x - 1 / 3, 0, 1, RootSpec(abs_tol=1e-15, max_iters=5))

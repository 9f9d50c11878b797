import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from collusionlab.errors import DegenerateMonitoringWarning, InvalidParameters, OutOfRangeTarget
from collusionlab.theory import (CollusionScenario, LinearMarketParams, MonitoringProfile,
                                 collusion_value, default_horizon, deviation_value,
                                 grim_trigger_mc_oracle, linear_demand, linear_profit,
                                 monitored_threshold, monopoly_price_linear, nash_price_linear,
                                 patience_threshold, payoff_quad)

from strategies import linear_params

EXAMPLE = LinearMarketParams(a=2, b=1, d=0.5, c=1)


def test_worked_example():
    assert nash_price_linear(EXAMPLE) == 2.0
    assert monopoly_price_linear(EXAMPLE) == 2.5
    assert patience_threshold(EXAMPLE, 2.5) == 0.5
    q = payoff_quad(EXAMPLE, 2.5)
    # hand arithmetic: demand 2 - 2 + 1.25 = 1.25 at (2, 2.5), etc.
    assert (q.pi_dev, q.pi_c, q.pi_star, q.pi_sucker) == (1.25, 1.125, 1.0, 0.75)


@pytest.mark.parametrize("kw", [dict(a=2, b=0.5, d=1, c=1), dict(a=2, b=1, d=0, c=1),
                                dict(a=0.1, b=1, d=0.5, c=1), dict(a=2, b=1, d=0.5, c=3),
                                dict(a=float("nan"), b=1, d=0.5, c=1)])
def test_invalid_linear_params(kw):
    with pytest.raises(InvalidParameters):
        LinearMarketParams(**kw)


@pytest.mark.parametrize("p_c", [2.0, 1.5, 2.6])
def test_target_out_of_range(p_c):
    with pytest.raises(OutOfRangeTarget):
        patience_threshold(EXAMPLE, p_c)


def test_nash_and_monopoly_are_first_order_points():
    # independent route: brute maximisation on a fine grid
    grid = np.linspace(1.0, 4.0, 300_001)
    br = grid[np.argmax(linear_profit(EXAMPLE, grid, 2.0))]
    assert br == pytest.approx(2.0, abs=1e-5)
    joint = grid[np.argmax(2 * linear_profit(EXAMPLE, grid, grid))]
    assert joint == pytest.approx(2.5, abs=1e-5)


@given(linear_params(), st.floats(0.001, 1.0))
def test_threshold_in_unit_interval_and_ordering(params, frac):
    p_star, p_m = nash_price_linear(params), monopoly_price_linear(params)
    p_c = p_star + frac * (p_m - p_star)
    if not p_c > p_star:
        return
    d = patience_threshold(params, p_c)
    assert 0.0 < d < 1.0
    q = payoff_quad(params, p_c)
    assert q.pi_dev > q.pi_c > q.pi_star > q.pi_sucker


@given(linear_params())
def test_threshold_increasing_in_target(params):
    p_star, p_m = nash_price_linear(params), monopoly_price_linear(params)
    grid = np.linspace(p_star, p_m, 101)[1:]
    d = [patience_threshold(params, float(p)) for p in grid]
    assert np.all(np.diff(d) > 0)


@given(linear_params(), st.floats(0.01, 1.0))
def test_monitored_threshold_decreasing_in_rho(params, frac):
    p_star, p_m = nash_price_linear(params), monopoly_price_linear(params)
    p_c = p_star + frac * (p_m - p_star)
    if not p_c > p_star:
        return
    rhos = np.linspace(0.01, 1.0, 50)
    d = [monitored_threshold(params, p_c, float(r)) for r in rhos]
    assert np.all(np.diff(d) < 0)
    assert abs(monitored_threshold(params, p_c, 1.0) - patience_threshold(params, p_c)) <= 1e-12


def test_rho_zero_is_degenerate():
    with pytest.warns(DegenerateMonitoringWarning):
        assert monitored_threshold(EXAMPLE, 2.5, 0.0) == 1.0
    with pytest.raises(InvalidParameters):
        monitored_threshold(EXAMPLE, 2.5, 1.5)


def test_monitored_example_values():
    # gain 0.125, collusive margin 0.125: threshold = 1 / (1 + rho)
    for rho in (0.25, 0.5, 0.8):
        assert monitored_threshold(EXAMPLE, 2.5, rho) == pytest.approx(1 / (1 + rho), abs=1e-15)


def test_value_functions_cross_at_threshold():
    for rho in (0.3, 1.0):
        d = monitored_threshold(EXAMPLE, 2.5, rho)
        assert deviation_value(EXAMPLE, 2.5, d, rho) == pytest.approx(collusion_value(EXAMPLE, 2.5, d))


def test_default_horizon():
    T = default_horizon(0.95)
    assert 0.95 ** T < 1e-6 <= 0.95 ** (T - 1)
    assert default_horizon(0.0) == 1


def test_linear_demand_formula():
    assert linear_demand(EXAMPLE, 2.0, 2.5) == 1.25


def test_mc_oracle_conform_path_is_exact():
    sc = CollusionScenario(EXAMPLE, 2.5, 0.9, 0.9)
    est = grim_trigger_mc_oracle(sc, MonitoringProfile(), deviate=False, trials=3)
    T = est.horizon
    expected = 1.125 * (1 - 0.9 ** T) / (1 - 0.9)
    assert est.mean[0] == pytest.approx(expected, rel=1e-12)
    assert est.stderr[0] < 1e-12


def test_mc_oracle_deviation_matches_closed_form():
    sc = CollusionScenario(EXAMPLE, 2.5, 0.8, 0.8)
    est = grim_trigger_mc_oracle(sc, MonitoringProfile(1.0, 0.4), deviate=True, trials=20_000, seed=3)
    exact = deviation_value(EXAMPLE, 2.5, 0.8, 0.4)
    assert abs(est.mean[0] - exact) < 4 * est.stderr[0]


def test_scenario_validation():
    with pytest.raises(InvalidParameters):
        CollusionScenario(EXAMPLE, 2.5, 1.0, 0.5)
    with pytest.raises(InvalidParameters):
        MonitoringProfile(1.2, 1.0)

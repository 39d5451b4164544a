import math

import mpmath
import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from forbearance.econ_model import (DemandSpec, ExportMultipliers, FirmState, FocComposite,
                                    GrowthParams, MarketEnv, ProductionParams, aggregate_demand,
                                    best_response_price, cobb_douglas_output,
                                    constraint_satisfied, export_objective, foc_residual,
                                    growth_composite, growth_rate, stage_profit)
from forbearance.errors import DomainError

from .conftest import BASE_GROWTH, BASE_Y_STAR


def test_growth_rate_matches_arbitrary_precision_oracle():
    mpmath.mp.dps = 40
    oracle = mpmath.exp((1 - mpmath.mpf("0.4")) * mpmath.log(mpmath.mpf("1.2")))
    assert growth_rate(BASE_GROWTH) == pytest.approx(float(oracle), abs=1e-15)
    assert growth_rate(BASE_GROWTH) == pytest.approx(1.11560, abs=1e-5)


@pytest.mark.parametrize("age, sigma, phi, expected", [(7, 3.1, 1.0, 7.0), (2, 1.0, 0.3, 2.0)])
def test_growth_rate_trivial_cases(age, sigma, phi, expected):
    assert growth_rate(GrowthParams(age, sigma, phi)) == expected


@pytest.mark.parametrize("kwargs", [
    dict(age=-1, export_intensity=1, info_phi=0.5),
    dict(age=1, export_intensity=-0.1, info_phi=0.5),
    dict(age=1, export_intensity=1, info_phi=1.5),
    dict(age=float("nan"), export_intensity=1, info_phi=0.5),
    dict(age=1, export_intensity=float("inf"), info_phi=0.5),
])
def test_growth_params_reject_invalid(kwargs):
    with pytest.raises(DomainError):
        GrowthParams(**kwargs)


def test_growth_monotone_in_phi_by_sigma_regime():
    phis = np.linspace(0, 1, 41)
    for sigma in (0.2, 0.7, 1.0, 1.3, 4.0):
        vals = np.array([growth_rate(GrowthParams(3.0, sigma, p)) for p in phis])
        steps = np.diff(vals)
        if sigma < 1:
            assert np.all(steps >= 0)
        elif sigma > 1:
            assert np.all(steps <= 0)
        else:
            assert np.all(steps == 0)


@given(st.floats(1.01, 10), st.floats(1.01, 10), st.floats(0, 0.99), st.floats(0.1, 50))
def test_growth_strictly_increasing_in_sigma(s1, s2, phi, age):
    assume(abs(s1 - s2) > 1e-6)
    lo, hi = sorted((s1, s2))
    assert growth_rate(GrowthParams(age, lo, phi)) < growth_rate(GrowthParams(age, hi, phi))


def test_stage_profit_hand_evaluated(demand):
    f = FirmState(endowment=1.0, growth=1.1156, unit_cost=1.0, price=2.0)
    assert demand.quantity(2.0, 2.0) == 3.0
    assert stage_profit(f, demand, 2.0, MarketEnv()) == pytest.approx(5.1156, abs=1e-12)


def test_stage_profit_margin_vanishes_at_cost(demand):
    f = FirmState(2.0, 0.5, unit_cost=1.5, price=1.5)
    assert stage_profit(f, demand, 2.0, MarketEnv()) == 2.5


def test_stage_profit_zero_sales_when_demand_clamps(demand):
    f = FirmState(2.0, 0.5, unit_cost=1.0, price=10.0)
    assert demand.quantity(10.0, 1.0) == 0.0
    env = MarketEnv(residual=0.25)
    assert stage_profit(f, demand, 1.0, env) == 2.75


def test_stage_profit_uses_growth_params():
    f = FirmState.from_growth(1.0, BASE_GROWTH, unit_cost=1.0, price=2.0)
    assert f.growth == BASE_Y_STAR


def test_stage_profit_rejects_non_finite_rival(demand):
    with pytest.raises(DomainError):
        stage_profit(FirmState(0, 0, 1, 2), demand, float("nan"), MarketEnv())


@given(st.floats(1, 20), st.floats(0.5, 5), st.floats(0, 1), st.floats(0, 3), st.floats(0, 5),
       st.floats(0.01, 5))
def test_stage_profit_concave_where_demand_positive(a, b, gfrac, c, pj, h):
    d = DemandSpec(a, b, gfrac * b * 0.99)
    choke = (a + d.cross_slope * pj) / b
    assume(choke > 3 * h)
    p0 = choke / 2
    lo, hi = p0 - h / 4, p0 + h / 4
    assume(lo >= 0 and hi < choke)
    vals = [stage_profit(FirmState(1, 1, c, p), d, pj, MarketEnv()) for p in (lo, p0, hi)]
    assert vals[0] - 2 * vals[1] + vals[2] <= 1e-9 * max(1.0, abs(vals[1]))


def test_constraint_satisfied_cases():
    env = MarketEnv(constraint_lambda=1.0)
    assert constraint_satisfied(0.0, env, [10])
    assert constraint_satisfied(10.0, env, [10, 10])
    assert not constraint_satisfied(10.1, env, [10, 10])
    with pytest.raises(DomainError):
        constraint_satisfied(1.0, env, [])


def test_foc_residual_examples(demand):
    f = FirmState(0, 0, unit_cost=1.0, price=3.0)
    assert foc_residual(f, demand, 2.0, FocComposite(3.0, -2.0, 4.0)) == 0.0
    assert foc_residual(f, demand, 2.0, FocComposite(1.0, -2.0, 4.0)) == 4.0
    assert foc_residual(f, demand, 2.0, FocComposite(1.0, -2.0, 0.0)) == 0.0


def test_growth_composite_terms(demand):
    f = FirmState(1.5, 0.5, unit_cost=1.0, price=3.0)
    comp = growth_composite(f, demand)
    assert (comp.demand_term, comp.elasticity_term, comp.endowment_sum) == (3.0, -2.0, 2.0)


def _vertex(d, c, pj):
    return (d.intercept + d.cross_slope * pj + d.own_slope * c) / (2 * d.own_slope)


def test_best_response_closed_form_and_grid_oracle(demand):
    f = FirmState(1.0, 1.1156, unit_cost=1.0, price=0.0)
    p = best_response_price(f, demand, 2.0, (0.0, 5.0))
    assert _vertex(demand, 1.0, 2.0) == 2.25
    # independent check: exhaustive grid at step 1e-5
    grid = np.arange(0.0, 5.0, 1e-5)
    prof = (grid - 1.0) * np.maximum(0.0, 5.0 - 2.0 * grid + 2.0)
    assert grid[prof.argmax()] == pytest.approx(2.25, abs=1e-5)
    assert p == pytest.approx(2.25, abs=1e-6)
    # the marginal-profit residual vanishes at the returned price
    assert foc_residual(f.with_price(p), demand, 2.0) == pytest.approx(0.0, abs=1e-6)


def test_best_response_no_cross_effect():
    beta, c = 3.0, 2.0
    d = DemandSpec(2 * beta * c, beta, 0.0)
    p = best_response_price(FirmState(0, 0, c, 0), d, 7.0, (0.0, 10.0))
    assert p == pytest.approx(1.5 * c, abs=1e-6)


def test_best_response_boundary_when_bounds_hug_cost(demand):
    # on [1.0, 1.01] profit rises with price, so the upper end wins
    p = best_response_price(FirmState(0, 0, 1.0, 0), demand, 2.0, (1.0, 1.01))
    assert p == 1.01
    # above the vertex it falls, so the lower end wins
    p = best_response_price(FirmState(0, 0, 1.0, 0), demand, 2.0, (2.5, 2.6))
    assert p == 2.5


@pytest.mark.parametrize("bounds", [(-1.0, 2.0), (2.0, 2.0), (3.0, 1.0)])
def test_best_response_rejects_bad_bounds(demand, bounds):
    with pytest.raises(DomainError):
        best_response_price(FirmState(0, 0, 1, 0), demand, 2.0, bounds)


def test_best_response_matches_vertex_on_random_draws():
    rng = np.random.default_rng(20240611)
    checked = 0
    while checked < 100:
        b = rng.uniform(0.5, 4.0)
        d = DemandSpec(rng.uniform(2.0, 20.0), b, rng.uniform(0.0, 0.9) * b)
        c, pj = rng.uniform(0.0, 3.0), rng.uniform(0.0, 6.0)
        v = _vertex(d, c, pj)
        choke = (d.intercept + d.cross_slope * pj) / d.own_slope
        if not (c < v < choke):
            continue
        hi = choke + 5.0
        p = best_response_price(FirmState(0, 0, c, 0), d, pj, (0.0, hi))
        assert p == pytest.approx(v, abs=1e-6)
        checked += 1


def test_aggregate_demand_examples():
    assert aggregate_demand(MarketEnv(market_scale=100, discount_rate=1), 2) == 100
    assert aggregate_demand(MarketEnv(market_scale=7), 3) == 21
    assert aggregate_demand(MarketEnv(market_scale=7, discount_rate=0.3), 0) == 0


@given(st.floats(0.1, 100), st.floats(0, 1), st.floats(-10, 10), st.floats(-10, 10),
       st.floats(0.1, 5))
def test_aggregate_demand_linear(k, r, u, v, t):
    env = MarketEnv(market_scale=k, discount_rate=r)
    assert aggregate_demand(env, u + v) == pytest.approx(
        aggregate_demand(env, u) + aggregate_demand(env, v), abs=1e-9)
    scaled = MarketEnv(market_scale=t * k, discount_rate=r)
    assert aggregate_demand(scaled, u) == pytest.approx(t * aggregate_demand(env, u), abs=1e-9)


def test_cobb_douglas_examples():
    assert cobb_douglas_output(ProductionParams(2.5, 0.3, 0.7, 1, 1)) == 2.5
    assert cobb_douglas_output(ProductionParams(2.0, 1.0, 0.0, 3.0, 9.0)) == 6.0
    assert cobb_douglas_output(ProductionParams(1.0, 0.5, 0.5, 4, 9)) == pytest.approx(6.0, abs=1e-15)
    with pytest.raises(DomainError):
        ProductionParams(1.0, 0.5, 0.6, 1, 1)


@given(st.floats(0.01, 1), st.floats(0.1, 10), st.floats(0.1, 10), st.floats(0.1, 10),
       st.floats(0.1, 10))
def test_cobb_douglas_degree_one_homogeneous(alpha, w, z, t, tfp):
    base = ProductionParams(tfp, alpha, 1 - alpha, w, z)
    scaled = ProductionParams(tfp, alpha, 1 - alpha, t * w, t * z)
    assert cobb_douglas_output(scaled) == pytest.approx(t * cobb_douglas_output(base),
                                                        rel=1e-10, abs=1e-10)


def test_export_objective_examples(demand):
    g = BASE_GROWTH
    y = growth_rate(g)
    at_cost = FirmState(5.0, y, unit_cost=1.0, price=1.0)
    assert export_objective(at_cost, g, ExportMultipliers(1, 1), demand, 2.0) == 5.0 - y
    f = FirmState(5.0, y, unit_cost=1.0, price=2.0)
    assert export_objective(f, g, ExportMultipliers(0, 0), demand, 2.0) == 5.0 - y
    got = export_objective(f, g, ExportMultipliers(1, 1), demand, 2.0)
    assert got == pytest.approx(5.0 - 1.1156 + 3.0, abs=1e-4)
    assert got == pytest.approx(5.0 - y + 3.0, abs=1e-12)


def test_export_margin_matches_domestic_margin(demand):
    g = GrowthParams(2.0, 0.5, 0.2)
    f = FirmState(4.0, growth_rate(g), 1.2, 2.7)
    domestic = stage_profit(f, demand, 2.0, MarketEnv()) - (f.endowment + f.growth)
    export = export_objective(f, g, ExportMultipliers(1, 1), demand, 2.0) - (f.endowment - f.growth)
    assert export == pytest.approx(domestic, abs=1e-12)


def test_demand_spec_invariants():
    with pytest.raises(DomainError):
        DemandSpec(5, 1, 1)
    with pytest.raises(DomainError):
        DemandSpec(0, 2, 1)
    with pytest.raises(DomainError):
        DemandSpec(5, 2, -0.1)


def test_firm_state_invariants():
    with pytest.raises(DomainError):
        FirmState(0, 0, -1, 1)
    with pytest.raises(DomainError):
        FirmState(0, 0, 1, -1)
    with pytest.raises(DomainError):
        ExportMultipliers(-1, 0)
    assert math.isfinite(FirmState(0, 0, 0, 0).price)

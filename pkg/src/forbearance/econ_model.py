"""Static primitives of the duopoly: growth, stage profit, demand, production.

Demand for firm ``i`` is linear in both prices and clamped at zero::

    q_i = max(0, intercept - own_slope * p_i + cross_slope * p_j)

Two objectives carry the growth term with opposite signs. ``stage_profit`` adds
``A * sigma**(1 - phi)`` to the endowment; ``export_objective`` subtracts it.
Both are kept as written so either reading can be evaluated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import DomainError

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def _finite(**values: float) -> None:
    for name, v in values.items():
        if not math.isfinite(v):
            raise DomainError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class GrowthParams:
    age: float
    export_intensity: float
    info_phi: float

    def __post_init__(self):
        _finite(age=self.age, export_intensity=self.export_intensity, info_phi=self.info_phi)
        if self.age < 0:
            raise DomainError(f"age must be >= 0, got {self.age}")
        if self.export_intensity < 0:
            raise DomainError(f"export_intensity must be >= 0, got {self.export_intensity}")
        if not 0.0 <= self.info_phi <= 1.0:
            raise DomainError(f"info_phi must lie in [0, 1], got {self.info_phi}")


@dataclass(frozen=True)
class FirmState:
    endowment: float
    growth: float
    unit_cost: float
    price: float

    def __post_init__(self):
        _finite(endowment=self.endowment, growth=self.growth,
                unit_cost=self.unit_cost, price=self.price)
        if self.unit_cost < 0:
            raise DomainError(f"unit_cost must be >= 0, got {self.unit_cost}")
        if self.price < 0:
            raise DomainError(f"price must be >= 0, got {self.price}")

    @classmethod
    def from_growth(cls, endowment: float, g: GrowthParams, unit_cost: float,
                    price: float) -> "FirmState":
        return cls(endowment, growth_rate(g), unit_cost, price)

    def with_price(self, price: float) -> "FirmState":
        return FirmState(self.endowment, self.growth, self.unit_cost, price)


@dataclass(frozen=True)
class DemandSpec:
    intercept: float
    own_slope: float
    cross_slope: float = 0.0

    def __post_init__(self):
        _finite(intercept=self.intercept, own_slope=self.own_slope,
                cross_slope=self.cross_slope)
        if self.intercept <= 0:
            raise DomainError(f"demand intercept must be > 0, got {self.intercept}")
        if not self.own_slope > self.cross_slope >= 0:
            raise DomainError(
                "demand slopes must satisfy own_slope > cross_slope >= 0, "
                f"got own={self.own_slope}, cross={self.cross_slope}")

    def quantity(self, price: float, rival_price: float) -> float:
        return max(0.0, self.intercept - self.own_slope * price + self.cross_slope * rival_price)


@dataclass(frozen=True)
class MarketEnv:
    market_scale: float = 1.0
    discount_rate: float = 0.0
    constraint_lambda: float = 1.0
    residual: float = 0.0

    def __post_init__(self):
        _finite(market_scale=self.market_scale, discount_rate=self.discount_rate,
                constraint_lambda=self.constraint_lambda, residual=self.residual)
        if self.market_scale <= 0:
            raise DomainError(f"market_scale must be > 0, got {self.market_scale}")
        if self.discount_rate < 0:
            raise DomainError(f"discount_rate must be >= 0, got {self.discount_rate}")
        if self.constraint_lambda <= 0:
            raise DomainError(f"constraint_lambda must be > 0, got {self.constraint_lambda}")


@dataclass(frozen=True)
class ProductionParams:
    tfp: float
    alpha: float
    omega: float
    w_input: float
    z_input: float

    def __post_init__(self):
        _finite(tfp=self.tfp, alpha=self.alpha, omega=self.omega,
                w_input=self.w_input, z_input=self.z_input)
        if not (0.0 <= self.alpha <= 1.0 and 0.0 <= self.omega <= 1.0):
            raise DomainError("exponents alpha and omega must lie in [0, 1]")
        if abs(self.alpha + self.omega - 1.0) > 1e-12:
            raise DomainError(f"alpha + omega must equal 1, got {self.alpha + self.omega}")
        if self.w_input <= 0 or self.z_input <= 0:
            raise DomainError("production inputs must be > 0")


@dataclass(frozen=True)
class FocComposite:
    """Terms of the composite pricing condition ``(D - c) * E + S``."""

    demand_term: float
    elasticity_term: float
    endowment_sum: float

    def __post_init__(self):
        _finite(demand_term=self.demand_term, elasticity_term=self.elasticity_term,
                endowment_sum=self.endowment_sum)


@dataclass(frozen=True)
class ExportMultipliers:
    mu: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        _finite(mu=self.mu, beta=self.beta)
        if self.mu < 0 or self.beta < 0:
            raise DomainError("export multipliers must be non-negative")


def growth_rate(g: GrowthParams) -> float:
    """Growth under incomplete information, ``A * sigma**(1 - phi)``."""
    return g.age * g.export_intensity ** (1.0 - g.info_phi)


def stage_profit(f: FirmState, d: DemandSpec, rival_price: float, env: MarketEnv) -> float:
    _finite(rival_price=rival_price)
    q = d.quantity(f.price, rival_price)
    return (f.endowment + f.growth) + (f.price - f.unit_cost) * q + env.residual


def constraint_satisfied(profit: float, env: MarketEnv, market_scales: Sequence[float]) -> bool:
    """Feasibility of ``profit <= lambda * mean(market_scales)`` (weak inequality)."""
    if len(market_scales) == 0:
        raise DomainError("market_scales must be non-empty")
    mean_scale = math.fsum(market_scales) / len(market_scales)
    return profit <= env.constraint_lambda * mean_scale


def growth_composite(f: FirmState, d: DemandSpec) -> FocComposite:
    """Composite with the endowment-plus-growth sum on the right-hand side."""
    return FocComposite(f.price, -d.own_slope, f.endowment + f.growth)


def marginal_composite(f: FirmState, d: DemandSpec, rival_price: float) -> FocComposite:
    """Composite whose residual is the marginal stage profit ``q + (p - c) * dq/dp``.

    Valid where demand is positive; past the choke price the residual is just
    ``(p - c) * -own_slope`` with ``q = 0``.
    """
    return FocComposite(f.price, -d.own_slope, d.quantity(f.price, rival_price))


def foc_residual(f: FirmState, d: DemandSpec, rival_price: float,
                 comp: FocComposite | None = None) -> float:
    """Evaluate ``(D - c) * E + S``.

    Without an explicit ``comp`` the marginal-profit composite is used, so the
    residual vanishes at an interior profit maximum.
    """
    _finite(rival_price=rival_price)
    if comp is None:
        comp = marginal_composite(f, d, rival_price)
    return (comp.demand_term - f.unit_cost) * comp.elasticity_term + comp.endowment_sum


def golden_section_max(func, lo: float, hi: float, tol: float = 1e-8) -> float:
    """Maximise a unimodal ``func`` on ``[lo, hi]``; ties move the bracket left."""
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    e = a + INV_PHI * (b - a)
    fc, fe = func(c), func(e)
    while b - a > tol:
        if fc >= fe:
            b, e, fe = e, c, fc
            c = b - INV_PHI * (b - a)
            fc = func(c)
        else:
            a, c, fc = c, e, fe
            e = a + INV_PHI * (b - a)
            fe = func(e)
    return 0.5 * (a + b)


def best_response_price(f: FirmState, d: DemandSpec, rival_price: float,
                        bounds: tuple[float, float], env: MarketEnv | None = None) -> float:
    """Profit-maximising own price on ``bounds`` given the rival's price.

    Stage profit is quasi-concave in own price (a concave parabola up to the
    choke price, flat beyond it), so golden-section search brackets the
    maximum. Endpoints are compared explicitly to catch boundary optima.
    """
    lo, hi = bounds
    _finite(lo=lo, hi=hi, rival_price=rival_price)
    if lo < 0 or not lo < hi:
        raise DomainError(f"price bounds must satisfy 0 <= lo < hi, got ({lo}, {hi})")
    env = env or MarketEnv()

    def profit(p: float) -> float:
        return stage_profit(f.with_price(p), d, rival_price, env)

    best = golden_section_max(profit, lo, hi)
    best_val = profit(best)
    for edge in (lo, hi):
        val = profit(edge)
        if val > best_val:
            best, best_val = edge, val
    return best


def aggregate_demand(env: MarketEnv, revenue_per_unit: float) -> float:
    return env.market_scale * revenue_per_unit / (1.0 + env.discount_rate)


def cobb_douglas_output(p: ProductionParams) -> float:
    return p.tfp * p.w_input ** p.alpha * p.z_input ** p.omega


def export_objective(f: FirmState, g: GrowthParams, m: ExportMultipliers, d: DemandSpec,
                     rival_price: float) -> float:
    """Export-adjusted objective for a single firm.

    ``x - A * sigma**(1 - phi) + (mu * p - beta * c) * q``. Growth enters with a
    minus sign here, unlike ``stage_profit``.
    """
    _finite(rival_price=rival_price)
    q = d.quantity(f.price, rival_price)
    return (f.endowment - growth_rate(g)) + (m.mu * f.price - m.beta * f.unit_cost) * q

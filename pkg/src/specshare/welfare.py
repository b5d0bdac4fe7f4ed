"""Consumer surplus, social welfare and their closed-form limits."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from .closed_form import SymmetricEq
from .exceptions import DomainError
from .market_model import Allocation, MarketConfig, band_prices, expected_latencies


def consumer_surplus(z: float, slope: float = 1.0) -> float:
    """Area between linear demand and the delivered price: ``slope * z**2 / 2``."""
    if z < 0:
        raise DomainError(f"total served must be >= 0, got {z}")
    if not slope > 0:
        raise DomainError(f"slope must be > 0, got {slope}")
    return 0.5 * slope * z * z


@dataclass(frozen=True, eq=False)
class WelfareReport:
    """Welfare accounting for one allocation.

    Attributes:
        consumer_surplus: surplus of served users.
        revenues: per-SP revenue.
        social_welfare: consumer surplus plus total revenue.
        total_served: total mass of users served.
        avg_price: revenue per served user.
        avg_latency: expected latency averaged over all served users.
        licensed_latency: average over licensed-side traffic.
        open_latency: average over open-access traffic.
    """

    consumer_surplus: float
    revenues: np.ndarray
    social_welfare: float
    total_served: float
    avg_price: float
    avg_latency: float
    licensed_latency: float
    open_latency: float

    @property
    def total_revenue(self) -> float:
        return float(math.fsum(self.revenues))

    def as_dict(self) -> dict:
        return {
            "consumer_surplus": self.consumer_surplus,
            "revenues": self.revenues.tolist(),
            "revenue_total": self.total_revenue,
            "social_welfare": self.social_welfare,
            "total_served": self.total_served,
            "avg_price": self.avg_price,
            "avg_latency": self.avg_latency,
            "licensed_latency": self.licensed_latency,
            "open_latency": self.open_latency,
        }


def _weighted(values: np.ndarray, weights: np.ndarray) -> float:
    total = math.fsum(weights)
    return math.fsum(values * weights) / total if total > 0 else 0.0


def welfare_report(config: MarketConfig, equilibrium) -> WelfareReport:
    """Aggregate welfare for an allocation or an equilibrium result.

    Args:
        config: the game instance.
        equilibrium: an :class:`Allocation` or anything with an
            ``allocation`` attribute.
    """
    alloc: Allocation = getattr(equilibrium, "allocation", equilibrium)
    prices = band_prices(config, alloc)
    lic_lat, open_lat = expected_latencies(config, alloc)
    x, w = alloc.licensed_qty, alloc.open_qty
    rev = prices.licensed_prices * x + prices.open_prices * w
    z = alloc.total_served
    cs = consumer_surplus(z, config.demand_slope)
    total_rev = math.fsum(rev)
    lat_mass = math.fsum(lic_lat * x) + math.fsum(open_lat * w)
    return WelfareReport(
        consumer_surplus=cs,
        revenues=rev,
        social_welfare=cs + total_rev,
        total_served=z,
        avg_price=total_rev / z if z > 0 else 0.0,
        avg_latency=lat_mass / z if z > 0 else 0.0,
        licensed_latency=_weighted(lic_lat, x),
        open_latency=_weighted(open_lat, w),
    )


def symmetric_surplus(eq: SymmetricEq, B: float, W: float, beta: float, alpha: float,
                      d: float = 1.0) -> float:
    """Total surplus of a symmetric equilibrium from its aggregate quantities.

    ``rho - rho^2/2 - (1-a) rho^2/B - a X^2/(B + (1-beta) W) - a Wt^2/(d beta W)``
    where ``X`` and ``Wt`` are the licensed and open totals.
    """
    rho = eq.total_served
    val = rho - 0.5 * rho * rho - (1 - alpha) * rho * rho / B
    lic = B + (1 - beta) * W
    if eq.x_total > 0:
        val -= alpha * eq.x_total**2 / lic
    if eq.w_total > 0:
        val -= alpha * eq.w_total**2 / (d * beta * W)
    return val


def sw_beta(B: float, W: float, alpha: float, beta: float) -> float:
    """Social welfare of the many-SP limit as a function of the open fraction."""
    if not B > 0:
        raise DomainError(f"B must be > 0, got {B}")
    if W < 0:
        raise DomainError(f"W must be >= 0, got {W}")
    if not 0 <= beta <= 1:
        raise DomainError(f"beta must lie in [0, 1], got {beta}")
    c = 1.0 - alpha
    s = B + W + W * beta
    num = s * s * (B * B / 2 + B * c) + B * B * alpha * (B + W - W * beta)
    den = (s * (B + 2 * c) + 2 * B * alpha) ** 2
    return num / den


class LargeWLimits(NamedTuple):
    rho: float
    sw: float
    rho_bar: float
    aggregate_profit_limit: float
    profit_maximizing_alpha: float


def large_w_limits(N: Union[int, float], B: float, alpha: float) -> LargeWLimits:
    """Served mass, welfare and profit when the shared band is huge.

    Args:
        N: number of SPs; ``math.inf`` for the many-SP limit.
        B: total proprietary bandwidth.
        alpha: availability.
    """
    if not B > 0:
        raise DomainError(f"B must be > 0, got {B}")
    if not N >= 1:
        raise DomainError(f"N must be >= 1, got {N}")
    c = 1.0 - alpha
    rho = B / (B + B / N + 2 * c)
    sw = rho - 0.5 * rho * rho * (1 + 2 * c / B)
    rho_bar = B / (B + 2 * c)
    profit = B * c / (B + 2 * c) ** 2
    return LargeWLimits(rho, sw, rho_bar, profit, max(0.0, 1.0 - B / 2))

"""Demand and latency curves for the general (nonlinear) game."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .exceptions import DomainError
from .market_model import MarketConfig

_SAMPLES = 33


@dataclass(frozen=True)
class Curve:
    """A scalar function bundled with its first two derivatives."""

    value: Callable[[float], float]
    d1: Callable[[float], float]
    d2: Callable[[float], float]
    linear_coef: Optional[float] = None

    def __call__(self, t: float) -> float:
        return self.value(t)

    @classmethod
    def linear(cls, coef: float) -> "Curve":
        coef = float(coef)
        return cls(lambda t: coef * t, lambda t: coef, lambda t: 0.0, linear_coef=coef)

    @classmethod
    def power(cls, coef: float, k: float) -> "Curve":
        """``coef * t**k`` on ``t >= 0``; convex increasing for ``k >= 1``."""
        if k == 1:
            return cls.linear(coef)
        def d2(t):
            if k == 2:
                return 2.0 * coef
            if t == 0:
                return math.inf if k < 2 else 0.0
            return coef * k * (k - 1) * t ** (k - 2)

        return cls(lambda t: coef * t**k, lambda t: coef * k * t ** (k - 1), d2)

    @property
    def is_linear(self) -> bool:
        return self.linear_coef is not None


@dataclass(frozen=True)
class DemandModel:
    """Inverse demand ``P(y)``, concave and decreasing on ``[0, y_max]``.

    Attributes:
        curve: the function and its derivatives.
        y_max: upper end of the range on which the shape is spot-checked.
    """

    curve: Curve
    y_max: float = 1.0

    def __post_init__(self):
        for y in np.linspace(0.0, self.y_max, _SAMPLES):
            if self.curve.d1(y) > 1e-12:
                raise DomainError(f"demand must be decreasing; P'({y:.3g}) > 0")
            if self.curve.d2(y) > 1e-12:
                raise DomainError(f"demand must be concave; P''({y:.3g}) > 0")

    @classmethod
    def linear(cls, intercept: float = 1.0, slope: float = 1.0) -> "DemandModel":
        c = Curve(lambda y: intercept - slope * y, lambda y: -slope, lambda y: 0.0,
                  linear_coef=-slope)
        return cls(c, intercept / slope)

    @property
    def is_linear(self) -> bool:
        return self.curve.is_linear

    def value(self, y):
        return self.curve.value(y)

    def first_derivative(self, y):
        return self.curve.d1(y)

    def second_derivative(self, y):
        return self.curve.d2(y)


def _check_latency(name: str, c: Curve, t_max: float) -> None:
    for t in np.linspace(0.0, t_max, _SAMPLES):
        if c.d1(t) < -1e-12:
            raise DomainError(f"{name} must be increasing; derivative < 0 at {t:.3g}")
        if c.d2(t) < -1e-12:
            raise DomainError(f"{name} must be convex; second derivative < 0 at {t:.3g}")


@dataclass(frozen=True)
class LatencyModel:
    """Per-band latency curves, each a function of the traffic on that band.

    Attributes:
        proprietary: one curve per SP for its proprietary band, which carries
            all of the SP's traffic while the shared band is pre-empted.
        licensed: one curve per SP for its pooled licensed traffic while the
            shared band is available.
        open: curve of the total open-access traffic.
        availability: probability the shared band is usable.
        t_max: range on which convexity is spot-checked.
    """

    proprietary: tuple
    licensed: tuple
    open: Optional[Curve] = None
    availability: float = 1.0
    t_max: float = field(default=1.0)

    def __post_init__(self):
        object.__setattr__(self, "proprietary", tuple(self.proprietary))
        object.__setattr__(self, "licensed", tuple(self.licensed))
        if len(self.proprietary) != len(self.licensed):
            raise DomainError("proprietary and licensed curves differ in count")
        for i, c in enumerate(self.proprietary):
            _check_latency(f"proprietary[{i}]", c, self.t_max)
        for i, c in enumerate(self.licensed):
            _check_latency(f"licensed[{i}]", c, self.t_max)
        if self.open is not None:
            _check_latency("open", self.open, self.t_max)

    @classmethod
    def linear(cls, config: MarketConfig) -> "LatencyModel":
        """The load-over-bandwidth latencies implied by a config."""
        def inv(bw):
            return Curve.linear(1.0 / bw if bw > 0 else 0.0)
        B = config.proprietary
        L = B + config.licensed_shared
        O = config.effective_open_bw
        return cls(tuple(inv(b) for b in B), tuple(inv(l) for l in L),
                   inv(O) if O > 0 else None, config.availability)

    @classmethod
    def shaped(cls, bandwidths: Sequence[float], shapes: Sequence[Curve]) -> "LatencyModel":
        """Licensed-only SPs with latency ``f_k(x / B_k)`` on bandwidth ``B_k``."""
        curves = []
        for b, f in zip(bandwidths, shapes):
            curves.append(Curve(lambda t, b=b, f=f: f.value(t / b),
                                lambda t, b=b, f=f: f.d1(t / b) / b,
                                lambda t, b=b, f=f: f.d2(t / b) / b**2))
        return cls(tuple(curves), tuple(curves), None, 1.0)

    @property
    def n_sps(self) -> int:
        return len(self.proprietary)

    @property
    def is_linear(self) -> bool:
        return all(c.is_linear for c in self.proprietary + self.licensed) and (
            self.open is None or self.open.is_linear)

"""Market primitives for the Cournot spectrum-sharing game.

Each service provider (SP) owns always-available proprietary bandwidth and
possibly some licensed slices of an intermittently available shared band.
Whatever is left of the shared band is open access. Users are a continuum
with linear inverse demand ``P(y) = intercept - slope * y``; the price an SP
can announce on a band is the delivered price minus the expected latency on
that band.

Quantities on the licensed side are always *pooled*: ``licensed_qty[i]`` is
the traffic SP ``i`` carries on its proprietary band plus all of its licensed
shared sub-bands. Use :func:`split_pooled_traffic` to recover the per-band
split.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .exceptions import DomainError


def _ratio(num, den):
    """Elementwise num/den with 0/0 -> 0 and x/0 -> inf for x > 0."""
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = num / den
    return np.where(num == 0, 0.0, out)


@dataclass(frozen=True)
class SpectrumEndowment:
    """Bandwidth held by one SP.

    Attributes:
        proprietary_bw: always-available licensed bandwidth.
        licensed_shared_bws: exclusive slices of the intermittent band.
    """

    proprietary_bw: float
    licensed_shared_bws: tuple = ()

    def __post_init__(self):
        b = float(self.proprietary_bw)
        subs = tuple(float(v) for v in self.licensed_shared_bws)
        if not math.isfinite(b) or b < 0:
            raise DomainError(f"proprietary_bw must be a finite value >= 0, got {b}")
        for k, v in enumerate(subs):
            if not math.isfinite(v) or v < 0:
                raise DomainError(f"licensed_shared_bws[{k}] must be >= 0, got {v}")
        object.__setattr__(self, "proprietary_bw", b)
        object.__setattr__(self, "licensed_shared_bws", subs)

    @property
    def licensed_shared_bw(self) -> float:
        return math.fsum(self.licensed_shared_bws)


def pool_subbands(endowment: SpectrumEndowment) -> SpectrumEndowment:
    """Replace all licensed shared sub-bands by one band of their total width.

    An SP facing several licensed sub-bands of the same intermittent band
    spreads traffic so that every sub-band carries the same load, so the
    game only ever sees their sum.
    """
    return SpectrumEndowment(endowment.proprietary_bw, (endowment.licensed_shared_bw,))


@dataclass(frozen=True)
class MarketConfig:
    """A complete game instance.

    Attributes:
        endowments: one :class:`SpectrumEndowment` per SP.
        open_access_bw: width of the open-access part of the shared band.
        availability: probability the shared band is usable.
        degradation: multiplier on the open-access bandwidth seen by users,
            modelling poorer coordination among SPs.
        demand_intercept: value of the first user served.
        demand_slope: slope of the linear inverse demand.
        total_shared_bw: optional declared width of the whole shared band;
            when given, licensed slices plus open access must add up to it.
    """

    endowments: tuple
    open_access_bw: float = 0.0
    availability: float = 1.0
    degradation: float = 1.0
    demand_intercept: float = 1.0
    demand_slope: float = 1.0
    total_shared_bw: Optional[float] = None

    def __post_init__(self):
        ends = tuple(
            e if isinstance(e, SpectrumEndowment) else SpectrumEndowment(*e)
            for e in self.endowments
        )
        object.__setattr__(self, "endowments", ends)
        for name in ("open_access_bw", "availability", "degradation",
                     "demand_intercept", "demand_slope"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not ends:
            raise DomainError("endowments: at least one SP is required")
        if not 0.0 <= self.availability <= 1.0:
            raise DomainError(
                f"availability out of range: expected a value in [0, 1], got {self.availability}")
        if not 0.0 < self.degradation <= 1.0:
            raise DomainError(
                f"degradation out of range: expected a value in (0, 1], got {self.degradation}")
        if not math.isfinite(self.open_access_bw) or self.open_access_bw < 0:
            raise DomainError(f"open_access_bw must be >= 0, got {self.open_access_bw}")
        if not self.demand_intercept > 0:
            raise DomainError(f"demand_intercept must be > 0, got {self.demand_intercept}")
        if not self.demand_slope > 0:
            raise DomainError(f"demand_slope must be > 0, got {self.demand_slope}")
        for i, e in enumerate(ends):
            if e.proprietary_bw == 0 and self.availability < 1:
                raise DomainError(
                    f"endowments[{i}].proprietary_bw: zero proprietary bandwidth is only "
                    "allowed when availability = 1 (pre-empted traffic has nowhere to go)")
        if self.total_shared_bw is not None:
            total = float(self.total_shared_bw)
            object.__setattr__(self, "total_shared_bw", total)
            declared = math.fsum(e.licensed_shared_bw for e in ends) + self.open_access_bw
            if abs(declared - total) > 1e-9 * max(1.0, abs(total)):
                raise DomainError(
                    f"total_shared_bw: licensed slices plus open access sum to {declared}, "
                    f"declared {total}")

    @classmethod
    def from_bandwidths(cls, proprietary: Sequence[float],
                        licensed_shared: Optional[Sequence[float]] = None,
                        **kwargs) -> "MarketConfig":
        """Build a config from per-SP proprietary and pooled licensed bandwidths."""
        if licensed_shared is None:
            licensed_shared = [0.0] * len(proprietary)
        if len(licensed_shared) != len(proprietary):
            raise DomainError("licensed_shared: length must match proprietary")
        ends = tuple(SpectrumEndowment(b, (w,) if w else ())
                     for b, w in zip(proprietary, licensed_shared))
        return cls(ends, **kwargs)

    @classmethod
    def symmetric(cls, n_sps: int, total_proprietary: float, total_shared: float,
                  open_fraction: float, availability: float,
                  degradation: float = 1.0) -> "MarketConfig":
        """``n_sps`` identical SPs splitting ``total_proprietary`` and the licensed
        part ``(1 - open_fraction) * total_shared`` equally; the rest is open access."""
        if n_sps < 1:
            raise DomainError(f"n_sps must be >= 1, got {n_sps}")
        if not 0.0 <= open_fraction <= 1.0:
            raise DomainError(f"open_fraction must lie in [0, 1], got {open_fraction}")
        lic = (1.0 - open_fraction) * total_shared / n_sps
        return cls.from_bandwidths(
            [total_proprietary / n_sps] * n_sps, [lic] * n_sps,
            open_access_bw=open_fraction * total_shared,
            availability=availability, degradation=degradation)

    @property
    def n_sps(self) -> int:
        return len(self.endowments)

    @property
    def proprietary(self) -> np.ndarray:
        return np.array([e.proprietary_bw for e in self.endowments])

    @property
    def licensed_shared(self) -> np.ndarray:
        return np.array([e.licensed_shared_bw for e in self.endowments])

    @property
    def effective_open_bw(self) -> float:
        return self.degradation * self.open_access_bw

    @property
    def uses_default_demand(self) -> bool:
        return self.demand_intercept == 1.0 and self.demand_slope == 1.0

    def pooled(self) -> "MarketConfig":
        return replace(self, endowments=tuple(pool_subbands(e) for e in self.endowments))

    def replace(self, **changes) -> "MarketConfig":
        return replace(self, **changes)


@dataclass(frozen=True, eq=False)
class Allocation:
    """Per-SP traffic: pooled licensed quantity and open-access quantity."""

    licensed_qty: np.ndarray
    open_qty: np.ndarray

    def __post_init__(self):
        x = np.array(self.licensed_qty, dtype=float).reshape(-1)
        w = np.array(self.open_qty, dtype=float).reshape(-1)
        if x.shape != w.shape:
            raise DomainError(
                f"licensed_qty and open_qty differ in length ({x.size} vs {w.size})")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(w))):
            raise DomainError("allocation entries must be finite")
        if np.any(x < 0) or np.any(w < 0):
            raise DomainError("allocation entries must be >= 0")
        x.flags.writeable = False
        w.flags.writeable = False
        object.__setattr__(self, "licensed_qty", x)
        object.__setattr__(self, "open_qty", w)

    @classmethod
    def zeros(cls, n_sps: int) -> "Allocation":
        return cls(np.zeros(n_sps), np.zeros(n_sps))

    @classmethod
    def from_vector(cls, v) -> "Allocation":
        v = np.asarray(v, dtype=float)
        n = v.size // 2
        return cls(v[:n], v[n:])

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.licensed_qty, self.open_qty])

    @property
    def n_sps(self) -> int:
        return self.licensed_qty.size

    @property
    def per_sp_load(self) -> np.ndarray:
        return self.licensed_qty + self.open_qty

    @property
    def total_served(self) -> float:
        return float(math.fsum(self.licensed_qty) + math.fsum(self.open_qty))

    def __repr__(self):
        return (f"Allocation(licensed_qty={self.licensed_qty.tolist()}, "
                f"open_qty={self.open_qty.tolist()})")


@dataclass(frozen=True, eq=False)
class PriceSchedule:
    delivered_price: float
    licensed_prices: np.ndarray
    open_prices: np.ndarray
    blended_prices: np.ndarray


def equivalent_bandwidth(B: float, W: float, alpha: float) -> float:
    """Always-available bandwidth worth the same as ``B`` plus ``W`` intermittent.

    Args:
        B: proprietary bandwidth.
        W: licensed shared bandwidth, available with probability ``alpha``.
        alpha: availability of the shared band.

    Returns:
        ``B (B + W) / (B + (1 - alpha) W)``; ``W`` when ``B = 0`` and ``alpha = 1``.

    Raises:
        DomainError: negative bandwidth, ``alpha`` outside [0, 1], or ``B = 0``
            with ``alpha < 1``.
    """
    if B < 0 or W < 0:
        raise DomainError(f"bandwidths must be >= 0, got B={B}, W={W}")
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"availability out of range: {alpha}")
    if B == 0:
        if alpha != 1.0:
            raise DomainError("equivalent bandwidth needs B > 0 unless alpha = 1")
        return float(W)
    return B * (B + W) / (B + (1.0 - alpha) * W)


def split_pooled_traffic(x_tilde: float, B: float, W_i: float) -> tuple:
    """Split pooled licensed traffic between the proprietary band and the
    licensed shared band so both carry the same load."""
    if not B > 0:
        raise DomainError(f"proprietary bandwidth must be > 0, got {B}")
    total = B + W_i
    return x_tilde * B / total, x_tilde * W_i / total


def _check_dims(config: MarketConfig, alloc: Allocation) -> None:
    if alloc.n_sps != config.n_sps:
        raise DomainError(
            f"allocation has {alloc.n_sps} SPs but config has {config.n_sps}")
    if config.open_access_bw == 0 and np.any(alloc.open_qty > 0):
        raise DomainError("open_qty must be zero when there is no open-access band")


def expected_latencies(config: MarketConfig, alloc: Allocation) -> tuple:
    """Expected latency seen by each SP's licensed and open-access traffic.

    When the shared band is pre-empted (probability ``1 - availability``) all
    of an SP's traffic spills onto its proprietary band. Degradation only
    shrinks the open-access band.

    Returns:
        ``(licensed_latency, open_latency)``, arrays of length ``n_sps``.
    """
    _check_dims(config, alloc)
    a = config.availability
    x, w = alloc.licensed_qty, alloc.open_qty
    spill = _ratio((1.0 - a) * (x + w), config.proprietary)
    licensed = spill + _ratio(a * x, config.proprietary + config.licensed_shared)
    open_load = float(_ratio(a * w.sum(), config.effective_open_bw))
    return licensed, spill + open_load


def band_prices(config: MarketConfig, alloc: Allocation) -> PriceSchedule:
    """Announced prices on every band for a given allocation.

    Prices may come out negative away from equilibrium; nothing clips them.
    """
    licensed_lat, open_lat = expected_latencies(config, alloc)
    x, w = alloc.licensed_qty, alloc.open_qty
    p_d = config.demand_intercept - config.demand_slope * alloc.total_served
    p = p_d - licensed_lat
    pw = p_d - open_lat
    y = x + w
    with np.errstate(divide="ignore", invalid="ignore"):
        blended = np.where(y > 0, (x * p + w * pw) / np.where(y > 0, y, 1.0), p)
    return PriceSchedule(float(p_d), p, pw, blended)


def revenues(config: MarketConfig, alloc: Allocation) -> np.ndarray:
    """Per-SP revenue ``p_i x_i + p_i^w w_i``."""
    prices = band_prices(config, alloc)
    return prices.licensed_prices * alloc.licensed_qty + prices.open_prices * alloc.open_qty

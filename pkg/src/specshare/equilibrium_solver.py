"""Numerical Nash equilibria through the game's concave potential.

With linear demand and linear latencies the game is an exact potential game:
stacking ``v = [x; w]`` the potential is ``Phi(v) = a.v - v'Qv/2`` with ``Q``
positive definite whenever ``availability > 0``. The equilibrium is the
unique maximiser of ``Phi`` over the nonnegative orthant. It is found by
cyclic best responses (block coordinate ascent on ``Phi``), finished by an
exact solve on the detected support, and checked against the KKT system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .exceptions import (ConvergenceError, DisagreementError, DomainError,
                         UnsupportedModelError)
from .market_model import (Allocation, MarketConfig, PriceSchedule, _ratio, band_prices,
                           revenues)
from .models import Curve, DemandModel, LatencyModel

AGREE_TOL = 1e-7
DISAGREE_TOL = 1e-6
PLATEAU_SWEEPS = 100
POLISH_EVERY = 5
VACATE_TOL = 1e-12     # open quantity at or below this counts as vacated


@dataclass(frozen=True)
class SolverOptions:
    """Knobs for :func:`solve_equilibrium`.

    Attributes:
        tolerance: target best-response residual (max componentwise change).
        max_iterations: cap on full sweeps per start.
        restarts: number of independent starts; all must agree.
        seed: seed for the jittered starts.
        kkt_tolerance: tolerance used for the attached KKT report.
    """

    tolerance: float = 1e-10
    max_iterations: int = 100_000
    restarts: int = 8
    seed: int = 0
    kkt_tolerance: float = 1e-9

    def __post_init__(self):
        if not self.tolerance > 0:
            raise DomainError(f"tolerance must be > 0, got {self.tolerance}")
        if self.max_iterations < 1:
            raise DomainError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.restarts < 1:
            raise DomainError(f"restarts must be >= 1, got {self.restarts}")


@dataclass(frozen=True)
class KktReport:
    """First-order optimality of an allocation for the potential.

    ``active_set[i]`` is ``(x_i pinned at 0, w_i pinned at 0)``.
    """

    max_stationarity_violation: float
    max_complementarity_violation: float
    active_set: tuple
    prices_nonnegative: bool
    congestion_ordering: bool
    tolerance: float

    @property
    def passed(self) -> bool:
        return (self.max_stationarity_violation <= self.tolerance
                and self.max_complementarity_violation <= self.tolerance
                and self.prices_nonnegative)


@dataclass(frozen=True, eq=False)
class EquilibriumResult:
    allocation: Allocation
    prices: PriceSchedule
    revenues: np.ndarray
    kkt: KktReport
    vacating_sps: frozenset
    iterations: int
    residual: float
    restart_spread: float
    method: str
    potential: float
    restart_allocations: tuple = ()

    @property
    def unique(self) -> bool:
        return self.restart_spread <= AGREE_TOL


class _Game:
    """Coefficients of the quadratic potential for one config."""

    def __init__(self, config: MarketConfig):
        self.config = config
        self.n = config.n_sps
        self.a0 = config.demand_intercept
        self.g = config.demand_slope
        alpha = config.availability
        B = config.proprietary
        L = B + config.licensed_shared
        O = config.effective_open_bw
        if O > 0 and not math.isfinite(alpha / O):
            O = 0.0     # band too narrow to represent; nobody can use it
        self.cB = np.where(B > 0, (1.0 - alpha) / np.where(B > 0, B, 1.0), 0.0)
        self.aL = np.where(L > 0, alpha / np.where(L > 0, L, 1.0), 0.0)
        self.q = alpha / O if O > 0 else 0.0
        self.x_free = L > 0
        self.w_free = np.full(self.n, O > 0 and alpha > 0)
        self.open_exists = O > 0
        h = 2 * self.g + 2 * self.cB
        self.hxx = h + 2 * self.aL
        self.hxw = h
        self.hww = h + 2 * self.q
        self._Q = None

    def kernel(self, i: int, sy_o: float, sw_o: float) -> tuple:
        """Maximise SP ``i``'s payoff given the others' totals."""
        rx = self.a0 - self.g * sy_o
        rw = rx - self.q * sw_o
        hxx, hxw, hww = self.hxx[i], self.hxw[i], self.hww[i]
        xf, wf = self.x_free[i], self.w_free[i]
        if xf and wf:
            det = hxx * hww - hxw * hxw
            x = (rx * hww - rw * hxw) / det
            w = (rw * hxx - rx * hxw) / det
            if x >= 0 and w >= 0:
                return x, w
        best, val = (0.0, 0.0), 0.0
        if xf and rx > 0:
            x = rx / hxx
            best, val = (x, 0.0), 0.5 * rx * x
        if wf and rw > 0:
            w = rw / hww
            if 0.5 * rw * w > val:
                best = (0.0, w)
        return best

    def gradient(self, x: np.ndarray, w: np.ndarray) -> tuple:
        y = x + w
        sy, sw = math.fsum(y), math.fsum(w)
        common = self.a0 - self.g * (sy + y) - 2 * self.cB * y
        return common - 2 * self.aL * x, common - self.q * (sw + w)

    def potential(self, x: np.ndarray, w: np.ndarray) -> float:
        y = x + w
        sy, sw = math.fsum(y), math.fsum(w)
        sq_y, sq_w = math.fsum(y * y), math.fsum(w * w)
        val = self.a0 * sy - self.g * sq_y - self.g * 0.5 * (sy * sy - sq_y)
        val -= math.fsum(self.cB * y * y) + math.fsum(self.aL * x * x)
        val -= self.q * (sq_w + 0.5 * (sw * sw - sq_w))
        return val

    def matrix(self) -> np.ndarray:
        if self._Q is None:
            n = self.n
            sp = np.tile(np.arange(n), 2)
            same = (sp[:, None] == sp[None, :]).astype(float)
            Q = self.g * (1.0 + same) + same * (2 * self.cB[sp])[:, None]
            Q[np.arange(n), np.arange(n)] += 2 * self.aL
            Q[n:, n:] += self.q * (1.0 + np.eye(n))
            self._Q = Q
        return self._Q

    def free_mask(self) -> np.ndarray:
        return np.concatenate([self.x_free, self.w_free])

    def sweep(self, x: np.ndarray, w: np.ndarray) -> float:
        """One Gauss-Seidel pass in place; returns the largest change."""
        sy, sw = math.fsum(x) + math.fsum(w), math.fsum(w)
        change = 0.0
        for i in range(self.n):
            sy_o = sy - x[i] - w[i]
            sw_o = sw - w[i]
            nx, nw = self.kernel(i, sy_o, sw_o)
            change = max(change, abs(nx - x[i]), abs(nw - w[i]))
            x[i], w[i] = nx, nw
            sy, sw = sy_o + nx + nw, sw_o + nw
        return change

    def residual(self, x: np.ndarray, w: np.ndarray) -> float:
        """Largest gap between the allocation and each SP's best response."""
        sy, sw = math.fsum(x) + math.fsum(w), math.fsum(w)
        res = 0.0
        for i in range(self.n):
            nx, nw = self.kernel(i, sy - x[i] - w[i], sw - w[i])
            res = max(res, abs(nx - x[i]), abs(nw - w[i]))
        return res

    def polish(self, x: np.ndarray, w: np.ndarray):
        """Solve the stationarity equations on the current support."""
        v = np.concatenate([x, w])
        support = self.free_mask() & (v > 0)
        if not support.any():
            return None
        Q = self.matrix()
        sub = Q[np.ix_(support, support)]
        try:
            vs = np.linalg.solve(sub, np.full(support.sum(), self.a0))
        except np.linalg.LinAlgError:
            return None
        if np.any(vs < 0):
            return None
        out = np.zeros_like(v)
        out[support] = vs
        return out[: self.n], out[self.n:]

    def projected_gradient(self, x: np.ndarray, w: np.ndarray, steps: int) -> None:
        """Projected gradient ascent with backtracking, in place."""
        free = self.free_mask()
        lip = np.max(np.sum(np.abs(self.matrix()), axis=1))
        v = np.concatenate([x, w])
        phi = self.potential(x, w)
        t = 1.0 / lip
        for _ in range(steps):
            gx, gw = self.gradient(v[: self.n], v[self.n:])
            g = np.where(free, np.concatenate([gx, gw]), 0.0)
            while True:
                cand = np.maximum(v + t * g, 0.0)
                val = self.potential(cand[: self.n], cand[self.n:])
                if val >= phi or t < 1e-300:
                    break
                t *= 0.5
            v, phi = cand, val
            t = min(2 * t, 1.0 / lip * 4)
        x[:], w[:] = v[: self.n], v[self.n:]


def _others_totals(alloc: Allocation, i: int) -> tuple:
    x, w = alloc.licensed_qty, alloc.open_qty
    sy = math.fsum(x) + math.fsum(w) - x[i] - w[i]
    sw = math.fsum(w) - w[i]
    return sy, sw


def potential_value(config: MarketConfig, alloc: Allocation,
                    demand: Optional[DemandModel] = None,
                    latency: Optional[LatencyModel] = None) -> float:
    """Value of the exact potential at ``alloc``.

    Raises:
        UnsupportedModelError: if a nonlinear demand or open-band latency is
            supplied; no potential is available then.
    """
    if demand is not None and not demand.is_linear:
        raise UnsupportedModelError("potential requires linear inverse demand")
    if latency is not None and latency.open is not None and not latency.open.is_linear:
        raise UnsupportedModelError("potential requires a linear open-band latency")
    if alloc.n_sps != config.n_sps:
        raise DomainError(f"allocation has {alloc.n_sps} SPs but config has {config.n_sps}")
    return _Game(config).potential(alloc.licensed_qty, alloc.open_qty)


def best_response(config: MarketConfig, i: int, others: Allocation) -> tuple:
    """SP ``i``'s revenue-maximising ``(x_i, w_i)`` against fixed opponents.

    ``others`` is a full allocation; entry ``i`` is ignored. The 2x2 concave
    quadratic is maximised exactly by comparing the interior stationary
    point with the two edge maxima.

    Conventions for degenerate bands: with ``availability = 0`` (or no open
    band) all traffic goes to the licensed side, since the split is then
    payoff-irrelevant or forced.
    """
    if others.n_sps != config.n_sps:
        raise DomainError(f"allocation has {others.n_sps} SPs but config has {config.n_sps}")
    if not 0 <= i < config.n_sps:
        raise DomainError(f"SP index {i} out of range")
    game = _Game(config)
    x, w = game.kernel(i, *_others_totals(others, i))
    return float(x), float(w)


def kkt_verify(config: MarketConfig, alloc: Allocation, tol: float = 1e-9) -> KktReport:
    """Check an allocation against the potential's KKT conditions."""
    game = _Game(config)
    if alloc.n_sps != game.n:
        raise DomainError(f"allocation has {alloc.n_sps} SPs but config has {game.n}")
    x, w = alloc.licensed_qty, alloc.open_qty
    gx, gw = game.gradient(x, w)

    def stat(g, v, free):
        viol = np.where(v > 0, np.abs(g), np.maximum(g, 0.0))
        return np.where(free, viol, np.where(v > 0, np.inf, 0.0))

    w_free = np.full(game.n, game.open_exists)
    s = max(float(np.max(stat(gx, x, game.x_free))), float(np.max(stat(gw, w, w_free))))
    comp = max(float(np.max(np.abs(np.where(game.x_free, gx * x, 0.0)))),
               float(np.max(np.abs(np.where(w_free, gw * w, 0.0)))))

    prices = band_prices(config, alloc)
    ok_prices = bool(np.all(prices.licensed_prices[x > 0] >= -tol)
                     and np.all(prices.open_prices[w > 0] >= -tol))

    ordering = True
    if game.open_exists:
        O = config.effective_open_bw
        sw = math.fsum(w)
        L = config.proprietary + config.licensed_shared
        load = _ratio(x, L)
        mid = (w + 0.5 * (sw - w)) / O
        used = x > 0
        ordering = bool(np.all(load[used] <= mid[used] + tol) and np.all(mid <= sw / O + tol))
    active = tuple((bool(a), bool(b)) for a, b in zip(x == 0, w == 0))
    return KktReport(s, comp, active, ok_prices, ordering, tol)


def _heuristic_start(config: MarketConfig) -> np.ndarray:
    n = config.n_sps
    B = config.proprietary
    base = B if B.sum() > 0 else config.proprietary + config.licensed_shared
    x = base / (2 * base.sum()) if base.sum() > 0 else np.full(n, 0.5 / n)
    W0 = config.open_access_bw
    w = np.full(n, W0 / (2 * n * max(W0, 1.0)))
    return np.concatenate([x, w])


def _run_start(game: _Game, v0: np.ndarray, options: SolverOptions) -> tuple:
    n = game.n
    free = game.free_mask()
    v0 = np.where(free, v0, 0.0)
    x, w = v0[:n].copy(), v0[n:].copy()
    method = "best_response"
    history = []
    last = math.inf
    for it in range(1, options.max_iterations + 1):
        if method == "best_response":
            change = game.sweep(x, w)
        else:
            before = np.concatenate([x, w])
            game.projected_gradient(x, w, 10)
            change = float(np.max(np.abs(np.concatenate([x, w]) - before)))
        last = change
        if change <= options.tolerance or it % POLISH_EVERY == 0:
            pol = game.polish(x, w)
            if pol is not None:
                res = game.residual(*pol)
                if res <= options.tolerance:
                    return pol[0], pol[1], it, res, method
            if change <= options.tolerance:
                res = game.residual(x, w)
                if res <= options.tolerance:
                    return x, w, it, res, method
        history.append(change)
        if method == "best_response" and len(history) > PLATEAU_SWEEPS:
            if change > 0.5 * history[-PLATEAU_SWEEPS - 1]:
                method = "projected_gradient"
    raise ConvergenceError(
        f"no convergence after {options.max_iterations} sweeps (last change {last:.3g})",
        residual=last)


def solve_equilibrium(config: MarketConfig,
                      options: Optional[SolverOptions] = None) -> EquilibriumResult:
    """Compute the unique equilibrium of a linear game.

    Each restart runs cyclic best responses from a jittered copy of a
    proportional starting point. The returned equilibrium is the one with
    the smallest residual (earliest start on ties).

    Raises:
        ConvergenceError: a start fails to converge within the sweep cap.
        DisagreementError: restarts end more than 1e-6 apart.
    """
    options = options or SolverOptions()
    game = _Game(config)
    n = game.n
    rng = np.random.default_rng(options.seed)
    base = _heuristic_start(config)
    starts = [base] + [base * rng.uniform(0.5, 1.5, 2 * n) + rng.uniform(0.0, 0.1, 2 * n)
                       for _ in range(options.restarts - 1)]
    runs = []
    for v0 in starts:
        x, w, it, res, method = _run_start(game, v0, options)
        runs.append((res, len(runs), np.concatenate([x, w]), it, method))
    best = min(runs, key=lambda r: (r[0], r[1]))
    spread = max(float(np.max(np.abs(r[2] - best[2]))) for r in runs)
    if spread > DISAGREE_TOL:
        raise DisagreementError(f"restarts disagree by {spread:.3g}", spread)
    v = np.maximum(best[2], 0.0)
    alloc = Allocation(v[:n], v[n:])
    kkt = kkt_verify(config, alloc, options.kkt_tolerance)
    vac = frozenset(int(i) for i in np.flatnonzero(alloc.open_qty <= VACATE_TOL)) \
        if config.effective_open_bw > 0 else frozenset()
    return EquilibriumResult(
        allocation=alloc,
        prices=band_prices(config, alloc),
        revenues=revenues(config, alloc),
        kkt=kkt,
        vacating_sps=vac,
        iterations=int(sum(r[3] for r in runs)),
        residual=float(best[0]),
        restart_spread=spread,
        method=best[4],
        potential=game.potential(alloc.licensed_qty, alloc.open_qty),
        restart_allocations=tuple(Allocation.from_vector(np.maximum(r[2], 0.0)) for r in runs),
    )


# General demand and latency

def _argmax_concave(deriv, tol: float) -> float:
    """Maximiser on [0, inf) of a concave function given its derivative."""
    if deriv(0.0) <= 0:
        return 0.0
    hi = 1.0
    for _ in range(200):
        if deriv(hi) <= 0:
            break
        hi *= 2.0
    else:
        raise ConvergenceError("could not bracket the best response")
    return brentq(deriv, 0.0, hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=500)


def _general_partials(demand: DemandModel, lat: LatencyModel, i: int,
                      x: float, w: float, y_o: float, w_o: float) -> tuple:
    a = lat.availability
    y = x + w
    Y = y_o + y
    P, P1 = demand.value(Y), demand.first_derivative(Y)
    prop, lic = lat.proprietary[i], lat.licensed[i]
    lp, lp1 = prop.value(y), prop.d1(y)
    ll, ll1 = lic.value(x), lic.d1(x)
    if lat.open is not None:
        S = w_o + w
        lo, lo1 = lat.open.value(S), lat.open.d1(S)
    else:
        lo = lo1 = 0.0
    base = P + y * P1 - (1 - a) * lp - (1 - a) * lp1 * y
    dx = base - a * ll - a * ll1 * x
    dw = base - a * lo - a * lo1 * w
    return dx, dw


def general_best_response(config: MarketConfig, demand: DemandModel, latency: LatencyModel,
                          i: int, others: Allocation, tol: float = 1e-13,
                          max_iter: int = 100_000) -> tuple:
    """Best response under concave demand and convex latencies.

    Coordinate ascent: each coordinate is set to the root of its partial
    derivative (bracketed root finding), alternating until the pair moves
    less than ``tol``.
    """
    if latency.n_sps != config.n_sps:
        raise DomainError("latency model and config differ in SP count")
    y_o, w_o = _others_totals(others, i)
    L = config.proprietary + config.licensed_shared
    x_free = L[i] > 0
    w_free = latency.open is not None and latency.availability > 0
    x, w = float(others.licensed_qty[i]) if x_free else 0.0, 0.0
    if w_free:
        w = float(others.open_qty[i])
    for _ in range(max_iter):
        nx = _argmax_concave(
            lambda t: _general_partials(demand, latency, i, t, w, y_o, w_o)[0], tol) \
            if x_free else 0.0
        nw = _argmax_concave(
            lambda t: _general_partials(demand, latency, i, nx, t, y_o, w_o)[1], tol) \
            if w_free else 0.0
        change = max(abs(nx - x), abs(nw - w))
        x, w = nx, nw
        if change <= tol:
            return x, w
    raise ConvergenceError(f"coordinate ascent did not converge for SP {i}")


def solve_general_equilibrium(config: MarketConfig, demand: DemandModel,
                              latency: LatencyModel, tol: float = 1e-12,
                              max_sweeps: int = 100_000) -> Allocation:
    """Cyclic general best responses until the allocation stops moving."""
    n = config.n_sps
    v = _heuristic_start(config)
    if latency.open is None:
        v[n:] = 0.0
    alloc = Allocation(v[:n], v[n:])
    for _ in range(max_sweeps):
        x, w = alloc.licensed_qty.copy(), alloc.open_qty.copy()
        change = 0.0
        for i in range(n):
            nx, nw = general_best_response(config, demand, latency, i, Allocation(x, w),
                                           tol=tol * 1e-1)
            change = max(change, abs(nx - x[i]), abs(nw - w[i]))
            x[i], w[i] = nx, nw
        alloc = Allocation(x, w)
        if change <= tol:
            return alloc
    raise ConvergenceError("general best-response iteration did not converge")


# Marginal bandwidth

class MarginalShift(NamedTuple):
    dx_k: float
    dx_minus_k: float
    dCS: float
    dR_k: float
    dR_minus_k: float
    cascade_ratio: float


def marginal_bandwidth_shift(config: MarketConfig, k: int, delta_B: float,
                             demand: Optional[DemandModel] = None,
                             shapes: Optional[Sequence[Curve]] = None) -> MarginalShift:
    """First-order effect of giving SP ``k`` an extra ``delta_B`` of bandwidth.

    Two licensed-only SPs with latency ``f_j(x_j / B_j)``. The direct effect
    on ``x_k`` is amplified by the cascade of best responses, a geometric
    series with ratio equal to the product of the two reaction slopes.

    Args:
        config: two SPs, no shared bandwidth of any kind.
        k: SP receiving the bandwidth.
        delta_B: size of the increment.
        demand: inverse demand; defaults to the config's linear demand.
        shapes: latency shapes ``f_j``; default ``f(u) = u``.
    """
    if config.n_sps != 2:
        raise DomainError(f"marginal shift needs exactly 2 SPs, got {config.n_sps}")
    if config.open_access_bw > 0 or np.any(config.licensed_shared > 0):
        raise DomainError("marginal shift applies to licensed-only configs (no shared band)")
    if k not in (0, 1):
        raise DomainError(f"SP index {k} out of range")
    B = config.proprietary
    if np.any(B <= 0):
        raise DomainError("proprietary bandwidths must be > 0")
    if shapes is None:
        shapes = (Curve.linear(1.0), Curve.linear(1.0))
    if demand is None:
        demand = DemandModel.linear(config.demand_intercept, config.demand_slope)
    if demand.is_linear and all(f.is_linear for f in shapes):
        scaled = MarketConfig.from_bandwidths(
            [B[j] / shapes[j].linear_coef for j in (0, 1)],
            demand_intercept=config.demand_intercept, demand_slope=-demand.curve.linear_coef)
        x = solve_equilibrium(scaled, SolverOptions(restarts=1)).allocation.licensed_qty
    else:
        x = solve_general_equilibrium(config, demand, LatencyModel.shaped(B, shapes)).licensed_qty
    z = float(x.sum())
    P1, P2 = demand.first_derivative(z), demand.second_derivative(z)

    def G(j):
        u = x[j] / B[j]
        f = shapes[j]
        return 2 * P1 + x[j] * P2 - 2 * f.d1(u) / B[j] - x[j] * f.d2(u) / B[j] ** 2

    m = 1 - k
    fk = shapes[k]
    uk = x[k] / B[k]
    dxk_dBk = -(2 * x[k] * fk.d1(uk) / B[k] ** 2 + x[k] ** 2 * fk.d2(uk) / B[k] ** 3) / G(k)
    slope_k = -(P1 + x[k] * P2) / G(k)      # response of x_k to x_m
    slope_m = -(P1 + x[m] * P2) / G(m)      # response of x_m to x_k
    rho = slope_k * slope_m
    dxk = dxk_dBk * delta_B / (1 - rho)
    dxm = slope_m * dxk
    dz = dxk + dxm
    dcs = -z * P1 * dz
    drk = x[k] * P1 * dxm + x[k] * fk.d1(uk) * x[k] / B[k] ** 2 * delta_B
    drm = x[m] * P1 * dxk
    return MarginalShift(float(dxk), float(dxm), float(dcs), float(drk), float(drm), float(rho))


def marginal_allocation_rule(B1: float, B2: float, c1: float, c2: float,
                             a: float = 1.0) -> Optional[int]:
    """Which of two SPs should get a marginal unit of bandwidth.

    Latencies are ``c_k x / B_k`` and demand is ``1 - a x``. Returns the
    0-based index of the SP whose consumer-surplus gain is larger, or
    ``None`` on an exact tie.
    """
    for name, v in (("B1", B1), ("B2", B2), ("c1", c1), ("c2", c2), ("a", a)):
        if not v > 0:
            raise DomainError(f"{name} must be > 0, got {v}")
    slack = B2 - math.sqrt(c2 / c1) * B1 - (2.0 / a) * (math.sqrt(c1 * c2) - c2)
    if slack > 0:
        return 0
    if slack < 0:
        return 1
    return None

"""Parameter sweeps, figure jobs and the ascending-auction example.

Every job is deterministic: grid points are solved independently and rows
are ordered by grid index, so the output does not depend on the number of
worker processes.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import subprocess
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .closed_form import (duopoly_licensed_equilibrium, duopoly_vacate_condition,
                          n_symmetric_equilibrium, symmetric_duopoly_open)
from .equilibrium_solver import VACATE_TOL, SolverOptions, solve_equilibrium
from .exceptions import DomainError, SpecShareError
from .market_model import (Allocation, MarketConfig, SpectrumEndowment,
                           equivalent_bandwidth)
from .welfare import sw_beta, symmetric_surplus, welfare_report

OBSERVABLES = ("x_i", "w_i", "p_i", "p_w_i", "cs", "sw", "revenue_total",
               "avg_price", "avg_latency", "vacate_flags")
PER_SP = {"x_i": "x", "w_i": "w", "p_i": "p", "p_w_i": "p_w", "vacate_flags": "vacate"}


# Tables

@dataclass
class SweepTable:
    """Rows of numbers with named columns."""

    columns: list
    rows: list = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        j = self.columns.index(name)
        return np.array([r[j] for r in self.rows], dtype=float)

    def to_csv(self, path=None) -> str:
        """CSV with a header row; floats written with 12 significant digits."""
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_fmt(v) for v in row])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, newline="")
        return text


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".12g")
    return str(v)


def git_describe() -> str:
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty"],
                             cwd=Path(__file__).resolve().parent, capture_output=True,
                             text=True, timeout=5)
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return out.stdout.strip() if out.returncode == 0 and out.stdout.strip() else "unknown"


def write_outputs(table: SweepTable, out_dir, job: str, parameters: dict,
                  seed: int) -> tuple:
    """Write ``<job>.csv`` and ``<job>.manifest.json``; returns both paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{job}.csv"
    table.to_csv(csv_path)
    manifest = {"job": job, "parameters": parameters, "git_describe": git_describe(),
                "seed": seed, "rows": len(table.rows)}
    man_path = out / f"{job}.manifest.json"
    man_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return csv_path, man_path


# Sweeps

@dataclass(frozen=True)
class DerivedAxis:
    """A parameter tied to the sweep axis: ``param = scale * value ** power``."""

    param: str
    scale: float = 1.0
    power: float = 1.0

    def value(self, axis_value: float) -> float:
        return self.scale * axis_value ** self.power


@dataclass(frozen=True)
class SweepSpec:
    """One-dimensional sweep over a config parameter.

    Attributes:
        base_config: config every grid point starts from.
        axis: swept parameter (see :func:`apply_param` for names).
        grid: strictly monotone axis values.
        derived_axes: parameters coupled to the axis.
        outputs: observable names from :data:`OBSERVABLES`.
        seed: solver seed.
        name: job name used for output files.
    """

    base_config: MarketConfig
    axis: str
    grid: tuple
    derived_axes: tuple = ()
    outputs: tuple = ("cs", "sw")
    seed: int = 0
    name: str = "sweep"

    def __post_init__(self):
        grid = tuple(float(g) for g in self.grid)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "outputs", tuple(self.outputs))
        object.__setattr__(self, "derived_axes", tuple(self.derived_axes))
        if not grid:
            raise DomainError("grid: at least one point is required")
        diffs = np.diff(grid)
        if not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise DomainError("grid: values must be strictly monotone")
        bad = [o for o in self.outputs if o not in OBSERVABLES]
        if bad:
            raise DomainError(f"outputs: unknown observable {bad[0]!r}; choose from {OBSERVABLES}")

    def config_at(self, value: float) -> MarketConfig:
        cfg = apply_param(self.base_config, self.axis, value)
        for d in self.derived_axes:
            cfg = apply_param(cfg, d.param, d.value(value))
        return cfg


def apply_param(config: MarketConfig, name: str, value: float) -> MarketConfig:
    """Return ``config`` with one named parameter changed.

    Names: ``alpha``, ``d``, ``W0`` (open-access bandwidth), ``slope``,
    ``intercept``, ``B`` (total proprietary, split equally), ``B_k`` and
    ``W_k`` (SP ``k``'s proprietary and licensed shared bandwidth, 1-based).
    """
    value = float(value)
    simple = {"alpha": "availability", "d": "degradation", "W0": "open_access_bw",
              "slope": "demand_slope", "intercept": "demand_intercept"}
    if name in simple:
        return replace(config, total_shared_bw=None, **{simple[name]: value}) \
            if name == "W0" else replace(config, **{simple[name]: value})
    ends = list(config.endowments)
    if name == "B":
        ends = [SpectrumEndowment(value / len(ends), e.licensed_shared_bws) for e in ends]
        return replace(config, endowments=tuple(ends))
    kind, _, idx = name.partition("_")
    if kind in ("B", "W") and idx.isdigit() and 1 <= int(idx) <= len(ends):
        k = int(idx) - 1
        e = ends[k]
        if kind == "B":
            ends[k] = SpectrumEndowment(value, e.licensed_shared_bws)
        else:
            ends[k] = SpectrumEndowment(e.proprietary_bw, (value,) if value else ())
        return replace(config, endowments=tuple(ends), total_shared_bw=None)
    raise DomainError(f"unknown sweep parameter {name!r}")


def _is_symmetric(config: MarketConfig) -> bool:
    e0 = config.endowments[0]
    return all(e.proprietary_bw == e0.proprietary_bw
               and e.licensed_shared_bw == e0.licensed_shared_bw for e in config.endowments)


def solve_point(config: MarketConfig, seed: int = 0) -> tuple:
    """Equilibrium allocation for one config, by closed form when one applies.

    Returns:
        ``(allocation, method)`` with method ``"closed_form"`` or ``"solver"``.
    """
    B = config.proprietary
    n = config.n_sps
    if config.uses_default_demand and np.all(B > 0):
        if config.effective_open_bw == 0 and n == 2:
            T = [equivalent_bandwidth(b, w, config.availability)
                 for b, w in zip(B, config.licensed_shared)]
            eq = duopoly_licensed_equilibrium(*T)
            return Allocation(eq.x_star, np.zeros(2)), "closed_form"
        if _is_symmetric(config):
            W = n * config.licensed_shared[0] + config.open_access_bw
            beta = config.open_access_bw / W if W > 0 else 0.0
            eq = n_symmetric_equilibrium(n, n * B[0], W, beta, config.availability,
                                         config.degradation)
            return Allocation(np.full(n, eq.x_bar), np.full(n, eq.w_bar)), "closed_form"
    res = solve_equilibrium(config, SolverOptions(seed=seed, restarts=2))
    return res.allocation, "solver"


def _observables(config: MarketConfig, alloc: Allocation, outputs: Sequence[str]) -> dict:
    from .market_model import band_prices
    rep = welfare_report(config, alloc)
    prices = band_prices(config, alloc)
    open_band = config.effective_open_bw > 0
    vals = {
        "x": alloc.licensed_qty, "w": alloc.open_qty,
        "p": prices.licensed_prices, "p_w": prices.open_prices,
        "vacate": (alloc.open_qty <= VACATE_TOL) & open_band,
    }
    out = {}
    for o in outputs:
        if o in PER_SP:
            for i, v in enumerate(vals[PER_SP[o]]):
                out[f"{PER_SP[o]}_{i + 1}"] = v
        elif o == "cs":
            out["cs"] = rep.consumer_surplus
        elif o == "sw":
            out["sw"] = rep.social_welfare
        elif o == "revenue_total":
            out["revenue_total"] = rep.total_revenue
        elif o == "avg_price":
            out["avg_price"] = rep.avg_price
        elif o == "avg_latency":
            out["avg_latency"] = rep.avg_latency
    return out


def _output_columns(outputs: Sequence[str], n: int) -> list:
    cols = []
    for o in outputs:
        if o in PER_SP:
            cols += [f"{PER_SP[o]}_{i + 1}" for i in range(n)]
        else:
            cols.append(o)
    return cols


def _eval_point(payload) -> tuple:
    config, outputs, seed = payload
    try:
        alloc, _ = solve_point(config, seed)
        return _observables(config, alloc, outputs), ""
    except SpecShareError as exc:
        return {}, f"{type(exc).__name__}: {exc}"


def default_workers() -> int:
    env = os.environ.get("SPECSHARE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def run_sweep(spec: SweepSpec, workers: Optional[int] = None) -> SweepTable:
    """Solve every grid point and tabulate the requested observables.

    Per-point failures (invalid config, solver errors) are recorded in an
    ``error`` column instead of aborting the sweep.
    """
    payloads = []
    errors = {}
    for k, v in enumerate(spec.grid):
        try:
            payloads.append((spec.config_at(v), spec.outputs, spec.seed))
        except SpecShareError as exc:
            payloads.append(None)
            errors[k] = f"{type(exc).__name__}: {exc}"
    todo = [p for p in payloads if p is not None]
    workers = workers or default_workers()
    if workers > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(todo))) as pool:
            results = list(pool.map(_eval_point, todo, chunksize=max(1, len(todo) // (4 * workers))))
    else:
        results = [_eval_point(p) for p in todo]
    it = iter(results)
    cols = _output_columns(spec.outputs, spec.base_config.n_sps)
    rows, any_error = [], bool(errors)
    for k, v in enumerate(spec.grid):
        if payloads[k] is None:
            vals, err = {}, errors[k]
        else:
            vals, err = next(it)
        any_error = any_error or bool(err)
        rows.append([v] + [vals.get(c, math.nan) for c in cols] + [err])
    table = SweepTable([spec.axis] + cols + ["error"], rows)
    if not any_error:
        table = SweepTable(table.columns[:-1], [r[:-1] for r in rows])
    return table


# Allocation schemes for a duopoly

def scheme_split_equalize(B1: float, B2: float, W: float, alpha: float) -> tuple:
    """Split ``W`` so both SPs end up with the same equivalent bandwidth.

    Falls back to giving all of ``W`` to SP 2 when even that leaves SP 1
    ahead.
    """
    if not (B1 >= B2 > 0):
        raise DomainError(f"need B1 >= B2 > 0, got B1={B1}, B2={B2}")
    if W < 0:
        raise DomainError(f"W must be >= 0, got {W}")

    def gap(W1):
        return equivalent_bandwidth(B1, W1, alpha) - equivalent_bandwidth(B2, W - W1, alpha)

    if W == 0 or gap(0.0) > 0:
        return 0.0, float(W)
    if gap(0.0) == 0:
        return 0.0, float(W)
    W1 = brentq(gap, 0.0, W, xtol=1e-14, rtol=4 * np.finfo(float).eps)
    return W1, W - W1


def _licensed_duopoly_sw(T1: float, T2: float) -> float:
    eq = duopoly_licensed_equilibrium(T1, T2)
    z = sum(eq.x_star)
    return 0.5 * z * z + sum(eq.revenues)


def scheme_welfare(B1: float, B2: float, W: float, alpha: float, seed: int = 0) -> dict:
    """Social welfare of the four ways of handing out ``W`` between two SPs."""
    T = lambda b, w: equivalent_bandwidth(b, w, alpha)  # noqa: E731
    W1, W2 = scheme_split_equalize(B1, B2, W, alpha)
    feasible = not (W1 == 0.0 and T(B1, 0.0) > T(B2, W))
    cfg = MarketConfig.from_bandwidths([B1, B2], open_access_bw=W, availability=alpha)
    open_res = solve_equilibrium(cfg, SolverOptions(seed=seed, restarts=2))
    rep = welfare_report(cfg, open_res)
    return {
        "sw_SP1": _licensed_duopoly_sw(T(B1, W), B2),
        "sw_SP2": _licensed_duopoly_sw(B1, T(B2, W)),
        "sw_Split": _licensed_duopoly_sw(T(B1, W1), T(B2, W2)),
        "sw_OpenAccess": rep.social_welfare,
        "split_W1": W1,
        "split_feasible": feasible,
        "vacate_1": 0 in open_res.vacating_sps,
        "vacate_flag_closed_form": 0 in duopoly_vacate_condition(B1, B2, 0, 0, W, alpha).vacating_sps,
    }


def numeric_vacate_threshold(B2: float, W: float, alpha: float, lo: float, hi: float,
                             tol: float = 1e-6, seed: int = 0) -> float:
    """Smallest ``B1`` in ``[lo, hi]`` at which SP 1's open-access quantity
    is zero, by bisection on the numerical equilibrium."""

    def vacates(B1):
        cfg = MarketConfig.from_bandwidths([B1, B2], open_access_bw=W, availability=alpha)
        w1 = solve_equilibrium(cfg, SolverOptions(seed=seed, restarts=1)).allocation.open_qty[0]
        return w1 <= VACATE_TOL

    if vacates(lo):
        return lo
    if not vacates(hi):
        return math.nan
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if vacates(mid):
            hi = mid
        else:
            lo = mid
    return hi


# Auction example

@dataclass(frozen=True)
class AuctionRow:
    alpha: float
    R_pre: float
    R_large: float
    R_small: float
    R_shared: float
    stop_price: float
    winner_profit: float
    prefers_open_access: bool


@dataclass(frozen=True)
class AuctionScenario:
    """Ascending auction for ``W`` versus open access, one row per availability.

    The auction stops when the price reaches ``R_large - R_small``, so the
    winner nets ``R_small``, the same as the loser.
    """

    B1: float
    B2: float
    W: float
    rows: tuple

    def table(self) -> SweepTable:
        cols = ["alpha", "R_pre", "R_large", "R_small", "R_shared", "stop_price",
                "winner_profit", "prefers_open_access"]
        return SweepTable(cols, [[getattr(r, c) for c in cols] for r in self.rows])


def auction_compare(B1: float = 1.0, B2: float = 1.0, W: float = 1.0,
                    alphas: Sequence[float] = (0.1, 0.5, 0.9), seed: int = 0) -> AuctionScenario:
    """Compare winning ``W`` at auction with sharing it as open access.

    SP 1 is taken as the winner. Revenues are SP 1's in each regime.
    """
    rows = []
    R_pre = duopoly_licensed_equilibrium(B1, B2).revenues[0]
    for a in alphas:
        big = duopoly_licensed_equilibrium(equivalent_bandwidth(B1, W, a), B2).revenues
        R_large, R_small = big
        if B1 == B2:
            eq = symmetric_duopoly_open(B1 + B2, W, a, 1.0)
            R_shared = eq.p * eq.x_bar + eq.p_w * eq.w_bar
        else:
            cfg = MarketConfig.from_bandwidths([B1, B2], open_access_bw=W, availability=a)
            R_shared = float(solve_equilibrium(cfg, SolverOptions(seed=seed)).revenues[0])
        stop = R_large - R_small
        winner = R_large - stop
        rows.append(AuctionRow(float(a), R_pre, R_large, R_small, R_shared, stop, winner,
                               bool(R_shared > winner)))
    return AuctionScenario(B1, B2, W, tuple(rows))


# Figure jobs

def job_fig_T(points: int = 200) -> SweepTable:
    """Equivalent bandwidth against availability with the mean shared
    bandwidth ``alpha * W`` held fixed."""
    rows = []
    for B, aW in ((0.1, 1.0), (1.0, 0.1)):
        for a in np.linspace(0.01, 1.0, points):
            W = aW / a
            rows.append([B, aW, a, W, equivalent_bandwidth(B, W, a)])
    return SweepTable(["B", "alpha_W", "alpha", "W", "T"], rows)


def job_fig_prices_quantities(points: int = 200, B2: float = 1.0, W: float = 10.0,
                              alpha: float = 0.9, B1_range=(2.0, 40.0), seed: int = 0) -> SweepTable:
    """Duopoly quantities and prices as SP 1's proprietary bandwidth grows."""
    spec = SweepSpec(MarketConfig.from_bandwidths([B1_range[0], B2], open_access_bw=W,
                                                  availability=alpha),
                     "B_1", tuple(np.linspace(*B1_range, points)),
                     outputs=("x_i", "w_i", "p_i", "p_w_i", "vacate_flags"), seed=seed)
    return run_sweep(spec, workers=1)


def _fig_sw(axis: str, grid, fixed: dict, seed: int) -> SweepTable:
    cols = [axis, "sw_SP1", "sw_SP2", "sw_Split", "sw_OpenAccess", "split_feasible",
            "vacate_1", "vacate_flag_closed_form"]
    rows = []
    for v in grid:
        kw = dict(fixed, **{axis: float(v)})
        s = scheme_welfare(kw["B1"], kw["B2"], kw["W"], kw["alpha"], seed)
        rows.append([float(v)] + [s[c] for c in cols[1:]])
    return SweepTable(cols, rows)


def job_fig_SW_B(points: int = 200, B2: float = 1.0, W: float = 1.0, alpha: float = 0.9,
                 B1_range=(1.0, 10.0), seed: int = 0) -> SweepTable:
    """Welfare of the four allocation schemes against ``B1``."""
    return _fig_sw("B1", np.linspace(*B1_range, points), {"B2": B2, "W": W, "alpha": alpha}, seed)


def job_fig_SW_W(points: int = 200, B1: float = 7.0, B2: float = 1.0, alpha: float = 0.9,
                 W_range=(0.05, 20.0), seed: int = 0) -> SweepTable:
    """Welfare of the four allocation schemes against ``W``."""
    return _fig_sw("W", np.linspace(*W_range, points), {"B1": B1, "B2": B2, "alpha": alpha}, seed)


def symmetric_sw(N: int, B: float, W: float, beta: float, alpha: float, d: float = 1.0) -> float:
    eq = n_symmetric_equilibrium(N, B, W, beta, alpha, d)
    return symmetric_surplus(eq, B, W, beta, alpha, d)


def job_fig_SW_N(N_max: int = 20, Ws: Sequence[float] = (1.0, 2.0, 5.0), B: float = 1.0,
                 alpha: float = 0.9) -> SweepTable:
    """Welfare with all-licensed and all-open shared bandwidth against ``N``."""
    rows = [[float(W), N, symmetric_sw(N, B, W, 0.0, alpha), symmetric_sw(N, B, W, 1.0, alpha)]
            for W in Ws for N in range(1, N_max + 1)]
    return SweepTable(["W", "N", "sw_beta0", "sw_beta1"], rows)


def _symmetric_config(N: int, B: float, W: float, beta: float, alpha: float) -> MarketConfig:
    return MarketConfig.symmetric(N, B, W, beta, alpha)


def job_price_latency(points: int = 101, Ns: Sequence[int] = (2, 200), B: float = 1.0,
                      W: float = 1.0, alpha: float = 1.0) -> SweepTable:
    """Average price, surplus and welfare against average latency as the
    open fraction ``beta`` runs from 0 to 1."""
    rows = []
    for N in Ns:
        for beta in np.linspace(0.0, 1.0, points):
            cfg = _symmetric_config(N, B, W, beta, alpha)
            eq = n_symmetric_equilibrium(N, B, W, beta, alpha)
            alloc = Allocation(np.full(N, eq.x_bar), np.full(N, eq.w_bar))
            rep = welfare_report(cfg, alloc)
            rows.append([N, beta, rep.avg_latency, rep.avg_price, rep.consumer_surplus,
                         rep.social_welfare, eq.p, eq.p_w])
    return SweepTable(["N", "beta", "avg_latency", "avg_price", "cs", "sw", "p", "p_w"], rows)


def job_sw_W(points: int = 200, B: float = 1.0, alpha: float = 0.9, N: int = 100_000,
             W_range=(0.0, 10.0)) -> SweepTable:
    """Welfare against the shared bandwidth for many SPs, plus the limit curves."""
    rows = []
    for W in np.linspace(*W_range, points):
        eq1 = n_symmetric_equilibrium(N, B, W, 1.0, alpha)
        sw1 = symmetric_surplus(eq1, B, W, 1.0, alpha)
        cs1 = 0.5 * eq1.total_served ** 2
        rows.append([W, symmetric_sw(N, B, W, 0.0, alpha), sw1, cs1, sw1 - cs1,
                     sw_beta(B, W, alpha, 0.0), sw_beta(B, W, alpha, 1.0)])
    return SweepTable(["W", "sw_beta0", "sw_beta1", "cs_beta1", "revenue_beta1",
                       "sw_limit_beta0", "sw_limit_beta1"], rows)


def asym_w1_config(N: int, frac: float, B1: float, B2: float, W: float,
                   alpha: float) -> MarketConfig:
    """``N`` SPs in two equal groups; group 1 shares ``B1`` and ``frac * W``."""
    if N % 2:
        raise DomainError(f"N must be even to form two equal groups, got {N}")
    h = N // 2
    props = [B1 / h] * h + [B2 / h] * h
    lic = [frac * W / h] * h + [(1 - frac) * W / h] * h
    return MarketConfig.from_bandwidths(props, lic, availability=alpha)


def job_asym_W1(points: int = 101, Ns: Sequence[int] = (2, 60),
                alphas: Sequence[float] = (0.1, 0.3, 0.5, 0.7, 0.9), B1: float = 0.9,
                B2: float = 0.1, W: float = 2.0, seed: int = 0) -> SweepTable:
    """Consumer surplus against the share of ``W`` licensed to the larger group."""
    rows = []
    for N in Ns:
        for a in alphas:
            for frac in np.linspace(0.0, 1.0, points):
                cfg = asym_w1_config(N, frac, B1, B2, W, a)
                alloc, _ = solve_point(cfg, seed)
                rows.append([N, a, frac, 0.5 * alloc.total_served ** 2])
    return SweepTable(["N", "alpha", "W1_frac", "cs"], rows)


def _fig2_thresholds() -> dict:
    B2, W, alpha = 1.0, 10.0, 0.9
    c = 1.0 - alpha
    closed = 2 * W + 2 * B2 + 2 + 4 * c * W / B2
    return {"vacate_threshold_closed_form": closed,
            "vacate_threshold_numeric": numeric_vacate_threshold(B2, W, alpha, 2.0, 40.0)}


def job_auction() -> SweepTable:
    return auction_compare().table()


@dataclass(frozen=True)
class FigureJob:
    name: str
    description: str
    parameters: dict
    build: Callable[..., SweepTable]
    extras: Optional[Callable[[], dict]] = None

    def run(self, **overrides) -> SweepTable:
        return self.build(**overrides)


def figure_jobs() -> dict:
    """Registry of the named figure jobs."""
    jobs = [
        FigureJob("fig_T", "equivalent bandwidth vs availability at fixed alpha*W",
                  {"panels": [{"B": 0.1, "alpha_W": 1.0}, {"B": 1.0, "alpha_W": 0.1}]},
                  job_fig_T),
        FigureJob("fig_prices_quantities", "duopoly quantities and prices vs B1",
                  {"B2": 1.0, "W": 10.0, "alpha": 0.9, "beta": 1.0, "B1_range": [2.0, 40.0]},
                  job_fig_prices_quantities, _fig2_thresholds),
        FigureJob("fig_SW_B", "scheme welfare vs B1",
                  {"B2": 1.0, "W": 1.0, "alpha": 0.9, "B1_range": [1.0, 10.0]}, job_fig_SW_B),
        FigureJob("fig_SW_W", "scheme welfare vs W",
                  {"B1": 7.0, "B2": 1.0, "alpha": 0.9, "W_range": [0.05, 20.0]}, job_fig_SW_W),
        FigureJob("fig_SW_N", "welfare vs number of SPs for beta in {0, 1}",
                  {"B": 1.0, "alpha": 0.9, "W": [1.0, 2.0, 5.0], "N_max": 20}, job_fig_SW_N),
        FigureJob("price_latency", "price, surplus and welfare vs latency, beta from 0 to 1",
                  {"B": 1.0, "W": 1.0, "alpha": 1.0, "N": [2, 200]}, job_price_latency),
        FigureJob("sw_W", "welfare vs shared bandwidth for many SPs",
                  {"B": 1.0, "alpha": 0.9, "N": 100_000, "W_range": [0.0, 10.0]}, job_sw_W),
        FigureJob("asym_W1", "consumer surplus vs share of W licensed to the larger SP",
                  {"B1": 0.9, "B2": 0.1, "W": 2.0, "beta": 0.0, "N": [2, 60],
                   "alpha": [0.1, 0.3, 0.5, 0.7, 0.9]}, job_asym_W1),
        FigureJob("auction", "ascending auction vs open access",
                  {"B1": 1.0, "B2": 1.0, "W": 1.0, "alpha": [0.1, 0.5, 0.9]}, job_auction),
    ]
    return {j.name: j for j in jobs}


def run_figure(name: str, out_dir, seed: int = 0) -> tuple:
    """Run a registered job and write its CSV and manifest."""
    jobs = figure_jobs()
    if name not in jobs:
        raise KeyError(f"unknown job {name!r}; available: {', '.join(sorted(jobs))}")
    job = jobs[name]
    table = job.run()
    params = dict(job.parameters)
    if job.extras is not None:
        params.update(job.extras())
    return write_outputs(table, out_dir, name, params, seed)

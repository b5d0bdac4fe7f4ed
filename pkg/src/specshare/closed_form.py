"""Analytic equilibria, thresholds and limits.

Every function here is a direct evaluation of an algebraic expression or a
tiny linear system; the numerical solver in :mod:`specshare.equilibrium_solver`
is used by the tests as an independent check.

Conventions: in the symmetric formulas ``B`` is the *total* proprietary
bandwidth shared equally by the SPs, and ``W`` is the whole intermittent
band of which a fraction ``beta`` is open access. SP indices are 0-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .exceptions import DomainError, InfeasibleError, SingularSystemError

COND_LIMIT = 1e12
BOUNDARY_TOL = 1e-12


def _solve_small(A, b, what: str) -> np.ndarray:
    """Solve a tiny dense system, refusing ill-conditioned matrices."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularSystemError(f"{what}: matrix is singular or ill-conditioned (cond={cond:.3g})")
    return np.linalg.solve(A, b)


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not value > 0 or not math.isfinite(value):
        raise DomainError(f"{name} must be a finite value > 0, got {value}")
    return value


def _unit(name: str, value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise DomainError(f"{name} out of range: expected a value in [0, 1], got {value}")
    return value


def _nonneg(name: str, value: float) -> float:
    value = float(value)
    if not value >= 0 or not math.isfinite(value):
        raise DomainError(f"{name} must be a finite value >= 0, got {value}")
    return value


@dataclass(frozen=True)
class DuopolyLicensedEq:
    """Equilibrium of two SPs with always-available (equivalent) bandwidths."""

    x_star: tuple
    p_star: tuple
    revenues: tuple


@dataclass(frozen=True)
class SymmetricEq:
    """Symmetric equilibrium summarised by aggregate quantities.

    ``n_sps`` is ``math.inf`` for the many-SP limit, in which case only the
    totals are meaningful and the per-SP values are reported as 0.
    """

    n_sps: float
    x_total: float
    w_total: float
    p: float
    p_w: float

    @property
    def x_bar(self) -> float:
        return 0.0 if math.isinf(self.n_sps) else self.x_total / self.n_sps

    @property
    def w_bar(self) -> float:
        return 0.0 if math.isinf(self.n_sps) else self.w_total / self.n_sps

    @property
    def total_served(self) -> float:
        return self.x_total + self.w_total


@dataclass(frozen=True)
class VacateReport:
    """Outcome of a vacate test.

    Attributes:
        vacating_sps: SPs that carry no open-access traffic at equilibrium.
        threshold_value: slack of the governing inequality (>= 0 means vacate).
        condition_id: which inequality was evaluated.
        boundary: True when the slack is zero to rounding.
        slacks: per-SP slacks, ``nan`` for SPs the condition says nothing about.
    """

    vacating_sps: frozenset
    threshold_value: float
    condition_id: str
    boundary: bool = False
    slacks: tuple = field(default=())


class AsymLimit(NamedTuple):
    x1: float
    w1: float
    x2: float
    w2: float


def duopoly_licensed_equilibrium(T1: float, T2: float) -> DuopolyLicensedEq:
    """Unique equilibrium of two SPs holding only always-available bandwidth.

    Args:
        T1: equivalent bandwidth of SP 0.
        T2: equivalent bandwidth of SP 1.
    """
    T1, T2 = _positive("T1", T1), _positive("T2", T2)
    D = 3 * T1 * T2 + 4 + 4 * (T1 + T2)
    x = ((T1 * T2 + 2 * T1) / D, (T1 * T2 + 2 * T2) / D)
    p = ((T1 * T2 + 2 * T1 + T2 + 2) / D, (T1 * T2 + 2 * T2 + T1 + 2) / D)
    return DuopolyLicensedEq(x, p, (p[0] * x[0], p[1] * x[1]))


def _ab(T2: float) -> tuple:
    return (4 * T2 + 4) / (T2 + 2), (3 * T2 + 4) / (T2 + 2)


def duopoly_revenue_derivatives(T1: float, T2: float) -> tuple:
    """Sensitivities of SP 0's equilibrium revenue.

    Returns:
        ``(dR1/dT1, d2R1/dT1^2, dR1/dT2)``. The cross derivative has no tidy
        closed form and is taken by central difference.
    """
    T1, T2 = _positive("T1", T1), _positive("T2", T2)
    a, b = _ab(T2)
    den = b * T1 + a
    d1 = ((2 * a - b) * T1 + a) / den**3
    d2 = (-2 * b * (2 * a - b) * T1 - 2 * a * (2 * b - a)) / den**4
    h = max(1e-6, 1e-6 * T2)
    lo = max(T2 - h, 0.5 * T2)
    hi = T2 + h
    cross = (duopoly_licensed_equilibrium(T1, hi).revenues[0]
             - duopoly_licensed_equilibrium(T1, lo).revenues[0]) / (hi - lo)
    return d1, d2, cross


def _symmetric_duopoly_system(B, W, alpha, beta):
    c = 1.0 - alpha
    lic = B + (1.0 - beta) * W
    common = 3 + 4 * c / B
    A = [[common + 4 * alpha / lic, common],
         [common, common + 3 * alpha / (beta * W)]]
    return A


def symmetric_duopoly_open(B: float, W: float, alpha: float, beta: float = 1.0) -> SymmetricEq:
    """Two identical SPs with ``B/2`` proprietary bandwidth each.

    A fraction ``beta`` of ``W`` is open access; the rest is split equally as
    licensed shared bandwidth.

    Raises:
        DomainError: ``B <= 0`` or no open band (``beta * W == 0``).
    """
    B = _positive("B", B)
    W = _nonneg("W", W)
    alpha, beta = _unit("alpha", alpha), _unit("beta", beta)
    if beta * W <= 0:
        raise DomainError("open band is empty (beta * W == 0); use the licensed-only formulas")
    c = 1.0 - alpha
    lic = B + (1.0 - beta) * W
    if alpha == 0.0:
        # Both bands spill onto B: only the total per-SP load is pinned down.
        y = 1.0 / (3 + 4 * c / B)
        x, w = y, 0.0
    elif beta == 1.0:
        D = 9 * B**2 + 12 * B * W + 12 * B + 16 * c * W
        x, w = 3 * B**2 / D, 4 * B * W / D
    else:
        x, w = _solve_small(_symmetric_duopoly_system(B, W, alpha, beta), [1.0, 1.0],
                            "symmetric duopoly")
    rho = 2 * (x + w)
    p = 1 - rho - 2 * alpha * x / lic - c * rho / B
    p_w = 1 - rho - 2 * alpha * w / (beta * W) - c * rho / B
    return SymmetricEq(2, 2 * x, 2 * w, p, p_w)


def n_symmetric_equilibrium(N: int, B: float, W: float, beta: float, alpha: float,
                            d: float = 1.0) -> SymmetricEq:
    """Equilibrium of ``N`` identical SPs sharing total proprietary bandwidth ``B``.

    The open band ``beta * W`` is seen by users as ``d * beta * W``.
    """
    if isinstance(N, bool) or int(N) != N or N < 1:
        raise DomainError(f"N must be an integer >= 1, got {N}")
    N = int(N)
    B = _positive("B", B)
    W = _nonneg("W", W)
    beta, alpha = _unit("beta", beta), _unit("alpha", alpha)
    if not 0.0 < d <= 1.0:
        raise DomainError(f"degradation out of range: expected (0, 1], got {d}")
    c = 1.0 - alpha
    lic = B + (1.0 - beta) * W
    O = d * beta * W
    r = N / (N + 1.0)
    D = (B * (1 + N) / N + 2 * c) * (2 * O * r + lic) + 2 * alpha * B
    if alpha == 0.0 or O == 0.0:
        X = B * lic / D if O == 0.0 else B / (B * (1 + N) / N + 2 * c)
        Wt = 0.0
    else:
        X = B * lic / D
        Wt = 2 * O * B * r / D
    rho = X + Wt
    p = 1 - rho - alpha * X / lic - c * rho / B
    p_w = 1 - rho - (alpha * Wt / O if O > 0 else 0.0) - c * rho / B
    return SymmetricEq(N, X, Wt, p, p_w)


def n_symmetric_limit(B: float, W: float, beta: float, alpha: float) -> SymmetricEq:
    """Aggregate equilibrium as the number of identical SPs grows without bound."""
    B = _positive("B", B)
    W = _nonneg("W", W)
    beta, alpha = _unit("beta", beta), _unit("alpha", alpha)
    c = 1.0 - alpha
    span = B + W * (1 + beta)
    E = (B + 2 * c) * span + 2 * B * alpha
    if alpha == 0.0:
        x, w = B / (B + 2 * c), 0.0
    else:
        x = (B + (1 - beta) * W) * B / E
        w = 2 * beta * W * B / E
    p, p_w = (c * span + B * alpha) / E, c * span / E
    if beta * W == 0:
        # No open band: report the notional price net of spill latency only.
        rho = x + w
        p_w = 1 - rho - c * rho / B
    return SymmetricEq(math.inf, x, w, p, p_w)


def degraded_optimal_beta(N: int, d: float) -> Optional[int]:
    """Consumer-surplus maximising open fraction under degraded sharing.

    Returns:
        1 when full open access is best, 0 when full licensing is best, and
        ``None`` when both give the same surplus.
    """
    if N < 2:
        raise DomainError(f"N must be >= 2, got {N}")
    if not 0.0 < d <= 1.0:
        raise DomainError(f"degradation out of range: expected (0, 1], got {d}")
    threshold = (N + 1) / (2.0 * N) if not math.isinf(N) else 0.5
    if d > threshold:
        return 1
    if d < threshold:
        return 0
    return None


def _vacate_slack(B_i, W_i, B_j, W_j, open_bw, alpha) -> float:
    c = 1.0 - alpha
    shared_j = open_bw + W_j
    lhs = B_i + W_i + 2 * c * W_i / B_i
    rhs = 2 * shared_j + 2 * B_j + 2 + 4 * c * shared_j / B_j
    return lhs - rhs


def _is_boundary(slack: float, scale: float) -> bool:
    return abs(slack) <= BOUNDARY_TOL * max(1.0, scale)


def duopoly_vacate_condition(B1: float, B2: float, W1: float, W2: float,
                             open_bw: float, alpha: float) -> VacateReport:
    """Whether one of two SPs stays off the open-access band.

    The slack for SP ``i`` against SP ``j`` is
    ``B_i + W_i + 2(1-a)W_i/B_i - [2(O+W_j) + 2B_j + 2 + 4(1-a)(O+W_j)/B_j]``.
    ``threshold_value`` is SP 0's slack; both directions are reported in
    ``slacks`` and an SP with nonnegative slack is listed as vacating.
    """
    B1, B2 = _positive("B1", B1), _positive("B2", B2)
    W1, W2 = _nonneg("W1", W1), _nonneg("W2", W2)
    open_bw, alpha = _nonneg("open_bw", open_bw), _unit("alpha", alpha)
    s1 = _vacate_slack(B1, W1, B2, W2, open_bw, alpha)
    s2 = _vacate_slack(B2, W2, B1, W1, open_bw, alpha)
    vac = frozenset(i for i, s in enumerate((s1, s2)) if s >= 0)
    return VacateReport(vac, s1, "duopoly", _is_boundary(s1, B1), (s1, s2))


def n_provider_vacate_condition(B: Sequence[float], W_lic: Sequence[float],
                                open_bw: float, alpha: float) -> VacateReport:
    """Whether SPs ``0..N-2`` all leave the open band to the last SP.

    Each of the first ``N-1`` SPs is tested against SP ``N-1`` with the
    two-SP inequality. The claim is all-or-nothing: the vacating set is
    either every tested SP or empty, decided by the smallest slack.
    """
    if len(B) < 2:
        raise DomainError("B: need at least two SPs")
    if len(W_lic) != len(B):
        raise DomainError("W_lic: length must match B")
    Bs = [_positive(f"B[{i}]", b) for i, b in enumerate(B)]
    Ws = [_nonneg(f"W_lic[{i}]", w) for i, w in enumerate(W_lic)]
    open_bw, alpha = _nonneg("open_bw", open_bw), _unit("alpha", alpha)
    last = len(Bs) - 1
    slacks = tuple(_vacate_slack(Bs[i], Ws[i], Bs[last], Ws[last], open_bw, alpha)
                   for i in range(last)) + (math.nan,)
    worst = min(slacks[:last])
    vac = frozenset(range(last)) if worst >= 0 else frozenset()
    cid = "duopoly" if last == 1 else "n_provider"
    return VacateReport(vac, worst, cid, _is_boundary(worst, max(Bs)), slacks)


def asym_limit_one_large(B1: float, W1: float, B2: float, W2: float,
                         open_bw: float, alpha: float) -> AsymLimit:
    """Limit aggregates for one large SP facing many small identical SPs.

    The small SPs share ``B2`` and ``W2`` equally. Returned quantities are the
    large SP's ``(x1, w1)`` and the small group's totals ``(x2, w2)``.
    """
    B1, B2 = _positive("B1", B1), _positive("B2", B2)
    W1, W2 = _nonneg("W1", W1), _nonneg("W2", W2)
    O, alpha = _positive("open_bw", open_bw), _unit("alpha", alpha)
    c = 1.0 - alpha
    k1 = 1 + alpha / (B1 + W1) + c / B1
    m1 = 1 + c / B1
    k2 = 1 + 2 * alpha / (B2 + W2) + 2 * c / B2
    m2 = 1 + 2 * c / B2
    q = alpha / O
    lhs = B1 + W1 + 2 * c * W1 / B1
    rhs = 2 * c * (2 * O + W2) / B2
    if lhs > rhs:
        A = [[2 * k1, 1, 1],
             [1, k2, m2],
             [1, m2, m2 + q]]
        x1, x2, w2 = _solve_small(A, [1, 1, 1], "large SP vacating system")
        return AsymLimit(x1, 0.0, x2, w2)
    A = [[2 * k1, 2 * m1, 1, 1],
         [2 * m1, 2 * (m1 + q), 1, 1 + q],
         [1, 1, k2, m2],
         [1, 1 + q, m2, m2 + q]]
    x1, w1, x2, w2 = _solve_small(A, [1, 1, 1, 1], "large SP interior system")
    # At equality of the condition the interior solution lands on w1 = 0.
    if -1e-12 < w1 < 0:
        w1 = 0.0
    return AsymLimit(x1, w1, x2, w2)


def _group_rows(Bj, Wj, alpha, q):
    c = 1.0 - alpha
    kx = 1 + 2 * c / Bj + 2 * alpha / (Bj + Wj)
    m = 1 + 2 * c / Bj
    return kx, m, m + q


def asym_limit_two_groups(B1: float, W1: float, B2: float, W2: float,
                          open_bw: float, alpha: float) -> AsymLimit:
    """Limit aggregates for two large groups of identical SPs.

    Group ``j`` holds total proprietary bandwidth ``B_j`` and licensed shared
    bandwidth ``W_j``. When a group's open-access total would be negative it
    is pinned to zero and the remaining three conditions are re-solved.

    Raises:
        InfeasibleError: if both groups would vacate, or the pinned solution
            fails its sign check.
    """
    Bs = (_positive("B1", B1), _positive("B2", B2))
    Ws = (_nonneg("W1", W1), _nonneg("W2", W2))
    O, alpha = _positive("open_bw", open_bw), _unit("alpha", alpha)
    q = alpha / O
    (kx1, m1, mw1), (kx2, m2, mw2) = (_group_rows(Bs[j], Ws[j], alpha, q) for j in (0, 1))
    # unknowns ordered (x1, w1, x2, w2)
    rows = [
        [kx1, m1, 1, 1],
        [m1, mw1, 1, 1 + q],
        [1, 1, kx2, m2],
        [1, 1 + q, m2, mw2],
    ]
    sol = _solve_small(rows, [1, 1, 1, 1], "two-group interior system")
    negative = [j for j in (0, 1) if sol[2 * j + 1] < 0]
    if not negative:
        return AsymLimit(*sol)
    if len(negative) == 2:
        raise InfeasibleError("both groups would vacate the open band; no boundary solution")
    i = negative[0]
    keep = [r for r in range(4) if r != 2 * i + 1]
    A = np.array(rows)[np.ix_(keep, keep)]
    sub = _solve_small(A, [1, 1, 1], "two-group boundary system")
    full = np.zeros(4)
    full[keep] = sub
    o = 1 - i
    m_i = (m1, m2)[i]
    gap = full[2 * i] * m_i + full[2 * o] + full[2 * o + 1] * (1 + q) - 1
    if gap < -1e-12 or np.any(full < -1e-12):
        raise InfeasibleError(
            f"pinned solution for group {i + 1} fails its sign check (gap={gap:.3g})")
    return AsymLimit(*np.maximum(full, 0.0))

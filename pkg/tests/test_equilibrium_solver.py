import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import minimize

from specshare import (Allocation, ConvergenceError, Curve, DemandModel, DomainError,
                       LatencyModel, MarketConfig, SolverOptions, UnsupportedModelError,
                       best_response, general_best_response, kkt_verify,
                       marginal_allocation_rule, marginal_bandwidth_shift,
                       n_provider_vacate_condition, potential_value, revenues,
                       solve_equilibrium, solve_general_equilibrium, symmetric_duopoly_open)

ONE = SolverOptions(restarts=1)


def bandwidth(hi):
    return st.one_of(st.just(0.0), st.floats(0.01, hi))


@st.composite
def configs(draw, max_n=5):
    n = draw(st.integers(1, max_n))
    a = draw(st.floats(0.05, 1))
    B = draw(st.lists(st.floats(0.1, 5), min_size=n, max_size=n))
    Wl = draw(st.lists(bandwidth(3), min_size=n, max_size=n))
    O = draw(bandwidth(5))
    d = draw(st.floats(0.2, 1))
    return MarketConfig.from_bandwidths(B, Wl, open_access_bw=O, availability=a, degradation=d,
                                        demand_intercept=draw(st.floats(0.5, 2)),
                                        demand_slope=draw(st.floats(0.5, 2)))


def brute_best_response(cfg, i, others):
    """Maximise SP i's revenue numerically over the nonnegative quadrant."""
    x, w = others.licensed_qty.copy(), others.open_qty.copy()

    def neg(v):
        x[i], w[i] = v
        return -revenues(cfg, Allocation(x, w))[i]

    bounds = [(0, None), (0, None if cfg.open_access_bw > 0 else 0)]
    best = None
    for start in ([0.1, 0.0], [0.0, 0.1], [0.2, 0.2]):
        if cfg.open_access_bw == 0:
            start[1] = 0.0
        r = minimize(neg, start, bounds=bounds, method="L-BFGS-B",
                     options={"ftol": 1e-15, "gtol": 1e-12})
        if best is None or r.fun < best.fun:
            best = r
    return best


def brute_equilibrium(cfg):
    """Maximise the potential with a generic bound-constrained optimiser."""
    n = cfg.n_sps
    bounds = [(0, None)] * n + [(0, None if cfg.open_access_bw > 0 else 0)] * n
    r = minimize(lambda v: -potential_value(cfg, Allocation.from_vector(v)),
                 np.full(2 * n, 0.05), bounds=bounds, method="L-BFGS-B",
                 options={"ftol": 1e-16, "gtol": 1e-12, "maxiter": 10_000})
    return Allocation.from_vector(np.maximum(r.x, 0))


class TestPotential:
    def test_zero(self):
        cfg = MarketConfig.from_bandwidths([1.0, 2.0], open_access_bw=1.0)
        assert potential_value(cfg, Allocation.zeros(2)) == 0.0

    def test_monopoly_value(self):
        # One SP, B = 1: Phi(x) = x - x^2 - x^2 = 0.25 - 0.125 at x = 0.25.
        cfg = MarketConfig.from_bandwidths([1.0])
        assert potential_value(cfg, Allocation([0.25], [0.0])) == pytest.approx(0.125, abs=1e-15)

    @given(configs(), st.data())
    def test_deviation_identity(self, cfg, data):
        n = cfg.n_sps
        rng = np.random.default_rng(data.draw(st.integers(0, 10**6)))
        ws = 0.3 if cfg.open_access_bw > 0 else 0.0
        x, w = rng.uniform(0, 0.3, n), rng.uniform(0, ws, n)
        i = int(rng.integers(n))
        x2, w2 = x.copy(), w.copy()
        x2[i], w2[i] = rng.uniform(0, 0.3), rng.uniform(0, ws)
        a1, a2 = Allocation(x, w), Allocation(x2, w2)
        dphi = potential_value(cfg, a2) - potential_value(cfg, a1)
        du = revenues(cfg, a2)[i] - revenues(cfg, a1)[i]
        assert abs(dphi - du) <= 1e-12

    def test_nonlinear_demand_rejected(self):
        cfg = MarketConfig.from_bandwidths([1.0])
        dem = DemandModel(Curve(lambda y: 1 - y * y, lambda y: -2 * y, lambda y: -2.0))
        with pytest.raises(UnsupportedModelError):
            potential_value(cfg, Allocation.zeros(1), demand=dem)

    def test_size_mismatch(self):
        with pytest.raises(DomainError):
            potential_value(MarketConfig.from_bandwidths([1.0]), Allocation.zeros(2))


class TestBestResponse:
    def test_market_already_full(self):
        cfg = MarketConfig.from_bandwidths([1.0, 1.0])
        assert best_response(cfg, 0, Allocation([0.0, 1.0], [0, 0])) == (0.0, 0.0)

    def test_duopoly_fixed_point(self):
        cfg = MarketConfig.from_bandwidths([1.0, 1.0])
        assert best_response(cfg, 0, Allocation([0.0, 0.2], [0, 0])) == pytest.approx((0.2, 0.0))

    def test_open_duopoly_fixed_point(self):
        eq = symmetric_duopoly_open(2.0, 1.0, 0.9)
        cfg = MarketConfig.symmetric(2, 2.0, 1.0, 1.0, 0.9)
        br = best_response(cfg, 1, Allocation([eq.x_bar] * 2, [eq.w_bar] * 2))
        assert br == pytest.approx((eq.x_bar, eq.w_bar), abs=1e-14)

    @given(configs(max_n=3), st.data())
    def test_matches_numerical_maximisation(self, cfg, data):
        n = cfg.n_sps
        rng = np.random.default_rng(data.draw(st.integers(0, 10**6)))
        ws = 0.2 if cfg.open_access_bw > 0 else 0.0
        others = Allocation(rng.uniform(0, 0.2, n), rng.uniform(0, ws, n))
        i = int(rng.integers(n))
        x, w = best_response(cfg, i, others)
        xs, wsv = others.licensed_qty.copy(), others.open_qty.copy()
        xs[i], wsv[i] = x, w
        ours = revenues(cfg, Allocation(xs, wsv))[i]
        brute = brute_best_response(cfg, i, others)
        assert ours >= -brute.fun - 1e-10

    def test_bad_index(self):
        with pytest.raises(DomainError):
            best_response(MarketConfig.from_bandwidths([1.0]), 3, Allocation.zeros(1))


class TestSolver:
    def test_licensed_duopoly(self):
        res = solve_equilibrium(MarketConfig.from_bandwidths([1.0, 1.0]))
        np.testing.assert_allclose(res.allocation.licensed_qty, 0.2, atol=1e-12)
        assert res.kkt.passed and res.unique and res.vacating_sps == frozenset()

    def test_open_duopoly(self):
        res = solve_equilibrium(MarketConfig.symmetric(2, 2.0, 1.0, 1.0, 0.9))
        np.testing.assert_allclose(res.allocation.licensed_qty, 0.140187, atol=1e-6)
        np.testing.assert_allclose(res.allocation.open_qty, 0.093458, atol=1e-6)
        np.testing.assert_allclose(res.revenues, 0.085597, atol=1e-6)

    def test_three_sps_with_two_vacating(self):
        cfg = MarketConfig.from_bandwidths([30, 30, 1], open_access_bw=1.0)
        res = solve_equilibrium(cfg)
        assert res.vacating_sps == {0, 1}
        np.testing.assert_allclose(res.allocation.as_vector(),
                                   brute_equilibrium(cfg).as_vector(), atol=1e-6)
        assert res.vacating_sps == n_provider_vacate_condition([30, 30, 1], [0, 0, 0], 1.0, 1.0).vacating_sps

    @given(configs())
    def test_kkt_and_prices(self, cfg):
        res = solve_equilibrium(cfg, SolverOptions(restarts=2))
        assert res.kkt.passed
        assert np.all(res.prices.licensed_prices[res.allocation.licensed_qty > 0] >= -1e-9)
        assert np.all(res.prices.open_prices[res.allocation.open_qty > 0] >= -1e-9)
        assert res.kkt.congestion_ordering

    @given(configs(max_n=3))
    def test_matches_generic_optimiser(self, cfg):
        res = solve_equilibrium(cfg, ONE)
        ref = brute_equilibrium(cfg)
        assert potential_value(cfg, ref) <= res.potential + 1e-12
        np.testing.assert_allclose(res.allocation.as_vector(), ref.as_vector(), atol=1e-4)

    @given(configs(max_n=3))
    def test_maximises_potential(self, cfg):
        res = solve_equilibrium(cfg, ONE)
        v0 = res.allocation.as_vector()
        n = cfg.n_sps
        rng = np.random.default_rng(0)
        for _ in range(20):
            v = np.maximum(v0 + rng.normal(0, 0.01, v0.size), 0)
            if cfg.open_access_bw == 0:
                v[n:] = 0
            assert potential_value(cfg, Allocation.from_vector(v)) <= res.potential + 1e-13

    @given(st.integers(1, 8), st.floats(0.1, 5), st.floats(0, 5), st.floats(0, 1),
           st.floats(0.05, 1))
    def test_symmetric_config_symmetric_equilibrium(self, N, B, W, beta, a):
        al = solve_equilibrium(MarketConfig.symmetric(N, B, W, beta, a), ONE).allocation
        assert np.ptp(al.licensed_qty) <= 1e-9 and np.ptp(al.open_qty) <= 1e-9

    @given(configs(max_n=4))
    def test_best_response_sweeps_raise_potential(self, cfg):
        n = cfg.n_sps
        x, w = np.full(n, 0.05), np.full(n, 0.05 if cfg.open_access_bw > 0 else 0.0)
        last = potential_value(cfg, Allocation(x, w))
        for _ in range(5):
            for i in range(n):
                x[i], w[i] = best_response(cfg, i, Allocation(x, w))
                cur = potential_value(cfg, Allocation(x, w))
                assert cur >= last - 1e-14
                last = cur

    def test_zero_availability_convention(self):
        res = solve_equilibrium(MarketConfig.from_bandwidths([1.0, 1.0], open_access_bw=1.0,
                                                             availability=0.0))
        np.testing.assert_array_equal(res.allocation.open_qty, 0.0)

    def test_convergence_error(self):
        cfg = MarketConfig.from_bandwidths([1.0, 3.0, 0.5], [0.2, 0, 1], open_access_bw=1.0,
                                           availability=0.7)
        with pytest.raises(ConvergenceError):
            solve_equilibrium(cfg, SolverOptions(max_iterations=1, restarts=1))

    def test_reproducible(self):
        cfg = MarketConfig.from_bandwidths([1.0, 3.0], [0.2, 0], open_access_bw=1.0, availability=0.7)
        a = solve_equilibrium(cfg, SolverOptions(seed=4)).allocation.as_vector()
        b = solve_equilibrium(cfg, SolverOptions(seed=4)).allocation.as_vector()
        np.testing.assert_array_equal(a, b)

    @pytest.mark.parametrize("kw", [{"tolerance": 0}, {"restarts": 0}, {"max_iterations": 0}])
    def test_bad_options(self, kw):
        with pytest.raises(DomainError):
            SolverOptions(**kw)


class TestKkt:
    def test_perturbation_detected(self):
        cfg = MarketConfig.from_bandwidths([1.0, 1.0])
        rep = kkt_verify(cfg, Allocation([0.201, 0.2], [0, 0]))
        assert not rep.passed
        # Gradient of the potential moves by the diagonal of Q (2 + 2/T = 4) per unit.
        assert rep.max_stationarity_violation == pytest.approx(4e-3, rel=1e-6)

    def test_vacated_band_has_nonpositive_gradient(self):
        cfg = MarketConfig.from_bandwidths([30, 30, 1], open_access_bw=1.0)
        res = solve_equilibrium(cfg)
        assert res.kkt.active_set[0] == (False, True)
        assert res.kkt.max_complementarity_violation <= 1e-9


class TestGeneral:
    def test_linear_matches_potential_solver(self):
        cfg = MarketConfig.from_bandwidths([1.0, 2.0], [0.5, 0.0], open_access_bw=1.0,
                                           availability=0.8)
        al = solve_general_equilibrium(cfg, DemandModel.linear(), LatencyModel.linear(cfg))
        ref = solve_equilibrium(cfg).allocation
        np.testing.assert_allclose(al.as_vector(), ref.as_vector(), atol=1e-9)

    def test_quadratic_demand_symmetric_duopoly(self):
        # P = 1 - y^2, latency x / B with B = 1: x solves 1 - 4x^2 - x - 2x^2... derive via FOC.
        cfg = MarketConfig.from_bandwidths([1.0, 1.0])
        dem = DemandModel(Curve(lambda y: 1 - y * y, lambda y: -2 * y, lambda y: -2.0), y_max=1.0)
        al = solve_general_equilibrium(cfg, dem, LatencyModel.linear(cfg))
        x = al.licensed_qty[0]
        # FOC: P(2x) + x P'(2x) - 2x = 0 -> 1 - 4x^2 - 4x^2 - 2x = 0
        assert 1 - 8 * x * x - 2 * x == pytest.approx(0.0, abs=1e-10)
        assert al.licensed_qty[1] == pytest.approx(x, abs=1e-10)

    def test_quadratic_latency_best_response(self):
        cfg = MarketConfig.from_bandwidths([1.0])
        lat = LatencyModel.shaped([1.0], [Curve.power(1.0, 2)])
        x, w = general_best_response(cfg, DemandModel.linear(), lat, 0, Allocation.zeros(1))
        # Monopoly: 1 - 2x - 3x^2 = 0.
        assert x == pytest.approx(1 / 3, abs=1e-12) and w == 0.0

    def test_demand_shape_checked(self):
        with pytest.raises(DomainError):
            DemandModel(Curve(lambda y: 1 + y, lambda y: 1.0, lambda y: 0.0))

    def test_latency_shape_checked(self):
        with pytest.raises(DomainError):
            LatencyModel.shaped([1.0], [Curve(lambda t: -t, lambda t: -1.0, lambda t: 0.0)])


class TestMarginal:
    @pytest.mark.parametrize("k", [0, 1])
    def test_signs_linear(self, k):
        cfg = MarketConfig.from_bandwidths([1.0, 2.5])
        s = marginal_bandwidth_shift(cfg, k, 1e-3)
        assert s.dx_k > 0 and s.dx_minus_k < 0 and s.dCS > 0
        assert s.dR_k > 0 and s.dR_minus_k < 0 and 0 < s.cascade_ratio < 1

    def test_symmetric_gain_equal(self):
        cfg = MarketConfig.from_bandwidths([1.5, 1.5])
        assert marginal_bandwidth_shift(cfg, 0, 1e-3).dCS == pytest.approx(
            marginal_bandwidth_shift(cfg, 1, 1e-3).dCS, rel=1e-9)

    @pytest.mark.parametrize("shapes", [None, (Curve.power(1.0, 2), Curve.power(2.0, 1.5))])
    def test_against_finite_difference(self, shapes):
        B = np.array([1.0, 2.0])
        dB = 1e-5
        cfg = MarketConfig.from_bandwidths(B)
        dem = DemandModel.linear()
        sh = shapes or (Curve.linear(1.0), Curve.linear(1.0))

        def eq(Bv):
            c = MarketConfig.from_bandwidths(Bv)
            return solve_general_equilibrium(c, dem, LatencyModel.shaped(Bv, sh), tol=1e-14).licensed_qty

        x0, x1 = eq(B), eq(B + np.array([dB, 0.0]))
        s = marginal_bandwidth_shift(cfg, 0, dB, shapes=shapes)
        assert s.dx_k == pytest.approx(x1[0] - x0[0], rel=1e-3)
        assert s.dx_minus_k == pytest.approx(x1[1] - x0[1], rel=1e-3)
        z0, z1 = x0.sum(), x1.sum()
        assert s.dCS == pytest.approx(0.5 * (z1**2 - z0**2), rel=1e-3)

    def test_rejects_shared_band(self):
        with pytest.raises(DomainError):
            marginal_bandwidth_shift(MarketConfig.from_bandwidths([1, 1], open_access_bw=1), 0, 1e-3)

    def test_rule_examples(self):
        assert marginal_allocation_rule(1.0, 1.0, 1.0, 1.0) is None
        assert marginal_allocation_rule(1.0, 3.0, 1.0, 1.0) == 0
        assert marginal_allocation_rule(3.0, 1.0, 1.0, 1.0) == 1

    def test_rule_rejects_bad_input(self):
        with pytest.raises(DomainError):
            marginal_allocation_rule(0.0, 1.0, 1.0, 1.0)

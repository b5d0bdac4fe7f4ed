import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from specshare import (Allocation, DomainError, MarketConfig, SolverOptions, consumer_surplus,
                       large_w_limits, n_symmetric_equilibrium, n_symmetric_limit,
                       solve_equilibrium, sw_beta, symmetric_surplus, welfare_report)


class TestConsumerSurplus:
    @pytest.mark.parametrize("z,slope,out", [(0.0, 1.0, 0.0), (0.4, 1.0, 0.08), (0.5, 2.0, 0.25)])
    def test_examples(self, z, slope, out):
        assert consumer_surplus(z, slope) == pytest.approx(out, abs=1e-15)

    @given(st.floats(0, 2), st.floats(0.1, 3))
    def test_is_area_under_demand(self, z, slope):
        area, _ = quad(lambda y: (1 - slope * y) - (1 - slope * z), 0, z)
        assert consumer_surplus(z, slope) == pytest.approx(area, abs=1e-12)

    def test_rejects_negative(self):
        with pytest.raises(DomainError):
            consumer_surplus(-0.1)


class TestWelfareReport:
    def test_zero_allocation(self):
        cfg = MarketConfig.from_bandwidths([1.0, 1.0], open_access_bw=1.0)
        rep = welfare_report(cfg, Allocation.zeros(2))
        assert rep.social_welfare == 0.0 and rep.avg_price == 0.0 and rep.avg_latency == 0.0

    def test_licensed_duopoly(self):
        cfg = MarketConfig.from_bandwidths([1.0, 1.0])
        rep = welfare_report(cfg, solve_equilibrium(cfg))
        assert rep.consumer_surplus == pytest.approx(0.08, abs=1e-12)
        assert rep.total_revenue == pytest.approx(0.16, abs=1e-12)
        assert rep.social_welfare == pytest.approx(0.24, abs=1e-12)
        assert rep.avg_price == pytest.approx(0.4, abs=1e-12)
        assert rep.avg_latency == pytest.approx(0.2, abs=1e-12)

    @given(st.floats(0.1, 5), st.floats(0.1, 5), st.floats(0.01, 3), st.floats(0.05, 1))
    def test_welfare_is_value_minus_latency(self, B1, B2, O, a):
        cfg = MarketConfig.from_bandwidths([B1, B2], open_access_bw=O, availability=a)
        res = solve_equilibrium(cfg, SolverOptions(restarts=1))
        rep = welfare_report(cfg, res)
        z = rep.total_served
        # Gross user value minus total expected latency cost.
        assert rep.social_welfare == pytest.approx(z - 0.5 * z * z - rep.avg_latency * z, abs=1e-12)
        assert rep.avg_price * z == pytest.approx(rep.total_revenue, abs=1e-12)

    def test_as_dict_keys(self):
        cfg = MarketConfig.from_bandwidths([1.0])
        d = welfare_report(cfg, Allocation([0.25], [0.0])).as_dict()
        assert set(d) >= {"consumer_surplus", "revenue_total", "social_welfare", "avg_price",
                          "avg_latency"}


class TestSymmetric:
    @given(st.floats(0.1, 5), st.floats(0, 5), st.floats(0.01, 1))
    def test_sw_beta_matches_limit_equilibrium(self, B, W, a):
        for beta in (0.0, 0.3, 1.0):
            lim = n_symmetric_limit(B, W, beta, a)
            if beta * W == 0 and beta > 0:
                continue
            assert sw_beta(B, W, a, beta) == pytest.approx(symmetric_surplus(lim, B, W, beta, a),
                                                           abs=1e-12)

    @given(st.floats(0.1, 5), st.floats(0.01, 5), st.floats(0.01, 1))
    def test_sw_beta_quasiconvex(self, B, W, a):
        vals = np.array([sw_beta(B, W, a, b) for b in np.linspace(0, 1, 41)])
        k = int(np.argmin(vals))
        assert np.all(np.diff(vals[: k + 1]) <= 1e-15) and np.all(np.diff(vals[k:]) >= -1e-15)

    @given(st.floats(0.1, 5), st.floats(0.01, 5), st.floats(0.01, 1))
    def test_limit_served_increases_with_beta(self, B, W, a):
        served = [n_symmetric_limit(B, W, b, a).total_served for b in np.linspace(0, 1, 21)]
        assert np.all(np.diff(served) >= -1e-15)

    def test_sw_beta_domain(self):
        with pytest.raises(DomainError):
            sw_beta(0.0, 1.0, 0.5, 0.5)
        with pytest.raises(DomainError):
            sw_beta(1.0, 1.0, 0.5, 1.5)


class TestLargeW:
    def test_example(self):
        lim = large_w_limits(2, 1.0, 1.0)
        assert lim.rho == pytest.approx(2 / 3)
        assert lim.sw == pytest.approx(2 / 3 - 2 / 9)
        assert lim.rho_bar == 1.0 and lim.aggregate_profit_limit == 0.0

    def test_profit_maximising_alpha(self):
        assert large_w_limits(math.inf, 1.0, 0.5).profit_maximizing_alpha == pytest.approx(0.5)
        assert large_w_limits(math.inf, 3.0, 0.5).profit_maximizing_alpha == 0.0

    @given(st.integers(1, 1000), st.floats(0.1, 5), st.floats(0.01, 1))
    def test_matches_huge_shared_band(self, N, B, a):
        lim = large_w_limits(N, B, a)
        for beta in (0.0, 1.0):
            eq = n_symmetric_equilibrium(N, B, 1e6, beta, a)
            assert eq.total_served == pytest.approx(lim.rho, abs=1e-4)
            assert symmetric_surplus(eq, B, 1e6, beta, a) == pytest.approx(lim.sw, abs=1e-4)

    @given(st.floats(0.1, 5), st.floats(0.01, 1))
    def test_many_sp_limit(self, B, a):
        lim = large_w_limits(math.inf, B, a)
        assert lim.rho == pytest.approx(lim.rho_bar)
        eq = n_symmetric_limit(B, 1e7, 1.0, a)
        profit = eq.p * eq.x_total + eq.p_w * eq.w_total
        assert profit == pytest.approx(lim.aggregate_profit_limit, abs=1e-5)

"""Equilibria of a Cournot game among service providers sharing
intermittently available spectrum."""

from .closed_form import (AsymLimit, DuopolyLicensedEq, SymmetricEq, VacateReport,
                          asym_limit_one_large, asym_limit_two_groups, degraded_optimal_beta,
                          duopoly_licensed_equilibrium, duopoly_revenue_derivatives,
                          duopoly_vacate_condition, n_provider_vacate_condition,
                          n_symmetric_equilibrium, n_symmetric_limit, symmetric_duopoly_open)
from .equilibrium_solver import (EquilibriumResult, KktReport, MarginalShift, SolverOptions,
                                 best_response, general_best_response, kkt_verify,
                                 marginal_allocation_rule, marginal_bandwidth_shift,
                                 potential_value, solve_equilibrium, solve_general_equilibrium)
from .estimator import CournotEquilibrium
from .exceptions import (ConvergenceError, DisagreementError, DomainError, InfeasibleError,
                         SingularSystemError, SpecShareError, UnsupportedModelError)
from .experiments import (AuctionScenario, DerivedAxis, SweepSpec, SweepTable, auction_compare,
                          figure_jobs, numeric_vacate_threshold, run_figure, run_sweep,
                          scheme_split_equalize, scheme_welfare)
from .market_model import (Allocation, MarketConfig, PriceSchedule, SpectrumEndowment,
                           band_prices, equivalent_bandwidth, expected_latencies, pool_subbands,
                           revenues, split_pooled_traffic)
from .models import Curve, DemandModel, LatencyModel
from .welfare import (WelfareReport, consumer_surplus, large_w_limits, sw_beta,
                      symmetric_surplus, welfare_report)

__version__ = "0.1.0"

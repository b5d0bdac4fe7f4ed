"""Scikit-learn style wrapper around the equilibrium solver."""

from __future__ import annotations

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .equilibrium_solver import SolverOptions, solve_equilibrium
from .validation import check_config
from .welfare import welfare_report


class CournotEquilibrium(BaseEstimator):
    """Fit computes the equilibrium of one market config.

    Hyperparameters mirror :class:`SolverOptions`. After ``fit`` the
    estimator exposes ``allocation_``, ``prices_``, ``revenues_``, ``kkt_``,
    ``welfare_``, ``n_iter_`` and ``residual_``.

    Example:
        >>> est = CournotEquilibrium(restarts=2).fit(MarketConfig.from_bandwidths([1, 1]))
        >>> est.allocation_.licensed_qty
        array([0.2, 0.2])
    """

    def __init__(self, tolerance=1e-10, max_iterations=100_000, restarts=8, seed=0,
                 kkt_tolerance=1e-9):
        self.tolerance = tolerance
        self.max_iterations = max_iterations
        self.restarts = restarts
        self.seed = seed
        self.kkt_tolerance = kkt_tolerance

    def fit(self, X, y=None):
        """Solve the game described by ``X`` (config, config dict or TOML path)."""
        config = check_config(X)
        opts = SolverOptions(self.tolerance, self.max_iterations, self.restarts, self.seed,
                             self.kkt_tolerance)
        res = solve_equilibrium(config, opts)
        self.config_ = config
        self.result_ = res
        self.allocation_ = res.allocation
        self.prices_ = res.prices
        self.revenues_ = res.revenues
        self.kkt_ = res.kkt
        self.welfare_ = welfare_report(config, res)
        self.n_iter_ = res.iterations
        self.residual_ = res.residual
        return self

    def score(self, X=None, y=None) -> float:
        """Social welfare of the fitted equilibrium."""
        check_is_fitted(self, "welfare_")
        return self.welfare_.social_welfare

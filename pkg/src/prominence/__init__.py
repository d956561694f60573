"""Equilibrium prices, demand and welfare in search markets with platform prominence."""
from .distributions import PiecewiseLinearCdf, TiltedExponential, Uniform, ValueDistribution
from .errors import DomainError, NumericalError, UnsupportedError
from .search import MarketConfig, compute_cbar, index, simulate_search, solve_theta0, winner_via_kappa

__version__ = "0.1.0"

"""Profit-maximizing contract menus for QoS-differentiated sensing services.

The library designs menus {q(delta), p(delta)} a service provider posts for
users whose taste for quality (the type delta) is private, subject to
incentive compatibility, participation, and a pinned mean QoS.
"""

from .benchmark import BenchmarkSolution, information_cost, solve_full_info
from .contracts import (ContractMenu, ModelParams, Provenance,
                        VerificationReport, cost, envelope_prices, make_grid,
                        phi, sp_utility, user_payoff, verify)
from .distributions import (DistKind, DomainError, FitError, NumericError,
                            RegularityReport, TypeDistribution,
                            fit_exponential, load_distribution,
                            load_histogram_csv)
from .ironing import (IronedSolution, check_full_pooling,
                      interval_certificates, solve_general, weighted_pav)
from .marketsim import (SimConfig, SimOutcome, TieBreak, compare_scenarios,
                        simulate)
from .oracle import (ConvergenceError, DiscreteInstance, DiscreteSolution,
                     adversarial_probe, discretize, menu_profit_on_instance,
                     solve_discrete)
from .regular import (InfeasibleError, RegularSolution, closed_form_exponential,
                      closed_form_uniform, solve_beta, solve_regular)
from .report import vr_metrics, vr_slopes, write_report

__version__ = "0.1.0"

__all__ = [
    "BenchmarkSolution", "ContractMenu", "ConvergenceError", "DiscreteInstance",
    "DiscreteSolution", "DistKind", "DomainError", "FitError",
    "InfeasibleError", "IronedSolution", "ModelParams", "NumericError",
    "Provenance", "RegularityReport", "RegularSolution", "SimConfig",
    "SimOutcome", "TieBreak", "TypeDistribution", "VerificationReport",
    "adversarial_probe", "check_full_pooling", "closed_form_exponential",
    "closed_form_uniform", "compare_scenarios", "cost", "discretize",
    "envelope_prices", "fit_exponential", "information_cost",
    "interval_certificates", "load_distribution", "load_histogram_csv",
    "make_grid", "menu_profit_on_instance", "phi", "simulate", "solve_beta",
    "solve_discrete", "solve_full_info", "solve_general", "solve_regular",
    "sp_utility", "user_payoff", "verify", "vr_metrics", "vr_slopes",
    "weighted_pav", "write_report",
]

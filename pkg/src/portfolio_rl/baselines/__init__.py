from .metrics import MetricReport, annualized_sharpe, annualized_sortino, max_drawdown
from .policies import (
    MPTPolicy,
    Policy,
    UCRPPolicy,
    mpt_action,
    policy_for,
    project_simplex,
    ucrp_action,
)

__all__ = [
    "MPTPolicy",
    "MetricReport",
    "Policy",
    "UCRPPolicy",
    "annualized_sharpe",
    "annualized_sortino",
    "max_drawdown",
    "mpt_action",
    "policy_for",
    "project_simplex",
    "ucrp_action",
]

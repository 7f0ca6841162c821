"""
portfolio_rl - actor-critic portfolio optimisation over a cost-aware
integer-share market simulator.
"""

__version__ = "0.1.0"

"""
Baseline allocation rules: uniform constant rebalancing (UCRP) and
long-only maximum-Sharpe (MPT). Actions have the cash column first.
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Protocol

import numpy as np
from loguru import logger

if TYPE_CHECKING:
    from ..env import MarketEnv

MPT_LOOKBACK = 50
MPT_RIDGE = 1e-6
MPT_ITERATIONS = 500
MPT_STEP = 0.01


class Policy(Protocol):
    def __call__(self, observation: np.ndarray, day: int, env: "MarketEnv") -> np.ndarray: ...


def ucrp_action(m: int) -> np.ndarray:
    if m < 1:
        raise ValueError("ucrp_action needs at least one risky asset")
    return np.concatenate(([0.0], np.full(m, 1.0 / m)))


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto {w >= 0, sum w = 1}."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / k > 0)[0][-1]
    return np.maximum(v - css[rho] / (rho + 1), 0.0)


def _sharpe(w: np.ndarray, mu: np.ndarray, cov: np.ndarray) -> float:
    return float(w @ mu) / float(np.sqrt(w @ cov @ w))


def mpt_action(trailing_returns: np.ndarray, m: int) -> np.ndarray:
    """
    Max-Sharpe long-only weights over the m risky assets by projected gradient
    ascent from the uniform portfolio. Each step moves 0.01 along the
    normalised gradient; the best iterate is returned.
    """
    r = np.asarray(trailing_returns, dtype=np.float64)
    if r.ndim != 2 or r.shape[1] != m:
        raise ValueError(f"trailing returns must be (days, {m}), got {r.shape}")
    if r.shape[0] < m + 2:
        raise ValueError(f"need at least {m + 2} trailing days, got {r.shape[0]}")

    mu = r.mean(axis=0)
    if np.all(mu <= 0):
        return np.concatenate(([1.0], np.zeros(m)))
    cov = np.atleast_2d(np.cov(r, rowvar=False, ddof=1)) + MPT_RIDGE * np.eye(m)
    if not np.all(np.isfinite(cov)) or np.linalg.eigvalsh(cov).min() <= 0:
        logger.warning("[mpt] degenerate covariance, falling back to UCRP")
        return ucrp_action(m)

    w = np.full(m, 1.0 / m)
    best_w, best = w, _sharpe(w, mu, cov)
    for _ in range(MPT_ITERATIONS):
        var = float(w @ cov @ w)
        sd = np.sqrt(var)
        grad = mu / sd - float(w @ mu) * (cov @ w) / (var * sd)
        norm = np.linalg.norm(grad)
        if norm == 0.0:
            break
        w = project_simplex(w + MPT_STEP * grad / norm)
        s = _sharpe(w, mu, cov)
        if s > best:
            best_w, best = w, s
    return np.concatenate(([0.0], best_w))


class UCRPPolicy:
    def __call__(self, observation: np.ndarray, day: int, env: "MarketEnv") -> np.ndarray:
        return ucrp_action(env.num_assets - 1)


class MPTPolicy:
    """Re-solves max-Sharpe on the trailing daily log closes every day."""

    def __init__(self, lookback: int = MPT_LOOKBACK):
        self.lookback = lookback

    def __call__(self, observation: np.ndarray, day: int, env: "MarketEnv") -> np.ndarray:
        m = env.num_assets - 1
        first = max(0, day - self.lookback + 1)
        closes = env.dataset.features[first : day + 1, 3, 1:]
        if closes.shape[0] < m + 2:
            return ucrp_action(m)
        return mpt_action(closes, m)


def policy_for(token: str) -> Policy:
    """Baseline policy by CLI token (`ucrp` or `mpt`)."""
    table = {"ucrp": UCRPPolicy, "mpt": MPTPolicy}
    try:
        return table[token.lower()]()
    except KeyError:
        raise KeyError(f"unknown baseline policy '{token}'") from None

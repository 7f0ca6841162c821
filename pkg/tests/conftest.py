"""
Pytest configuration and shared fixtures for portfolio-rl-engine.

Provides the finite-difference gradient checker, tiny network configs and
small synthetic datasets.
"""

import asyncio
import sys
from typing import Callable, Mapping

import numpy as np
import pytest

from portfolio_rl.data import align_and_transform, synth_gbm
from portfolio_rl.nn import EncoderConfig
from portfolio_rl.tensor import Tensor, backward

# Set policy *before* pytest-asyncio creates any loops
if sys.platform.startswith("win"):
    asyncio.set_event_loop_policy(asyncio.WindowsSelectorEventLoopPolicy())

FD_STEP = 1e-5
FD_TOLERANCE = 1e-4
FD_ABSOLUTE = 1e-7


def relative_error(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(1e-8, abs(analytic) + abs(numeric))


def check_gradients(
    loss_fn: Callable[[], Tensor],
    leaves: Mapping[str, Tensor],
    *,
    max_elements: int | None = None,
    seed: int = 0,
) -> None:
    """
    Compare backward() against central differences for every (or a random
    sample of `max_elements`) element of every leaf.
    """
    for leaf in leaves.values():
        leaf.grad = None
    backward(loss_fn())
    analytic = {name: np.array(leaf.grad) for name, leaf in leaves.items()}

    rng = np.random.default_rng(seed)
    for name, leaf in leaves.items():
        flat = leaf.data.reshape(-1)
        positions = np.arange(flat.size)
        if max_elements is not None and flat.size > max_elements:
            positions = rng.choice(flat.size, size=max_elements, replace=False)
        for pos in positions:
            original = flat[pos]
            flat[pos] = original + FD_STEP
            up = loss_fn().item()
            flat[pos] = original - FD_STEP
            down = loss_fn().item()
            flat[pos] = original
            numeric = (up - down) / (2 * FD_STEP)
            got = analytic[name].reshape(-1)[pos]
            close = abs(got - numeric) < FD_ABSOLUTE
            assert close or relative_error(got, numeric) < FD_TOLERANCE, (
                f"{name}[{pos}]: analytic {got!r} vs numeric {numeric!r}"
            )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_encoder_config():
    """(L=3, H=2, D=8, 1 layer) instance used by gradient checks."""
    return EncoderConfig(window_len=3, num_assets=2, model_dim=8, heads=2, ffn_dim=8, layers=1)


@pytest.fixture
def small_dataset():
    """Two risky assets over 120 synthetic days."""
    series = synth_gbm(2, 121, drift=[0.0005, 0.001], volatility=[0.01, 0.02], seed=7)
    return align_and_transform(series)


@pytest.fixture
def flat_dataset():
    """Constant prices: every close is 100 and high == low == close."""
    series = synth_gbm(2, 81, drift=0.0, volatility=0.0, seed=0, intraday=0.0)
    return align_and_transform(series)

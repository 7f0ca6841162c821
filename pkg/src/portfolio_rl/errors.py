"""
Custom exceptions for the portfolio RL engine.

One hierarchy so the CLI can map failures to exit codes.
"""


class PortfolioRLError(Exception):
    """Base error for the engine."""

    pass


class ShapeError(PortfolioRLError, ValueError):
    """Operand shapes do not conform."""

    def __init__(self, op: str, *shapes: tuple[int, ...], detail: str = "") -> None:
        joined = " vs ".join(str(tuple(s)) for s in shapes)
        msg = f"{op}: shape mismatch {joined}"
        if detail:
            msg = f"{msg} ({detail})"
        super().__init__(msg)
        self.op = op
        self.shapes = shapes


class NonFiniteError(PortfolioRLError, ValueError):
    """Non-finite operand seen while checked mode is on."""

    pass


class GradientError(PortfolioRLError):
    """Backward called on a non-scalar root, or an optimizer found no grad."""

    pass


class DataValidationError(PortfolioRLError, ValueError):
    """Malformed or inconsistent market data."""

    pass


class DatasetTooShortError(PortfolioRLError):
    """Dataset does not cover the requested span."""

    pass


class EpisodeStateError(PortfolioRLError, RuntimeError):
    """Environment used outside an active episode."""

    pass


class RebalanceInfeasibleError(PortfolioRLError):
    """Costs exceed the portfolio even with every risky position closed."""

    pass


class ReplayEmptyError(PortfolioRLError):
    """Sampling requested from an empty replay buffer."""

    pass


class ConfigError(PortfolioRLError, ValueError):
    """Invalid configuration key or value."""

    def __init__(self, message: str, key: str | None = None) -> None:
        super().__init__(message)
        self.key = key


class CheckpointError(PortfolioRLError):
    """Checkpoint missing, truncated or shape-incompatible."""

    pass


class EmptyBatchError(PortfolioRLError, ValueError):
    """An update was asked to run on zero samples."""

    pass

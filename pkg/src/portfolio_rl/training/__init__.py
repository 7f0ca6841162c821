"""Asynchronous training loop, its configuration and greedy evaluation."""

from .config import TrainConfig, load_config, parse_config
from .evaluation import AgentPolicy, EvaluationReport, evaluate, load_agent, run_policy
from .trainer import Trainer, TrainingReport, train
from .worker import EpisodeResult, EpisodeWorker

__all__ = [
    "AgentPolicy",
    "EpisodeResult",
    "EpisodeWorker",
    "EvaluationReport",
    "TrainConfig",
    "Trainer",
    "TrainingReport",
    "evaluate",
    "load_agent",
    "load_config",
    "parse_config",
    "run_policy",
    "train",
]

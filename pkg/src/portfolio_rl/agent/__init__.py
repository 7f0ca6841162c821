"""Actor-critic agent trained with deterministic policy gradients."""

from .ddpg import (
    AgentHyperParams,
    DDPGAgent,
    act,
    act_explore,
    actor_update,
    critic_update,
    soft_update,
    td_target,
    td_targets,
)
from .networks import Actor, Critic
from .noise import OUNoise

__all__ = [
    "Actor",
    "AgentHyperParams",
    "Critic",
    "DDPGAgent",
    "OUNoise",
    "act",
    "act_explore",
    "actor_update",
    "critic_update",
    "soft_update",
    "td_target",
    "td_targets",
]

"""
Prometheus metrics for training and simulation.
"""

from __future__ import annotations

from prometheus_client import Counter, Gauge, Histogram

# Episode workers
EPISODES_COMPLETED = Counter(
    "prl_episodes_completed_total",
    "Exploration episodes finished",
    ["worker_id"],
)
EPISODE_REWARD = Gauge(
    "prl_episode_total_reward",
    "Total reward of the most recent episode",
    ["worker_id"],
)

# Learner
LEARNER_UPDATES = Counter(
    "prl_learner_updates_total",
    "Learner iterations (critic + actor + soft update)",
)
LEARNER_CRITIC_LOSS = Gauge(
    "prl_learner_critic_loss",
    "Critic TD loss of the last update",
)
LEARNER_ACTOR_OBJECTIVE = Gauge(
    "prl_learner_actor_objective",
    "Actor objective J of the last update",
)
LEARNER_UPDATE_LATENCY = Histogram(
    "prl_learner_update_latency_seconds",
    "Wall time of one learner iteration",
    buckets=(0.01, 0.05, 0.1, 0.25, 0.5, 1.0, 2.5, 5.0, 10.0, 30.0),
)

# Memories
REPLAY_SIZE = Gauge(
    "prl_replay_size",
    "Transitions held in the replay buffer",
)
HMEMORY_EPISODES = Gauge(
    "prl_hmemory_episodes",
    "Record-renewing episodes held in HMemory",
)

# Simulator
REBALANCE_SHRINKS = Counter(
    "prl_rebalance_shrinks_total",
    "Rebalances that had to scale target holdings down to stay cash-feasible",
)

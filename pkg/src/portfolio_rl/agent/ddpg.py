"""
Deterministic policy-gradient updates.

The free functions implement one rule each and take their networks and
optimizers explicitly; `DDPGAgent` bundles the four networks and two
optimizers and is what the trainer drives.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from loguru import logger

from ..errors import CheckpointError, EmptyBatchError, ShapeError
from ..memory import Transition
from ..nn import EncoderConfig, Module
from ..tensor import Adam, backward, load_arrays, no_grad, save_arrays
from .networks import Actor, Critic
from .noise import OUNoise

PARAM_GROUPS = ("actor", "critic", "target_actor", "target_critic")


@dataclass(frozen=True)
class AgentHyperParams:
    lr_actor: float = 1e-4
    lr_critic: float = 1e-4
    gamma: float = 0.9
    tau: float = 0.15
    micro_batch: int = 8


def _chunks(n: int, size: int) -> list[slice]:
    size = max(1, size)
    return [slice(i, min(i + size, n)) for i in range(0, n, size)]


def _stack_states(batch: Sequence[Transition], attr: str) -> np.ndarray:
    return np.stack([getattr(t, attr) for t in batch])


# -- acting -------------------------------------------------------------


def act(actor: Actor, state: np.ndarray) -> np.ndarray:
    """Greedy simplex action for one observation window."""
    with no_grad():
        return actor(state).numpy()


def act_explore(actor: Actor, state: np.ndarray, noise: OUNoise) -> np.ndarray:
    """Greedy action plus one OU step, clipped to [0, 1] and renormalised."""
    action = act(actor, state) + noise.sample()
    action = np.clip(action, 0.0, 1.0)
    total = action.sum()
    if total <= 0.0:
        return np.full(action.shape, 1.0 / action.size)
    return action / total


# -- targets and updates -----------------------------------------------


def td_targets(
    target_critic: Critic,
    target_actor: Actor,
    batch: Sequence[Transition],
    gamma: float,
    micro_batch: int = 8,
) -> np.ndarray:
    """G_i = r_i + (1 - terminal_i) * gamma * Q'(s'_i, mu'(s'_i)) for every transition."""
    if not batch:
        raise EmptyBatchError("td_targets: empty batch")
    rewards = np.array([t.reward for t in batch])
    live = np.array([0.0 if t.terminal else 1.0 for t in batch])
    bootstrap = np.zeros(len(batch))
    with no_grad():
        for sl in _chunks(len(batch), micro_batch):
            nxt = _stack_states(batch[sl], "next_state")
            bootstrap[sl] = target_critic(nxt, target_actor(nxt)).numpy()
    return rewards + live * gamma * bootstrap


def td_target(
    target_critic: Critic, target_actor: Actor, transition: Transition, gamma: float
) -> float:
    return float(td_targets(target_critic, target_actor, [transition], gamma)[0])


def critic_update(
    critic: Critic,
    batch: Sequence[Transition],
    targets: Sequence[float] | np.ndarray,
    optimizer: Adam,
    micro_batch: int = 8,
) -> float:
    """One Adam step on the mean squared TD error; returns the pre-step loss."""
    n = len(batch)
    if n == 0:
        raise EmptyBatchError("critic_update: empty batch")
    targets = np.asarray(targets, dtype=np.float64)
    if targets.shape != (n,):
        raise ShapeError("critic_update", (n,), targets.shape, detail="one target per transition")
    optimizer.zero_grad()
    loss = 0.0
    for sl in _chunks(n, micro_batch):
        chunk = batch[sl]
        q = critic(_stack_states(chunk, "state"), np.stack([t.action for t in chunk]))
        err = q - targets[sl]
        chunk_loss = (err * err).sum() * (1.0 / n)
        backward(chunk_loss)
        loss += chunk_loss.item()
    optimizer.step()
    return loss


def actor_update(
    actor: Actor,
    critic: Critic,
    states: np.ndarray | Sequence[np.ndarray],
    optimizer: Adam,
    micro_batch: int = 8,
) -> float:
    """Ascend J = mean Q(s, mu(s)) in the actor parameters only; returns J."""
    states = np.asarray(states, dtype=np.float64)
    n = 0 if states.ndim == 0 else states.shape[0]
    if n == 0:
        raise EmptyBatchError("actor_update: empty batch")
    optimizer.zero_grad()
    objective = 0.0
    with critic.frozen():
        for sl in _chunks(n, micro_batch):
            s = states[sl]
            chunk_j = critic(s, actor(s)).sum() * (1.0 / n)
            backward(-chunk_j)
            objective += chunk_j.item()
    optimizer.step()
    return objective


def soft_update(online: Module, target: Module, tau: float) -> None:
    """target <- tau * online + (1 - tau) * target, in place."""
    src, dst = online.named_parameters(), target.named_parameters()
    if src.keys() != dst.keys():
        raise ShapeError("soft_update", detail="parameter sets differ")
    for name, p in src.items():
        t = dst[name]
        if t.shape != p.shape:
            raise ShapeError("soft_update", p.shape, t.shape, detail=name)
        t.data[...] = tau * p.data + (1.0 - tau) * t.data


# -- agent ---------------------------------------------------------------


class DDPGAgent:
    def __init__(
        self,
        encoder: EncoderConfig,
        params: AgentHyperParams | None = None,
        seed: int | np.random.SeedSequence = 0,
    ):
        self.encoder = encoder
        self.params = params or AgentHyperParams()
        actor_rng, critic_rng = (np.random.default_rng(s) for s in _spawn(seed, 2))
        self.actor = Actor(encoder, actor_rng)
        self.critic = Critic(encoder, critic_rng)
        self.target_actor = self.actor.clone()
        self.target_critic = self.critic.clone()
        self.actor_opt = Adam(self.actor.named_parameters(), self.params.lr_actor)
        self.critic_opt = Adam(self.critic.named_parameters(), self.params.lr_critic)

    @property
    def num_assets(self) -> int:
        return self.encoder.num_assets

    def act(self, state: np.ndarray) -> np.ndarray:
        return act(self.actor, state)

    def act_explore(self, state: np.ndarray, noise: OUNoise) -> np.ndarray:
        return act_explore(self.actor, state, noise)

    def snapshot(self) -> Actor:
        """Independent copy of the online actor for exploration workers."""
        return self.actor.clone()

    def td_targets(self, batch: Sequence[Transition]) -> np.ndarray:
        return td_targets(
            self.target_critic, self.target_actor, batch, self.params.gamma, self.params.micro_batch
        )

    def update(self, batch: Sequence[Transition]) -> tuple[float, float]:
        """One learner iteration: critic step, actor step, soft update of both targets."""
        targets = self.td_targets(batch)
        loss = critic_update(self.critic, batch, targets, self.critic_opt, self.params.micro_batch)
        objective = actor_update(
            self.actor,
            self.critic,
            _stack_states(batch, "state"),
            self.actor_opt,
            self.params.micro_batch,
        )
        soft_update(self.actor, self.target_actor, self.params.tau)
        soft_update(self.critic, self.target_critic, self.params.tau)
        return loss, objective

    # -- persistence ---------------------------------------------------

    def state_arrays(self) -> dict[str, np.ndarray]:
        arrays: dict[str, np.ndarray] = {}
        for group in PARAM_GROUPS:
            for name, value in getattr(self, group).state_dict().items():
                arrays[f"{group}/{name}"] = value
        for group, opt in (("adam_actor", self.actor_opt), ("adam_critic", self.critic_opt)):
            for name, value in opt.state_dict().items():
                arrays[f"{group}/{name}"] = value
        return arrays

    def save(self, directory: str | Path) -> Path:
        path = save_arrays(directory, self.state_arrays())
        logger.info(f"[agent] checkpoint saved to {path}")
        return path

    def load_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        def group(prefix: str) -> dict[str, np.ndarray]:
            cut = len(prefix) + 1
            return {k[cut:]: v for k, v in arrays.items() if k.startswith(prefix + "/")}

        for name in PARAM_GROUPS:
            part = group(name)
            if not part:
                raise CheckpointError(f"checkpoint has no '{name}' parameters")
            getattr(self, name).load_state_dict(part)
        for name, opt in (("adam_actor", self.actor_opt), ("adam_critic", self.critic_opt)):
            part = group(name)
            if part:
                opt.load_state_dict(part)

    @classmethod
    def load(
        cls, directory: str | Path, encoder: EncoderConfig, params: AgentHyperParams | None = None
    ) -> "DDPGAgent":
        agent = cls(encoder, params)
        agent.load_arrays(load_arrays(directory))
        logger.info(f"[agent] checkpoint loaded from {directory}")
        return agent


def _spawn(seed: int | np.random.SeedSequence, n: int) -> list[np.random.SeedSequence]:
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return root.spawn(n)

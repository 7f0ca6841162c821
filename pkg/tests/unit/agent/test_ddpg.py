"""
Unit tests for acting, TD targets, the two update rules and persistence.
"""

from dataclasses import replace

import numpy as np
import pytest

from portfolio_rl.agent import (
    Actor,
    AgentHyperParams,
    Critic,
    DDPGAgent,
    OUNoise,
    act,
    act_explore,
    actor_update,
    critic_update,
    soft_update,
    td_target,
    td_targets,
)
from portfolio_rl.errors import CheckpointError, EmptyBatchError
from portfolio_rl.memory import Transition
from portfolio_rl.nn import EncoderConfig
from portfolio_rl.tensor import Adam, no_grad
from tests.conftest import check_gradients


def make_transition(rng, reward=0.0, terminal=False, assets=2):
    action = rng.random(assets)
    return Transition(
        state=rng.normal(size=(5, 3, assets)),
        action=action / action.sum(),
        reward=reward,
        next_state=rng.normal(size=(5, 3, assets)),
        terminal=terminal,
    )


def constant_critic(cfg, rng, value):
    critic = Critic(cfg, rng)
    critic.value.weight.data[...] = 0.0
    critic.value.bias.data[...] = value
    return critic


def test_actor_output_is_on_the_simplex(rng, tiny_encoder_config):
    actor = Actor(tiny_encoder_config, rng)
    for _ in range(5):
        w = act(actor, rng.normal(scale=3.0, size=(5, 3, 2)))
        assert w.shape == (2,)
        assert np.all(w >= 0)
        assert w.sum() == pytest.approx(1.0, abs=1e-12)


def test_zero_head_gives_uniform_weights(rng, tiny_encoder_config):
    actor = Actor(tiny_encoder_config, rng)
    actor.head.weight.data[...] = 0.0
    actor.head.bias.data[...] = 0.0
    assert np.allclose(act(actor, rng.normal(size=(5, 3, 2))), [0.5, 0.5], atol=1e-15)


def test_batched_actor_matches_single_states(rng, tiny_encoder_config):
    actor = Actor(tiny_encoder_config, rng)
    states = rng.normal(size=(3, 5, 3, 2))
    with no_grad():
        batch = actor(states).numpy()
    for i in range(3):
        assert np.allclose(batch[i], act(actor, states[i]), atol=1e-12)


def test_silent_noise_leaves_action_unchanged(rng, tiny_encoder_config):
    actor = Actor(tiny_encoder_config, rng)
    state = rng.normal(size=(5, 3, 2))
    noisy = act_explore(actor, state, OUNoise(2, sigma=0.0, rng=rng))
    assert np.allclose(noisy, act(actor, state), atol=1e-15)


def test_explored_action_stays_on_the_simplex(rng, tiny_encoder_config):
    actor = Actor(tiny_encoder_config, rng)
    noise = OUNoise(2, sigma=2.0, rng=rng)
    for _ in range(20):
        a = act_explore(actor, rng.normal(size=(5, 3, 2)), noise)
        assert np.all(a >= 0)
        assert a.sum() == pytest.approx(1.0)


def test_td_target_terminal_is_reward(rng, tiny_encoder_config):
    critic = constant_critic(tiny_encoder_config, rng, 5.0)
    actor = Actor(tiny_encoder_config, rng)
    t = make_transition(rng, reward=0.25, terminal=True)
    assert td_target(critic, actor, t, gamma=0.9) == 0.25


def test_td_target_zero_gamma_is_reward(rng, tiny_encoder_config):
    critic = constant_critic(tiny_encoder_config, rng, 5.0)
    actor = Actor(tiny_encoder_config, rng)
    t = make_transition(rng, reward=-0.3)
    assert td_target(critic, actor, t, gamma=0.0) == pytest.approx(-0.3)


def test_td_target_bootstraps_from_target_critic(rng, tiny_encoder_config):
    critic = constant_critic(tiny_encoder_config, rng, 1.0)
    actor = Actor(tiny_encoder_config, rng)
    t = make_transition(rng, reward=0.1)
    assert td_target(critic, actor, t, gamma=0.9) == pytest.approx(1.0, abs=1e-12)


def test_critic_update_reports_pre_step_loss(rng, tiny_encoder_config):
    critic = Critic(tiny_encoder_config, rng)
    t = make_transition(rng)
    with no_grad():
        q = critic(t.state, t.action).item()
    opt = Adam(critic.named_parameters(), 1e-3)
    loss = critic_update(critic, [t], [q + 1.0], opt)
    assert loss == pytest.approx(1.0, abs=1e-10)
    with no_grad():
        assert critic(t.state, t.action).item() != q


def test_micro_batching_does_not_change_the_loss(rng, tiny_encoder_config):
    batch = [make_transition(rng) for _ in range(5)]
    targets = rng.normal(size=5)
    losses, grads = [], []
    for micro in (1, 2, 5):
        critic = Critic(tiny_encoder_config, np.random.default_rng(9))
        opt = Adam(critic.named_parameters(), 1e-3)
        losses.append(critic_update(critic, batch, targets, opt, micro_batch=micro))
        grads.append(critic.value.weight.grad.copy())
    assert losses[0] == pytest.approx(losses[1], rel=1e-12)
    assert losses[0] == pytest.approx(losses[2], rel=1e-12)
    assert np.allclose(grads[0], grads[2], atol=1e-12)


def test_actor_update_leaves_critic_untouched(rng, tiny_encoder_config):
    actor = Actor(tiny_encoder_config, rng)
    critic = Critic(tiny_encoder_config, rng)
    before_critic = critic.state_dict()
    before_actor = actor.state_dict()
    states = rng.normal(size=(4, 5, 3, 2))

    objective = actor_update(actor, critic, states, Adam(actor.named_parameters(), 1e-3))

    assert np.isfinite(objective)
    for name, value in critic.state_dict().items():
        assert np.array_equal(value, before_critic[name])
    assert all(p.grad is None for p in critic.parameters())
    assert all(p.requires_grad for p in critic.parameters())
    assert any(
        not np.array_equal(value, before_actor[name]) for name, value in actor.state_dict().items()
    )


def test_soft_update_extremes_and_formula(rng, tiny_encoder_config):
    online = Actor(tiny_encoder_config, rng)
    target = Actor(tiny_encoder_config, rng)
    before = target.state_dict()

    soft_update(online, target, 0.0)
    for name, value in target.state_dict().items():
        assert np.array_equal(value, before[name])

    soft_update(online, target, 0.15)
    src = online.state_dict()
    for name, value in target.state_dict().items():
        assert np.array_equal(value, 0.15 * src[name] + (1.0 - 0.15) * before[name])

    soft_update(online, target, 1.0)
    for name, value in target.state_dict().items():
        assert np.array_equal(value, src[name])


def test_targets_start_as_exact_copies(tiny_encoder_config):
    agent = DDPGAgent(tiny_encoder_config, seed=3)
    for online, target in ((agent.actor, agent.target_actor), (agent.critic, agent.target_critic)):
        tgt = target.state_dict()
        for name, value in online.state_dict().items():
            assert np.array_equal(value, tgt[name])
        assert all(a is not b for a, b in zip(online.parameters(), target.parameters()))


def test_same_seed_same_networks(tiny_encoder_config):
    a, b = DDPGAgent(tiny_encoder_config, seed=11), DDPGAgent(tiny_encoder_config, seed=11)
    for name, value in a.state_arrays().items():
        assert np.array_equal(value, b.state_arrays()[name])


def test_agent_update_moves_targets_softly(rng, tiny_encoder_config):
    agent = DDPGAgent(tiny_encoder_config, AgentHyperParams(lr_actor=1e-3, lr_critic=1e-3), seed=0)
    before = agent.target_critic.state_dict()
    loss, objective = agent.update([make_transition(rng, reward=0.5) for _ in range(4)])
    assert np.isfinite(loss) and np.isfinite(objective)
    online = agent.critic.state_dict()
    for name, value in agent.target_critic.state_dict().items():
        assert np.allclose(value, 0.15 * online[name] + 0.85 * before[name], atol=1e-12)


def test_save_and_load_round_trip(tmp_path, rng, tiny_encoder_config):
    params = AgentHyperParams(lr_actor=1e-3, lr_critic=1e-3)
    agent = DDPGAgent(tiny_encoder_config, params, seed=5)
    agent.update([make_transition(rng) for _ in range(3)])
    agent.save(tmp_path / "ckpt")

    restored = DDPGAgent.load(tmp_path / "ckpt", tiny_encoder_config, params)
    saved = agent.state_arrays()
    loaded = restored.state_arrays()
    assert saved.keys() == loaded.keys()
    for name, value in saved.items():
        assert np.array_equal(value, loaded[name]), name
    state = rng.normal(size=(5, 3, 2))
    assert np.array_equal(agent.act(state), restored.act(state))


def test_load_rejects_mismatched_architecture(tmp_path, tiny_encoder_config):
    DDPGAgent(tiny_encoder_config).save(tmp_path / "ckpt")
    wider = EncoderConfig(window_len=3, num_assets=2, model_dim=16, heads=2, ffn_dim=8, layers=1)
    with pytest.raises(CheckpointError):
        DDPGAgent.load(tmp_path / "ckpt", wider)


def test_empty_batches_are_rejected(rng, tiny_encoder_config):
    agent = DDPGAgent(tiny_encoder_config)
    with pytest.raises(EmptyBatchError):
        agent.update([])
    with pytest.raises(EmptyBatchError):
        critic_update(agent.critic, [], [], agent.critic_opt)
    with pytest.raises(EmptyBatchError):
        actor_update(agent.actor, agent.critic, np.zeros((0, 5, 3, 2)), agent.actor_opt)


# -- end-to-end gradients and isolation -----------------------------------


@pytest.fixture
def open_gate_config(tiny_encoder_config):
    """Gates partly open so every trunk parameter carries a visible gradient."""
    return replace(tiny_encoder_config, gate_bias=0.5)


def test_critic_loss_gradients_match_finite_differences(rng, open_gate_config):
    critic = Critic(open_gate_config, rng)
    batch = [make_transition(rng) for _ in range(3)]
    states = np.stack([t.state for t in batch]) * 0.5
    actions = np.stack([t.action for t in batch])
    targets = rng.normal(size=3)

    def loss():
        err = critic(states, actions) - targets
        return (err * err).mean()

    check_gradients(loss, critic.named_parameters(), max_elements=3, seed=5)


def test_actor_objective_gradients_match_finite_differences(rng, open_gate_config):
    actor = Actor(open_gate_config, rng)
    critic = Critic(open_gate_config, rng)
    states = rng.normal(scale=0.5, size=(3, 5, 3, 2))

    def objective():
        with critic.frozen():
            return critic(states, actor(states)).mean()

    check_gradients(objective, actor.named_parameters(), max_elements=3, seed=6)


def test_actor_is_unchanged_when_the_critic_ignores_the_action(rng, tiny_encoder_config):
    actor = Actor(tiny_encoder_config, rng)
    critic = Critic(tiny_encoder_config, rng)
    critic.action_proj.weight.data[...] = 0.0
    critic.action_proj.bias.data[...] = 0.0
    before = actor.state_dict()

    optimizer = Adam(actor.named_parameters(), 1e-2)
    actor_update(actor, critic, rng.normal(size=(4, 5, 3, 2)), optimizer)

    for name, value in actor.state_dict().items():
        assert np.array_equal(value, before[name]), name


def test_critic_update_never_touches_the_actor(rng, tiny_encoder_config):
    agent = DDPGAgent(tiny_encoder_config, AgentHyperParams(lr_critic=1e-2), seed=2)
    before = agent.actor.state_dict()
    batch = [make_transition(rng, reward=1.0) for _ in range(4)]
    targets = td_targets(agent.target_critic, agent.target_actor, batch, gamma=0.9)

    critic_update(agent.critic, batch, targets, agent.critic_opt)

    for name, value in agent.actor.state_dict().items():
        assert np.array_equal(value, before[name]), name
    assert all(p.grad is None for p in agent.actor.parameters())

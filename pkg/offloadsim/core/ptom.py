"""A single agent trained with proximal policy optimisation that sees the
global state and picks a server for every user directly.

It is played on an environment without the subgraph spread penalty, so its
reward is the negative cost each assignment adds.
"""
import logging
import os

import numpy as np

from . import nn
from .agents import Hyperparams
from .env import global_state, state_size, step
from .errors import raiseError


log = logging.getLogger(__name__)


def masked_softmax(logits, mask):
    """Softmax over the entries where :code:`mask` is set, zero elsewhere."""

    logits = np.where(mask, logits, -np.inf)
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.where(mask, np.exp(shifted), 0.)

    return e / e.sum(axis=-1, keepdims=True)


def entropy(p):
    """Entropy of each row of probabilities, :math:`0 \\log 0 = 0`."""
    logp = np.log(np.where(p > 0, p, 1.))
    return -np.sum(p * logp, axis=-1)


def clipped_surrogate(ratio, advantage, clip=0.2):
    """
    The clipped surrogate objective
    :math:`\\min(rA, \\mathrm{clip}(r, 1 - \\epsilon, 1 + \\epsilon)A)`.

    Returns
    -------
    objective: numpy.ndarray
        Per sample objective
    clipped_ratio: numpy.ndarray
        The ratio clipped to :math:`[1 - \\epsilon, 1 + \\epsilon]`
    active: numpy.ndarray
        Where the unclipped term is the minimum and gradients flow
    """

    ratio = np.asarray(ratio, dtype=float)
    advantage = np.asarray(advantage, dtype=float)

    clipped = np.clip(ratio, 1. - clip, 1. + clip)
    plain = ratio * advantage
    bounded = clipped * advantage

    return np.minimum(plain, bounded), clipped, plain <= bounded


def one_hot_action(k, n_servers):
    """The joint action under which only agent :code:`k` says yes."""
    joint = np.tile([0., 1.], (n_servers, 1))
    joint[k] = (1., 0.)

    return joint


class PtomPolicy(object):
    """A categorical policy over servers with a state value critic.

    :param state_dim: Length of the global state.
    :param n_servers: Number of servers to choose from.
    """

    def __init__(self, state_dim, n_servers, hp=None, seed=0):

        hp = Hyperparams() if hp is None else hp
        hidden = list(hp.hidden)

        self.hp = hp
        self.n_servers = n_servers
        self.episodes = 0

        self.actor = nn.Mlp([state_dim] + hidden + [n_servers], seed=seed)
        self.critic = nn.Mlp([state_dim] + hidden + [1], seed=seed + 1)

        # Start close to uniform
        self.actor.weights[-1] *= 0.01

        self.actor_opt = nn.OptimState.for_net(self.actor, lr=hp.lr)
        self.critic_opt = nn.OptimState.for_net(self.critic, lr=hp.lr)

    def __repr__(self):
        return "PtomPolicy({} servers, {} episodes)".format(self.n_servers, self.episodes)

    def probabilities(self, states, masks):
        return masked_softmax(self.actor(states), masks)


def make_policy(n_slots, n_servers, hp=None, seed=0):
    return PtomPolicy(state_size(n_slots, n_servers), n_servers, hp, seed)


def _rollout(state, policy, rng, greedy):

    states, masks, actions, logps, rewards = [], [], [], [], []

    while not state.finished:
        s = global_state(state)
        mask = state.remaining > 0
        p = policy.probabilities(s, mask)

        k = int(np.argmax(p)) if greedy else int(rng.choice(policy.n_servers, p=p))
        outcome = step(state, one_hot_action(k, policy.n_servers))

        states.append(s)
        masks.append(mask)
        actions.append(k)
        logps.append(np.log(p[k]))
        rewards.append(outcome.reward)

        state = outcome.state

    return state, (np.array(states), np.array(masks), np.array(actions),
                   np.array(logps), np.array(rewards))


def discounted_returns(rewards, gamma):

    returns = np.zeros(len(rewards))
    running = 0.

    for t in range(len(rewards) - 1, -1, -1):
        running = rewards[t] + gamma * running
        returns[t] = running

    return returns


def ptom_update(policy, states, masks, actions, old_logp, returns):
    """
    Several epochs of clipped surrogate ascent on one batch of experience,
    with the advantage taken against the critic's value before the update.

    Returns
    -------
    stats: dict
        :code:`critic_loss`, :code:`objective` and :code:`entropy` of the last
        epoch
    """

    hp = policy.hp
    n = len(actions)
    rows = np.arange(n)

    advantage = returns - policy.critic(states).reshape(n)
    if n > 1:
        advantage = (advantage - advantage.mean()) / (advantage.std() + 1e-8)

    stats = {}
    for _ in range(hp.ppo_epochs):

        logits, cache = policy.actor.forward(states)
        p = masked_softmax(logits, masks)
        logp = np.log(p[rows, actions])

        objective, _, active = clipped_surrogate(np.exp(logp - old_logp), advantage, hp.ppo_clip)
        h = entropy(p)

        # Gradient of -(objective + c * entropy) with respect to the logits
        d_logp = np.where(active, -advantage * np.exp(logp - old_logp), 0.) / n
        one_hot = np.zeros_like(p)
        one_hot[rows, actions] = 1.

        safe_log = np.log(np.where(p > 0, p, 1.))
        grad = d_logp[:, None] * (one_hot - p)
        grad += hp.entropy_coef * p * (safe_log + h[:, None]) / n

        grads, _ = policy.actor.backward(cache, grad)
        nn.adam_step(policy.actor, grads, policy.actor_opt)

        values, cache = policy.critic.forward(states)
        error = values.reshape(n) - returns
        grads, _ = policy.critic.backward(cache, (2. * error / n)[:, None])
        nn.adam_step(policy.critic, grads, policy.critic_opt)

        stats = {
            'critic_loss': float(np.mean(error ** 2)),
            'objective': float(np.mean(objective)),
            'entropy': float(np.mean(h)),
        }

    return stats


def ptom_episode(state, policy, mode, rng):
    """
    Play one episode from a freshly reset state, updating the policy at its
    end in :code:`train` mode.

    Returns the same :code:`(reward, decision, metrics)` triple as
    :py:func:`offloadsim.core.agents.run_episode`.
    """

    train = mode == 'train'
    state.penalty = False

    final, (states, masks, actions, logps, rewards) = _rollout(state, policy, rng, greedy=not train)

    metrics = {'critic_loss_mean': float('nan'), 'steps': len(actions), 'cost': -float(rewards.sum()),
               'penalty': 0.}

    if train and len(actions):
        returns = discounted_returns(rewards, policy.hp.gamma)
        stats = ptom_update(policy, states, masks, actions, logps, returns)
        metrics['critic_loss_mean'] = stats['critic_loss']
        policy.episodes += 1

    return float(rewards.sum()), final.decision, metrics


def ptom_train(policy, states, rng):
    """Train on every freshly reset state in :code:`states` in turn and
    return the per-episode rewards."""
    return [ptom_episode(state, policy, 'train', rng)[0] for state in states]


def ptom_offload(state, policy):
    """Offload every user to the policy's most likely server."""

    if policy.episodes == 0:
        raiseError("AG02.1")

    return ptom_episode(state, policy, 'eval', None)[1]


def save_policy(policy, directory):

    os.makedirs(directory, exist_ok=True)
    nn.save(policy.actor, os.path.join(directory, "ptom_actor.bin"))
    nn.save(policy.critic, os.path.join(directory, "ptom_critic.bin"))


def load_policy(directory, hp=None, episodes=1):
    """Read a policy written by :py:func:`save_policy`. It counts as trained
    for :code:`episodes` episodes."""

    actor = nn.load(os.path.join(directory, "ptom_actor.bin"))
    critic = nn.load(os.path.join(directory, "ptom_critic.bin"))

    policy = PtomPolicy(actor.dims[0], actor.dims[-1], hp)
    policy.actor, policy.critic = actor, critic
    policy.actor_opt = nn.OptimState.for_net(actor, lr=policy.hp.lr)
    policy.critic_opt = nn.OptimState.for_net(critic, lr=policy.hp.lr)
    policy.episodes = episodes

    return policy

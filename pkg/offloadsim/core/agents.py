"""Multi-agent deep deterministic policy gradient training of the offloading
agents.

Every agent owns an actor that only sees its own observation and a critic
that sees the global state together with every agent's action.
"""
import logging
import os
from dataclasses import dataclass

import numpy as np

from . import nn
from .env import global_state, observe, observation_size, state_size, step
from .errors import raiseError


log = logging.getLogger(__name__)

ACTION_DIM = 2


@dataclass
class Hyperparams(object):
    """Learning settings shared by the trainers."""

    lr: float = 3e-4
    gamma: float = 0.99
    tau: float = 0.01
    buffer_size: int = 100000
    batch_size: int = 256
    hidden: tuple = (64, 64, 64)
    epsilon: float = 0.1
    warmup: int = 0
    train_every: int = 1
    ppo_clip: float = 0.2
    ppo_epochs: int = 4
    entropy_coef: float = 0.01

    @property
    def warmup_size(self):
        """Transitions needed before the first update."""
        return max(self.warmup, self.batch_size)


class ReplayBuffer(object):
    """A ring buffer of transitions, the oldest are overwritten first.

    Storage grows in chunks as transitions arrive, up to the capacity.

    :param capacity: Maximum number of transitions held.
    :param state_dim: Length of the global state.
    :param obs_dim: Length of one agent's observation.
    :param n_agents: Number of agents.
    :param seed: Seeds the sampler.
    """

    CHUNK = 4096

    def __init__(self, capacity, state_dim, obs_dim, n_agents, seed=0):

        self.capacity = capacity
        self.state_dim = state_dim
        self.obs_dim = obs_dim
        self.n_agents = n_agents
        self.rng = np.random.default_rng(seed)

        self._next = 0
        self._size = 0
        self._allocate(min(capacity, self.CHUNK))

    def _allocate(self, rows):

        shapes = {
            'states': (self.state_dim,),
            'obs': (self.n_agents, self.obs_dim),
            'actions': (self.n_agents, ACTION_DIM),
            'rewards': (self.n_agents,),
            'next_states': (self.state_dim,),
            'next_obs': (self.n_agents, self.obs_dim),
            'dones': (self.n_agents,),
        }

        for name, shape in shapes.items():
            array = np.zeros((rows,) + shape)
            old = getattr(self, name, None)
            if old is not None:
                array[:len(old)] = old

            setattr(self, name, array)

    def __len__(self):
        return self._size

    def __repr__(self):
        return "ReplayBuffer: {}/{} transitions".format(self._size, self.capacity)

    def add(self, state, obs, actions, rewards, next_state, next_obs, dones):

        n = self._next
        if n >= len(self.states):
            self._allocate(min(self.capacity, 2 * len(self.states)))

        self.states[n] = state
        self.obs[n] = obs
        self.actions[n] = actions
        self.rewards[n] = rewards
        self.next_states[n] = next_state
        self.next_obs[n] = next_obs
        self.dones[n] = dones

        self._next = (n + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def sample(self, batch_size):
        """Draw :code:`batch_size` distinct transitions."""

        if batch_size > self._size:
            raiseError("AG01.1", size=self._size, batch=batch_size)

        idx = self.rng.choice(self._size, size=batch_size, replace=False)
        return Batch(self.states[idx], self.obs[idx], self.actions[idx], self.rewards[idx],
                     self.next_states[idx], self.next_obs[idx], self.dones[idx])


@dataclass
class Batch(object):

    states: np.ndarray
    obs: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_states: np.ndarray
    next_obs: np.ndarray
    dones: np.ndarray

    def __len__(self):
        return self.states.shape[0]


class MaddpgAgent(object):
    """The actor, critic and their targets for the agent of one server.

    :param index: The agent's server.
    :param obs_dim: Length of the agent's observation.
    :param state_dim: Length of the global state.
    :param n_agents: Number of agents, the critic sees all their actions.
    """

    def __init__(self, index, obs_dim, state_dim, n_agents, hp, seed=0):

        hidden = list(hp.hidden)

        self.index = index
        self.epsilon = hp.epsilon

        self.actor = nn.Mlp([obs_dim] + hidden + [ACTION_DIM], output=nn.SIGMOID, seed=seed)
        self.critic = nn.Mlp([state_dim + ACTION_DIM * n_agents] + hidden + [1], seed=seed + 1)

        self.actor_target = self.actor.copy()
        self.critic_target = self.critic.copy()

        self.actor_opt = nn.OptimState.for_net(self.actor, lr=hp.lr)
        self.critic_opt = nn.OptimState.for_net(self.critic, lr=hp.lr)

    def __repr__(self):
        return "MaddpgAgent({}, obs={}, critic={})".format(self.index, self.actor.dims[0], self.critic.dims[0])


class AgentSet(object):
    """One agent per server with their shared replay buffer.

    :param penalty: Whether the environment charges the subgraph spread
                    penalty to these agents.
    """

    def __init__(self, agents, buffer, hp, penalty=True):
        self.agents = agents
        self.buffer = buffer
        self.hp = hp
        self.penalty = penalty
        self.steps = 0

    def __len__(self):
        return len(self.agents)

    def __iter__(self):
        return iter(self.agents)

    def __getitem__(self, m):
        return self.agents[m]

    def __repr__(self):
        return "AgentSet: {} agents, {}".format(len(self), self.buffer)

    @property
    def state_dim(self):
        return self.buffer.state_dim

    @property
    def obs_dim(self):
        return self.buffer.obs_dim


def make_agents(n_slots, n_servers, hp=None, seed=0, penalty=True):
    """Build untrained agents sized for :code:`n_slots` users and
    :code:`n_servers` servers."""

    hp = Hyperparams() if hp is None else hp

    obs_dim = observation_size(n_slots, n_servers)
    s_dim = state_size(n_slots, n_servers)

    agents = [MaddpgAgent(m, obs_dim, s_dim, n_servers, hp, seed=seed + 2 * m)
              for m in range(n_servers)]
    buffer = ReplayBuffer(hp.buffer_size, s_dim, obs_dim, n_servers, seed=seed)

    return AgentSet(agents, buffer, hp, penalty=penalty)


def drl_only_variant(n_slots, n_servers, hp=None, seed=0):
    """The same agents trained without the subgraph spread penalty. Pair
    them with :py:meth:`Partition.single`."""
    return make_agents(n_slots, n_servers, hp, seed, penalty=False)


def select_action(agent, observation, explore, rng):
    """
    The agent's action :math:`(a_1, a_2) \\in [0, 1]^2`.

    When exploring, the actor's output is replaced by a uniform draw with
    probability :code:`agent.epsilon`.
    """

    action = agent.actor(observation)

    if explore and rng.random() < agent.epsilon:
        action = rng.uniform(0., 1., size=ACTION_DIM)

    return np.clip(action, 0., 1.)


def critic_targets(agents, batch, m, gamma):
    """
    :math:`y = r_m + (1 - done_m)\\,\\gamma\\,Q'_m(s', a')` with :math:`a'`
    taken from every agent's target actor.
    """

    n = len(batch)
    next_actions = np.concatenate([agent.actor_target(batch.next_obs[:, j])
                                   for j, agent in enumerate(agents)], axis=1)

    q_next = agents[m].critic_target(np.concatenate([batch.next_states, next_actions], axis=1))
    return batch.rewards[:, m] + (1. - batch.dones[:, m]) * gamma * q_next.reshape(n)


def _update_agent(agents, batch, m, gamma):

    agent = agents[m]
    n = len(batch)
    s_dim = batch.states.shape[1]

    y = critic_targets(agents, batch, m, gamma)

    # Critic: mean squared error against the targets
    joint = batch.actions.reshape(n, -1)
    q, cache = agent.critic.forward(np.concatenate([batch.states, joint], axis=1))
    error = q.reshape(n) - y
    critic_loss = float(np.mean(error ** 2))

    grads, _ = agent.critic.backward(cache, (2. * error / n)[:, None])
    nn.adam_step(agent.critic, grads, agent.critic_opt)

    # Actor: ascend the critic through this agent's action
    own, actor_cache = agent.actor.forward(batch.obs[:, m])
    joint = batch.actions.copy()
    joint[:, m] = own

    q, cache = agent.critic.forward(np.concatenate([batch.states, joint.reshape(n, -1)], axis=1))
    objective = float(np.mean(q))

    _, grad_in = agent.critic.backward(cache, np.full((n, 1), -1. / n))
    start = s_dim + ACTION_DIM * m
    grads, _ = agent.actor.backward(actor_cache, grad_in[:, start:start + ACTION_DIM])
    nn.adam_step(agent.actor, grads, agent.actor_opt)

    return critic_loss, objective


def train_step(agents, batch_size=None, gamma=None, tau=None):
    """
    Update every agent on its own minibatch, then move the targets.

    Returns
    -------
    stats: list
        :code:`(critic_loss, actor_objective)` per agent
    """

    hp = agents.hp
    batch_size = hp.batch_size if batch_size is None else batch_size
    gamma = hp.gamma if gamma is None else gamma
    tau = hp.tau if tau is None else tau

    stats = []
    for m in range(len(agents)):
        batch = agents.buffer.sample(batch_size)
        stats.append(_update_agent(agents, batch, m, gamma))

    for agent in agents:
        nn.soft_update(agent.actor_target, agent.actor, tau)
        nn.soft_update(agent.critic_target, agent.critic, tau)

    return stats


def run_episode(state, agents, mode, rng):
    """
    Play one episode from a freshly reset state.

    In :code:`train` mode actions explore, transitions are stored and the
    agents are updated every :code:`train_every` steps once the buffer holds
    enough transitions.

    Returns
    -------
    reward: float
        Sum over steps of the global reward
    decision: OffloadDecision
    metrics: dict
        :code:`critic_loss_mean` (NaN without updates), :code:`steps`,
        :code:`cost` and :code:`penalty` totals
    """

    train = mode == 'train'
    hp = agents.hp
    state.penalty = agents.penalty

    total = 0.
    cost = 0.
    penalty = 0.
    losses = []
    steps = 0

    obs = np.stack([observe(state, m) for m in range(len(agents))])
    s = global_state(state)

    while not state.finished:

        actions = np.stack([select_action(agent, obs[m], train, rng)
                            for m, agent in enumerate(agents)])
        outcome = step(state, actions)

        next_obs = np.stack([observe(outcome.state, m) for m in range(len(agents))])
        next_s = global_state(outcome.state)

        if train:
            dones = outcome.done | outcome.finished
            agents.buffer.add(s, obs, actions, outcome.rewards, next_s, next_obs, dones)
            agents.steps += 1

            if len(agents.buffer) >= hp.warmup_size and agents.steps % hp.train_every == 0:
                losses.extend(loss for loss, _ in train_step(agents))

        total += outcome.reward
        cost += outcome.cost.C
        penalty += outcome.penalty
        steps += 1

        state, obs, s = outcome.state, next_obs, next_s

    metrics = {
        'critic_loss_mean': float(np.mean(losses)) if losses else float('nan'),
        'steps': steps,
        'cost': cost,
        'penalty': penalty,
    }

    return total, state.decision, metrics


def save_agents(agents, directory):
    """Write every actor and critic under :code:`directory`."""

    os.makedirs(directory, exist_ok=True)

    for agent in agents:
        nn.save(agent.actor, os.path.join(directory, "actor_{}.bin".format(agent.index)))
        nn.save(agent.critic, os.path.join(directory, "critic_{}.bin".format(agent.index)))

    log.info("Saved %d agents to %s", len(agents), directory)


def checkpoint_exists(directory, n_agents):

    names = ["{}_{}.bin".format(kind, m) for m in range(n_agents) for kind in ('actor', 'critic')]
    return all(os.path.isfile(os.path.join(directory, name)) for name in names)


def load_agents(directory, n_slots, n_servers, hp=None, penalty=True):
    """Read agents written by :py:func:`save_agents`, targets start as
    copies of the loaded networks."""

    agents = make_agents(n_slots, n_servers, hp, penalty=penalty)

    for agent in agents:
        actor = nn.load(os.path.join(directory, "actor_{}.bin".format(agent.index)))
        critic = nn.load(os.path.join(directory, "critic_{}.bin".format(agent.index)))

        if actor.dims != agent.actor.dims:
            raiseError("NN02.1", a=actor.dims, b=agent.actor.dims)

        if critic.dims != agent.critic.dims:
            raiseError("NN02.1", a=critic.dims, b=agent.critic.dims)

        agent.actor, agent.critic = actor, critic
        agent.actor_target, agent.critic_target = actor.copy(), critic.copy()
        agent.actor_opt = nn.OptimState.for_net(actor, lr=agents.hp.lr)
        agent.critic_opt = nn.OptimState.for_net(critic, lr=agents.hp.lr)

    return agents

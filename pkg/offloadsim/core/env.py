"""The offloading game played by one agent per edge server.

Users are offloaded one at a time in ascending index order. At every step
each agent answers whether the current user should go to its server, the
answers are resolved into a single server and the winning agent is charged
the cost the assignment adds plus a penalty for spreading the user's
subgraph over several servers.
"""
import logging
from dataclasses import dataclass

import numpy as np

from .costs import OffloadDecision, check, distances, marginal_cost, uplink_rates, KB_PER_MB, KB_PER_GB
from .errors import raiseError


log = logging.getLogger(__name__)

MAX_TASK_KB = 1500.
USER_FEATURES = 4

RULE_MARGIN = 'margin'
RULE_MAX_A1 = 'max_a1'
RULE_FALLBACK = 'fallback'


def observation_size(n_slots, n_servers):
    """Length of every agent's observation."""
    return n_slots * (USER_FEATURES + n_servers) + 1 + 6


def state_size(n_slots, n_servers):
    """Length of the global state vector."""
    pairs = n_servers * (n_servers - 1) // 2
    return n_slots * (USER_FEATURES + n_servers) + n_servers + pairs + USER_FEATURES + 2 * n_servers


def default_zeta(scenario, layout, rates=None):
    """Half the mean cost of sending every active user to its nearest
    server, ignoring transfers."""

    active = layout.active
    if len(active) == 0:
        return 0.

    c = scenario.constants
    rates = uplink_rates(scenario, layout) if rates is None else rates
    nearest = np.argmin(distances(scenario, layout)[active], axis=1)

    x = layout.task_size[active]
    time = x / (rates[active, nearest] * KB_PER_MB) + x / (scenario.cpu_ghz[nearest] * KB_PER_GB)
    energy = x / KB_PER_MB * c.cost_up

    return 0.5 * float(np.mean(c.w_time * time + c.w_energy * energy))


class EnvState(object):
    """Where an episode stands.

    States are advanced by :py:func:`step`, which returns a new state and
    leaves its input untouched.
    """

    def __init__(self, layout, partition, scenario, zeta, penalty):

        self.layout = layout
        self.partition = partition
        self.scenario = scenario
        self.zeta = zeta
        self.penalty = penalty

        m = scenario.n_servers

        self.order = layout.active
        self.t = 0
        self.assignment = np.full(layout.capacity, -1, dtype=int)
        self.capacity = scenario.capacities_for(layout.n_active)
        self.remaining = self.capacity.copy()

        self.sub_load = np.zeros((len(partition), m), dtype=int)
        self.sub_offloaded = np.zeros(len(partition), dtype=int)

        self.rates = uplink_rates(scenario, layout)
        self._features(scenario, layout)

    def _features(self, scenario, layout):

        w, h = scenario.plane
        degrees = layout.degrees()
        max_degree = max(1, int(degrees.max())) if layout.capacity else 1
        max_bw = float(scenario.bw_user_ap.max())

        feats = np.zeros((layout.capacity, USER_FEATURES + scenario.n_servers))
        feats[:, 0] = layout.positions[:, 0] / w
        feats[:, 1] = layout.positions[:, 1] / h
        feats[:, 2] = degrees / max_degree
        feats[:, 3] = layout.task_size / MAX_TASK_KB
        feats[:, USER_FEATURES:] = scenario.bw_user_ap / max_bw
        feats[~layout.mask] = 0.

        self.features = feats
        self.scopes = np.stack([scenario.in_scope(layout.positions, m) & layout.mask
                                for m in range(scenario.n_servers)])
        self.distance = distances(scenario, layout) / np.hypot(w, h)

    def copy(self):
        state = EnvState.__new__(EnvState)
        state.__dict__.update(self.__dict__)

        for name in ('assignment', 'remaining', 'sub_load', 'sub_offloaded'):
            setattr(state, name, getattr(self, name).copy())

        return state

    def __repr__(self):
        return "EnvState: {}/{} users offloaded".format(self.t, len(self.order))

    @property
    def n_agents(self):
        return self.scenario.n_servers

    @property
    def finished(self):
        return self.t >= len(self.order)

    @property
    def cursor(self):
        """The user currently being offloaded, :code:`None` once finished."""
        return None if self.finished else int(self.order[self.t])

    @property
    def decision(self):
        return OffloadDecision(self.assignment, self.scenario.n_servers)

    def cursor_share(self):
        """Share of the cursor's subgraph already on each server."""

        i = self.cursor
        if i is None:
            return np.zeros(self.n_agents)

        c = self.partition.subgraph_of(i)
        return self.sub_load[c] / max(1, self.sub_offloaded[c])


@dataclass
class TieReport(object):
    """How :py:func:`resolve_decision` arrived at its server."""

    rule: str
    candidates: tuple
    tied: tuple


@dataclass
class StepOutcome(object):

    rewards: np.ndarray
    reward: float
    state: EnvState
    done: np.ndarray
    finished: bool
    user: int
    server: int
    cost: object
    penalty: float
    report: TieReport


def reset(layout, partition, scenario, zeta=None, penalty=True):
    """
    Start an episode with nothing offloaded and every server empty.

    Parameters
    ----------
    zeta: float, optional
        Weight of the subgraph spread penalty, :py:func:`default_zeta` when
        not given
    penalty: bool
        Whether the spread penalty is charged at all
    """

    if not partition.covers(layout):
        raiseError("EN04.1")

    if scenario.n_slots != layout.capacity:
        raiseError("CM01.2", field="user slots", got=scenario.n_slots, expected=layout.capacity)

    state = EnvState(layout, partition, scenario, 0., penalty)
    state.zeta = default_zeta(scenario, layout, state.rates) if zeta is None else float(zeta)

    log.debug("Reset %s over %s, zeta %.4g", state, layout, state.zeta)
    return state


def _cursor_features(state, m):

    i = state.cursor
    if i is None:
        return np.zeros(6)

    return np.concatenate([state.features[i, :USER_FEATURES],
                           [state.distance[i, m], state.cursor_share()[m]]])


def observe(state, m):
    """
    The observation of agent :code:`m`.

    Per user slot its position, degree, task size and bandwidth to every
    access point, zero outside the agent's service scope. Then the share of
    its capacity left and the features of the user being offloaded: its
    position, degree, size, distance to the agent's server and the share of
    its subgraph already there.
    """

    if not 0 <= m < state.n_agents:
        raiseError("EN03.1", m=m, n=state.n_agents)

    users = state.features * state.scopes[m][:, None]
    own = state.remaining[m] / max(1, state.capacity[m])

    return np.concatenate([users.ravel(), [own], _cursor_features(state, m)])


def global_state(state):
    """
    Everything the critics see: all users' features, every server's share of
    capacity left, the server to server bandwidths and the user being
    offloaded with its distance and subgraph share per server.
    """

    scenario = state.scenario
    m = state.n_agents

    upper = np.triu_indices(m, k=1)
    bw = scenario.bw_server[upper]
    bw = bw / bw.max() if len(bw) else bw

    i = state.cursor
    if i is None:
        cursor = np.zeros(USER_FEATURES + 2 * m)
    else:
        cursor = np.concatenate([state.features[i, :USER_FEATURES], state.distance[i], state.cursor_share()])

    return np.concatenate([state.features.ravel(),
                           state.remaining / np.maximum(1, state.capacity),
                           bw, cursor])


def resolve_decision(state, joint):
    """
    Turn the agents' answers into a single server.

    Agent :code:`m` says yes when :math:`a_1 \\geq a_2`. The yes with the
    largest margin :math:`a_1 - a_2` among servers with capacity left wins.
    Without such a yes the server with capacity and the largest
    :math:`a_1` wins. Ties go to the lowest index.

    Parameters
    ----------
    joint: numpy.ndarray
        Array of shape :code:`(M, 2)`, clipped to :math:`[0, 1]`

    Returns
    -------
    server: int
    report: TieReport
    """

    joint = np.clip(np.asarray(joint, dtype=float).reshape(state.n_agents, 2), 0., 1.)
    open_ = state.remaining > 0

    if not open_.any():
        raiseError("EN01.1")

    a1, a2 = joint[:, 0], joint[:, 1]
    yes = (a1 >= a2) & open_

    if yes.any():
        score = np.where(yes, a1 - a2, -np.inf)
        rule = RULE_MARGIN
    else:
        score = np.where(open_, a1, -np.inf)
        rule = RULE_MAX_A1

    best = score.max()
    if not np.isfinite(best):
        k = int(np.flatnonzero(open_)[0])
        return k, TieReport(RULE_FALLBACK, (k,), ())

    tied = np.flatnonzero(score == best)
    candidates = np.flatnonzero(np.isfinite(score))

    return int(tied[0]), TieReport(rule, tuple(int(c) for c in candidates),
                                   tuple(int(t) for t in tied) if len(tied) > 1 else ())


def subgraph_penalty(state, user, k):
    """
    :math:`\\zeta N_s / N_c` where :math:`N_c` counts the users of
    :code:`user`'s subgraph offloaded so far including this one and
    :math:`N_s` the distinct servers hosting them once :code:`user` is on
    server :code:`k`.
    """

    c = state.partition.subgraph_of(user)

    hosts = state.sub_load[c] > 0
    hosts[k] = True
    n_c = state.sub_offloaded[c] + (0 if state.assignment[user] >= 0 else 1)

    return state.zeta * int(hosts.sum()) / n_c


def step(state, joint):
    """
    Offload the current user where the agents decide.

    Only the winning agent is rewarded, with
    :math:`-(C_m + R_{sp})` where :math:`C_m` is the cost the assignment
    adds. An agent is done once its server is full, the episode once every
    user is offloaded, at which point the final decision is checked against
    every constraint.
    """

    if state.finished:
        raiseError("EN02.1")

    k, report = resolve_decision(state, joint)
    i = state.cursor

    cost = marginal_cost(state.scenario, state.layout, state.assignment, i, k,
                         rates=state.rates, first=state.t == 0)
    penalty = subgraph_penalty(state, i, k) if state.penalty else 0.

    rewards = np.zeros(state.n_agents)
    rewards[k] = -(cost.C + penalty)

    following = state.copy()
    following.assignment[i] = k
    following.remaining[k] -= 1

    c = state.partition.subgraph_of(i)
    following.sub_load[c, k] += 1
    following.sub_offloaded[c] += 1
    following.t += 1

    if following.finished:
        check(state.scenario, state.layout, following.decision)
        log.debug("Episode finished: %s", following.decision)

    return StepOutcome(rewards=rewards,
                       reward=float(rewards.sum()),
                       state=following,
                       done=following.remaining == 0,
                       finished=following.finished,
                       user=i,
                       server=k,
                       cost=cost,
                       penalty=penalty,
                       report=report)

"""Time and energy spent by the edge system on the users' GNN tasks.

Units
-----
- Task data is measured in kilobits, link rates in Mb/s.
- Powers are linear milliwatts, noise is configured in dBm.
- Times are in seconds, energies in millijoules.
- A processing rate of :code:`f` GHz handles :code:`f` Gb/s of task data.
"""
import warnings
from dataclasses import dataclass, fields

import numpy as np

from .errors import raiseError, ZeroDistanceWarning


KB_PER_MB = 1000.
BITS_PER_KB = 1000.
KB_PER_GB = 1e6
MJ_PER_PJ = 1e-9

C1 = 'C1'
C2 = 'C2'
CAPACITY = 'capacity'


class OffloadDecision(object):
    """Which server every user's task goes to.

    :param assignment: One server index per user slot, :code:`None` or
                       :code:`-1` when the user is not offloaded.
    :param n_servers: The number of servers :math:`M`.
    """

    def __init__(self, assignment, n_servers):

        assignment = np.array([-1 if k is None else k for k in assignment], dtype=int)

        for i in np.flatnonzero((assignment < -1) | (assignment >= n_servers)):
            raiseError("CM06.1", i=int(i), k=int(assignment[i]), m=n_servers)

        assignment.setflags(write=False)

        self._assignment = assignment
        self._n_servers = n_servers

    def __repr__(self):
        return "OffloadDecision: {} users on {} servers".format(self.n_assigned, self.n_servers)

    def __eq__(self, other):

        if not isinstance(other, OffloadDecision):
            return NotImplemented

        return self._n_servers == other._n_servers and np.array_equal(self._assignment, other._assignment)

    def __hash__(self):
        return hash((self._n_servers, self._assignment.tobytes()))

    @classmethod
    def empty(cls, n_slots, n_servers):
        return cls([-1] * n_slots, n_servers)

    @property
    def assignment(self):
        return self._assignment

    @property
    def n_servers(self):
        return self._n_servers

    @property
    def n_slots(self):
        return self._assignment.shape[0]

    @property
    def assigned(self):
        """Indices of the offloaded users in ascending order."""
        return np.flatnonzero(self._assignment >= 0)

    @property
    def n_assigned(self):
        return int(np.count_nonzero(self._assignment >= 0))

    @property
    def w(self):
        """The binary matrix :math:`w_{ik}` of shape :code:`(N, M)`."""
        w = np.zeros((self.n_slots, self._n_servers), dtype=int)
        idx = self.assigned
        w[idx, self._assignment[idx]] = 1

        return w

    @property
    def loads(self):
        """Number of tasks on every server."""
        return np.bincount(self._assignment[self._assignment >= 0], minlength=self._n_servers)

    def server_of(self, i):
        k = int(self._assignment[i])
        return None if k < 0 else k

    def with_assignment(self, i, k):
        assignment = self._assignment.copy()
        assignment[i] = -1 if k is None else k

        return OffloadDecision(assignment, self._n_servers)


@dataclass(frozen=True)
class CostBreakdown(object):
    """Every component of the system cost.

    Times are in seconds, energies in millijoules and :code:`C` is the
    weighted sum :math:`w_T T_{all} + w_I I_{all}`.
    """

    t_upload: float = 0.
    t_transfer: float = 0.
    t_compute: float = 0.
    i_upload: float = 0.
    i_transfer: float = 0.
    i_agg: float = 0.
    i_upd: float = 0.
    C: float = 0.

    @classmethod
    def assemble(cls, constants, **components):
        cost = cls(**components)
        weighted = constants.w_time * cost.T_all + constants.w_energy * cost.I_all

        return cls(C=weighted, **components)

    @property
    def T_all(self):
        return self.t_upload + self.t_transfer + self.t_compute

    @property
    def I_all(self):
        return self.i_upload + self.i_transfer + self.i_agg + self.i_upd

    def __add__(self, other):

        if not isinstance(other, CostBreakdown):
            return NotImplemented

        return CostBreakdown(**{f.name: getattr(self, f.name) + getattr(other, f.name)
                                for f in fields(self)})


def channel_gain(distance, ref_gain=1e-3):
    """
    Free space path loss :math:`\\varrho_0 d^{-2}` with the reference gain
    measured at 1 m.

    A zero distance is clamped to 1 m and reported with a
    :py:class:`ZeroDistanceWarning`.
    """

    d = np.asarray(distance, dtype=float)

    if np.any(d == 0):
        warnings.warn("Clamped {} zero distance(s) to 1 m".format(int(np.count_nonzero(d == 0))),
                      ZeroDistanceWarning, stacklevel=2)
        d = np.where(d == 0, 1., d)

    gain = ref_gain * d ** -2.
    return float(gain) if gain.ndim == 0 else gain


def shannon_rate(bandwidth, power, gain, noise_mw):
    """Link rate in Mb/s for a bandwidth in MHz and linear powers."""
    return bandwidth * np.log2(1. + power * gain / noise_mw)


def distances(scenario, layout):
    """User to access point distances, shape :code:`(N, M)`."""
    offset = layout.positions[:, None, :] - scenario.server_positions[None, :, :]
    return np.linalg.norm(offset, axis=-1)


def uplink_rate(scenario, i, m, distance):
    """Rate in Mb/s of user :code:`i` uploading to access point :code:`m`."""

    c = scenario.constants
    gain = channel_gain(distance, c.ref_gain)

    return float(shannon_rate(scenario.bw_user_ap[i, m], scenario.user_power[i], gain, c.noise_mw))


def uplink_rates(scenario, layout):
    """Rates in Mb/s of every user slot to every access point, shape
    :code:`(N, M)`. Inactive slots get whatever their stored position
    gives, callers mask them."""

    c = scenario.constants
    active = layout.mask[:, None]

    d = distances(scenario, layout)
    d = np.where(active, d, 1.)

    gain = channel_gain(d, c.ref_gain)
    return shannon_rate(scenario.bw_user_ap, scenario.user_power[:, None], gain, c.noise_mw)


def server_rates(scenario):
    """
    Rates in Mb/s between servers, :math:`R_{kl}` uses the transmission
    power of server :code:`k`. Unordered pairs are charged at the rate of
    their lower-index server.
    """

    c = scenario.constants
    rates = shannon_rate(scenario.bw_server, scenario.server_power[:, None], c.server_gain, c.noise_mw)
    np.fill_diagonal(rates, np.inf)

    return rates


def upload_cost(scenario, i, m, x_kb, distance, w=1):
    """
    Time and energy for user :code:`i` to upload :code:`x_kb` kilobits to
    access point :code:`m`. Both are zero unless :code:`w` is set.
    """

    if not w or x_kb == 0:
        return 0., 0.

    rate = uplink_rate(scenario, i, m, distance)
    time = x_kb / (rate * KB_PER_MB)
    energy = x_kb / KB_PER_MB * scenario.constants.cost_up

    return time, energy


def compute_time(scenario, k, x_kb, w=1):
    """Seconds server :code:`k` takes to process :code:`x_kb` kilobits."""

    rate = scenario.cpu_ghz[k]
    if not rate > 0:
        raiseError("CM02.1", k=k, rate=rate)

    return x_kb * w / (rate * KB_PER_GB)


def _cross_edges(layout, assignment):
    """Edges whose endpoints are both offloaded, to different servers."""

    if layout.n_edges == 0:
        return np.zeros((0, 2), dtype=int)

    ij = np.array(layout.edges)
    ki, kj = assignment[ij[:, 0]], assignment[ij[:, 1]]

    return ij[(ki >= 0) & (kj >= 0) & (ki != kj)]


def transfer_cost(scenario, decision, layout):
    """
    Time and energy spent moving neighbour data between servers.

    Every edge between users :code:`i` on server :code:`k` and :code:`j` on
    server :code:`l` makes :code:`k` send :math:`X_i` to :code:`l` and
    :code:`l` send :math:`X_j` back.

    Returns
    -------
    time: float
    energy: float
    data_by_pair: numpy.ndarray
        Symmetric :code:`(M, M)` matrix of kilobits exchanged per server pair
    """

    m = scenario.n_servers
    a = decision.assignment
    data = np.zeros((m, m))

    cross = _cross_edges(layout, a)
    if len(cross) == 0:
        return 0., 0., data

    x = layout.task_size
    sizes = x[cross[:, 0]] + x[cross[:, 1]]
    np.add.at(data, (a[cross[:, 0]], a[cross[:, 1]]), sizes)
    data = data + data.T

    upper = np.triu_indices(m, k=1)
    rates = server_rates(scenario)

    time = float(np.sum(data[upper] / (rates[upper] * KB_PER_MB)))
    energy = float(sizes.sum() / KB_PER_MB * scenario.constants.cost_kl)

    return time, energy, data


def cross_server_cost(scenario, layout, decision):
    """Energy in mJ spent moving neighbour data between servers."""
    return transfer_cost(scenario, decision, layout)[1]


def aggregation_energy(scenario, degree):
    """Aggregation energy in mJ of one user with :code:`degree` neighbours
    over every GNN layer."""

    c = scenario.constants
    sizes = np.asarray(c.layer_sizes[:-1]) * BITS_PER_KB

    return float(c.mu_eff * degree * sizes.sum() * MJ_PER_PJ)


def update_energy(scenario):
    """Update phase energy in mJ summed over every GNN layer."""

    c = scenario.constants
    sizes = np.asarray(c.layer_sizes) * BITS_PER_KB
    before, after = sizes[:-1], sizes[1:]

    return float(np.sum(c.theta_eff * before * after + c.phi * after) * MJ_PER_PJ)


def gnn_energy(scenario, layout, users=None):
    """
    Energy of the aggregation and update phases of GNN inference.

    Parameters
    ----------
    scenario: Scenario
    layout: GraphLayout
    users: iterable, optional
        The users taking part in the computation, every active user by
        default

    Returns
    -------
    i_agg: float
    i_upd: float
        Both in mJ, zero when no user takes part
    """

    users = layout.active if users is None else np.asarray(users, dtype=int)
    if len(users) == 0:
        return 0., 0.

    degrees = layout.degrees()[users]
    return aggregation_energy(scenario, degrees.sum()), update_energy(scenario)


def check(scenario, layout, decision, complete=True):
    """
    Validate a decision against the constraints of the system.

    - C1: every active user is offloaded to exactly one server, inactive
      slots are not offloaded. Partial decisions pass when
      :code:`complete` is false.
    - C2: every processing rate is positive.
    - Capacity: no server holds more tasks than its capacity.
    - C3 to C6: bandwidth and power budgets.

    Raises :py:class:`ConstraintViolation` naming the first violated
    constraint.
    """

    if decision.n_servers != scenario.n_servers:
        raiseError("CM01.2", field='decision', got=decision.n_servers, expected=scenario.n_servers)

    if decision.n_slots != layout.capacity or scenario.n_slots < layout.capacity:
        raiseError("CM01.2", field='decision', got=decision.n_slots, expected=layout.capacity)

    assigned = decision.assignment >= 0

    stray = np.flatnonzero(assigned & ~layout.mask)
    if len(stray):
        raiseError("CM03.1", constraint=C1, detail="inactive user {} is offloaded".format(stray[0]))

    if complete:
        missing = np.flatnonzero(layout.mask & ~assigned)
        if len(missing):
            raiseError("CM03.1", constraint=C1, detail="user {} is not offloaded".format(missing[0]))

    for k, rate in enumerate(scenario.cpu_ghz):
        if not rate > 0:
            raiseError("CM03.1", constraint=C2, detail="server {} has rate {}".format(k, rate))

    capacity = scenario.capacities_for(layout.n_active)
    over = np.flatnonzero(decision.loads > capacity)
    if len(over):
        k = over[0]
        raiseError("CM03.1", constraint=CAPACITY,
                   detail="server {} holds {} tasks, capacity {}".format(k, decision.loads[k], capacity[k]))

    scenario._check_budgets()


def system_cost(scenario, layout, decision):
    """
    The total time, energy and weighted cost of completing every task.

    The update phase energy is counted once for the whole system, the
    transfer terms once per server pair.

    Raises :py:class:`ConstraintViolation` if the decision breaks any
    constraint.
    """

    check(scenario, layout, decision)

    users = decision.assigned
    if len(users) == 0:
        return CostBreakdown()

    a = decision.assignment[users]
    x = layout.task_size[users]

    rates = uplink_rates(scenario, layout)[users, a]
    cpu = scenario.cpu_ghz[a]

    t_transfer, i_transfer, _ = transfer_cost(scenario, decision, layout)
    i_agg, i_upd = gnn_energy(scenario, layout, users)

    return CostBreakdown.assemble(
        scenario.constants,
        t_upload=float(np.sum(x / (rates * KB_PER_MB))),
        t_transfer=t_transfer,
        t_compute=float(np.sum(x / (cpu * KB_PER_GB))),
        i_upload=float(x.sum() / KB_PER_MB * scenario.constants.cost_up),
        i_transfer=i_transfer,
        i_agg=i_agg,
        i_upd=i_upd,
    )


def marginal_cost(scenario, layout, assignment, i, k, rates=None, first=False):
    """
    The cost added by offloading user :code:`i` to server :code:`k` on top of
    a partial :code:`assignment`.

    It covers the user's upload, computation and aggregation, plus the
    transfers on every edge to a neighbour already offloaded elsewhere.
    The update phase energy is charged to the :code:`first` assignment.
    Summed over a whole episode this equals :py:func:`system_cost`.

    Parameters
    ----------
    rates: numpy.ndarray, optional
        Precomputed :py:func:`uplink_rates`
    """

    c = scenario.constants
    x_i = layout.task_size[i]

    if rates is None:
        rates = uplink_rates(scenario, layout)

    t_transfer = 0.
    i_transfer = 0.
    pair_rates = server_rates(scenario)

    for j in layout.neighbors(i):
        l = assignment[j]
        if l < 0 or l == k:
            continue

        data = x_i + layout.task_size[j]
        t_transfer += data / (pair_rates[min(k, l), max(k, l)] * KB_PER_MB)
        i_transfer += data / KB_PER_MB * c.cost_kl

    return CostBreakdown.assemble(
        c,
        t_upload=float(x_i / (rates[i, k] * KB_PER_MB)),
        t_transfer=t_transfer,
        t_compute=compute_time(scenario, k, x_i),
        i_upload=float(x_i / KB_PER_MB * c.cost_up),
        i_transfer=i_transfer,
        i_agg=aggregation_energy(scenario, len(layout.neighbors(i))),
        i_upd=update_energy(scenario) if first else 0.,
    )

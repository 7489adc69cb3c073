"""The edge network the users offload to: server positions and rates,
transmission powers, bandwidths and the cost constants of the system."""
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import raiseError
from .generators import grid_positions


log = logging.getLogger(__name__)

# Multipliers applied to the aggregation and update costs of each GNN model
MODEL_MULTIPLIERS = {
    'gcn': 1.0,
    'gat': 1.3,
    'sage': 1.2,
    'sgc': 0.8,
}

CAPACITY_LEVELS = (5 / 4, 1., 3 / 4)

# Relative slack allowed on the budget constraints
TOLERANCE = 1e-9


def dbm_to_mw(dbm):
    return 10. ** (dbm / 10.)


@dataclass(frozen=True)
class CostConstants(object):
    """Unit costs and budgets shared by every server and user.

    Energies are in mJ/Mb for transmissions and pJ/bit for GNN phases,
    bandwidth budgets in MHz and power budgets in mW. :code:`layer_sizes`
    holds :math:`S_0, \\ldots, S_F` in kilobits.
    """

    noise_dbm: float = -110.
    cost_up: float = 3.
    cost_kl: float = 5.
    mu: float = 20.
    theta: float = 100.
    phi: float = 50.
    ref_gain: float = 1e-3
    server_gain: float = 1e-5
    layer_sizes: tuple = (1.0, 0.064, 0.008)
    b_max1: float = 5000.
    b_max2: float = 500.
    p_max1: float = 1500.
    p_max2: float = 60.
    w_time: float = 1.
    w_energy: float = 1.
    model: str = 'gcn'

    def __post_init__(self):

        if self.model not in MODEL_MULTIPLIERS:
            raiseError("CM05.1", model=self.model)

        for name in ('cost_up', 'cost_kl', 'ref_gain', 'server_gain'):
            if not getattr(self, name) > 0:
                raiseError("CM01.1", field=name)

    @property
    def noise_mw(self):
        return dbm_to_mw(self.noise_dbm)

    @property
    def n_layers(self):
        return len(self.layer_sizes) - 1

    @property
    def mu_eff(self):
        return self.mu * MODEL_MULTIPLIERS[self.model]

    @property
    def theta_eff(self):
        return self.theta * MODEL_MULTIPLIERS[self.model]


@dataclass(frozen=True)
class ScenarioParams(object):
    """Ranges the scenario builder draws from."""

    plane: tuple = (1000., 1000.)
    scope: float = 500.
    user_power: tuple = (2., 5.)
    server_power: tuple = (10., 15.)
    cpu_ghz: tuple = (2., 10.)
    bw_user_ap: tuple = (20., 50.)
    bw_server: float = 100.
    constants: CostConstants = field(default_factory=CostConstants)


class Scenario(object):
    """The edge network :math:`\\omega`.

    :param server_positions: Array of shape :code:`(M, 2)`, each access point
                             sits with its server.
    :param cpu_ghz: Per-server processing rate, :code:`f` GHz stands for
                    :code:`f` Gb/s of task data.
    :param server_power: Per-server transmission power in mW.
    :param user_power: Per-slot user transmission power in mW, shape
                       :code:`(N,)`.
    :param bw_user_ap: User to access point bandwidths in MHz, shape
                       :code:`(N, M)`.
    :param bw_server: Symmetric server to server bandwidths in MHz, shape
                      :code:`(M, M)`, diagonal ignored.
    :param levels: Per-server capacity level, multiplied by the mean load
                   :math:`\\lceil N'/M \\rceil` to give capacities.
    :param capacity: Fixed per-server capacities, overrides :code:`levels`.
    """

    def __init__(self, server_positions, cpu_ghz, server_power, user_power,
                 bw_user_ap, bw_server, levels=None, capacity=None,
                 plane=(1000., 1000.), scope=500., constants=None):

        server_positions = np.array(server_positions, dtype=float)
        m = server_positions.shape[0]

        self._check_shape('server_positions', server_positions, (m, 2))

        cpu_ghz = np.array(cpu_ghz, dtype=float)
        self._check_shape('cpu_ghz', cpu_ghz, (m,))

        server_power = np.array(server_power, dtype=float)
        self._check_shape('server_power', server_power, (m,))

        user_power = np.array(user_power, dtype=float)
        n = user_power.shape[0]
        self._check_shape('user_power', user_power, (n,))

        bw_user_ap = np.array(bw_user_ap, dtype=float)
        self._check_shape('bw_user_ap', bw_user_ap, (n, m))

        bw_server = np.array(bw_server, dtype=float)
        self._check_shape('bw_server', bw_server, (m, m))

        off = ~np.eye(m, dtype=bool)
        for name, values in (('server_power', server_power), ('user_power', user_power),
                             ('bw_user_ap', bw_user_ap), ('bw_server', bw_server[off])):
            if not np.all(values > 0):
                raiseError("CM01.1", field=name)

        if capacity is None:
            levels = np.ones(m) if levels is None else np.array(levels, dtype=float)
            self._check_shape('levels', levels, (m,))
        else:
            capacity = np.array(capacity, dtype=int)
            self._check_shape('capacity', capacity, (m,))
            if np.any(capacity < 0):
                raiseError("CM01.1", field='capacity')

        self.constants = CostConstants() if constants is None else constants
        self.plane = tuple(float(p) for p in plane)
        self.scope = float(scope)

        self.server_positions = server_positions
        self.cpu_ghz = cpu_ghz
        self.server_power = server_power
        self.user_power = user_power
        self.bw_user_ap = bw_user_ap
        self.bw_server = bw_server
        self.levels = levels
        self._capacity = capacity

        for array in (server_positions, cpu_ghz, server_power, user_power, bw_user_ap, bw_server):
            array.setflags(write=False)

        self._check_budgets()

    def __repr__(self):
        return "Scenario: {} servers, {} user slots".format(self.n_servers, self.n_slots)

    @staticmethod
    def _check_shape(name, array, expected):
        if array.shape != expected:
            raiseError("CM01.2", field=name, got=array.shape, expected=expected)

    def _check_budgets(self):

        c = self.constants
        budgets = (
            ('C3', self.user_bandwidth_total(), c.b_max1, 'MHz'),
            ('C4', self.server_bandwidth_total(), c.b_max2, 'MHz'),
            ('C5', float(self.user_power.sum()), c.p_max1, 'mW'),
            ('C6', float(self.server_power.sum()), c.p_max2, 'mW'),
        )

        for name, total, cap, unit in budgets:
            if total > cap * (1 + TOLERANCE):
                raiseError("CM03.1", constraint=name,
                           detail="{:g} {} exceeds {:g} {}".format(total, unit, cap, unit))

    @property
    def n_servers(self):
        return self.server_positions.shape[0]

    @property
    def n_slots(self):
        """The number of user slots :math:`N` the scenario was built for."""
        return self.user_power.shape[0]

    def user_bandwidth_total(self):
        """Bandwidth in use when every user transmits on its widest link."""
        return float(self.bw_user_ap.max(axis=1).sum())

    def server_bandwidth_total(self):
        """Bandwidth summed over unordered server pairs."""
        return float(self.bw_server[np.triu_indices(self.n_servers, k=1)].sum())

    def capacities_for(self, n_active):
        """
        Per-server capacities for :code:`n_active` users.

        Each server gets its level times :math:`\\lceil N'/M \\rceil`, floored,
        and the highest-level server absorbs whatever is missing so the
        capacities add up to at least :code:`n_active`.
        """

        if self._capacity is not None:
            return self._capacity.copy()

        mean = int(np.ceil(n_active / self.n_servers))
        caps = np.floor(self.levels * mean + TOLERANCE).astype(int)

        missing = n_active - int(caps.sum())
        if missing > 0:
            caps[int(np.argmax(self.levels))] += missing

        return caps

    def in_scope(self, positions, m):
        """Mask of the :code:`positions` inside the service scope of server
        :code:`m`, a square of side :code:`scope` centred on it."""
        offset = np.abs(np.asarray(positions, dtype=float) - self.server_positions[m])
        return np.all(offset <= self.scope / 2, axis=-1)

    def replace(self, **kwargs):
        """Return a copy of this scenario with some fields swapped out."""

        fields = dict(server_positions=self.server_positions, cpu_ghz=self.cpu_ghz,
                      server_power=self.server_power, user_power=self.user_power,
                      bw_user_ap=self.bw_user_ap, bw_server=self.bw_server,
                      levels=self.levels, capacity=self._capacity, plane=self.plane,
                      scope=self.scope, constants=self.constants)
        fields.update(kwargs)

        return Scenario(**fields)

    def with_model(self, model):
        return self.replace(constants=replace(self.constants, model=model))


def _fit(values, total, cap, what):

    if total <= cap:
        return values

    log.warning("Scaling %s by %.4f to fit the %g budget", what, cap / total, cap)
    return values * (cap / total)


def build_scenario(n_slots, n_servers=4, seed=0, params=None):
    """
    Draw a scenario for :code:`n_slots` users from the ranges in
    :code:`params`.

    Servers sit at the centres of a grid over the plane. Powers, processing
    rates and user bandwidths are uniform over their ranges and capacity
    levels are dealt out at random. Bandwidths and powers exceeding their
    budgets are scaled down uniformly.

    Parameters
    ----------
    n_slots: int
        Number of user slots :math:`N`
    n_servers: int
        Number of edge servers :math:`M`
    seed: int
        Seeds every draw
    params: ScenarioParams, optional

    Returns
    -------
    scenario: Scenario
    """

    params = ScenarioParams() if params is None else params
    c = params.constants
    rng = np.random.default_rng(seed)

    positions = grid_positions(n_servers, params.plane)

    cpu = rng.uniform(*params.cpu_ghz, size=n_servers)
    server_power = rng.uniform(*params.server_power, size=n_servers)
    user_power = rng.uniform(*params.user_power, size=n_slots)
    bw_user_ap = rng.uniform(*params.bw_user_ap, size=(n_slots, n_servers))

    bw_server = np.full((n_servers, n_servers), float(params.bw_server))
    np.fill_diagonal(bw_server, 0.)

    levels = rng.permutation(np.resize(CAPACITY_LEVELS, n_servers))

    bw_user_ap = _fit(bw_user_ap, bw_user_ap.max(axis=1).sum(), c.b_max1, "user bandwidths")
    bw_server = _fit(bw_server, bw_server[np.triu_indices(n_servers, k=1)].sum(),
                     c.b_max2, "server bandwidths")
    user_power = _fit(user_power, user_power.sum(), c.p_max1, "user powers")
    server_power = _fit(server_power, server_power.sum(), c.p_max2, "server powers")

    return Scenario(positions, cpu, server_power, user_power, bw_user_ap, bw_server,
                    levels=levels, plane=params.plane, scope=params.scope, constants=c)

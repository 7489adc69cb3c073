"""Experiment configuration files.

A configuration file holds one :code:`key = value` pair per line. Anything
after a :code:`#` is a comment and blank lines are ignored. Lists are comma
separated and integer lists also accept ranges such as :code:`1..10`.
"""
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

from .agents import Hyperparams
from .errors import raiseError
from .scenario import CostConstants, ScenarioParams, MODEL_MULTIPLIERS


log = logging.getLogger(__name__)

METHODS = ('drlgo', 'ptom', 'gm', 'rm', 'drl_only')
TRAINED = ('drlgo', 'ptom', 'drl_only')
SWEEPS = ('users', 'assoc', 'position', 'model')


def _text(value):
    return value


def _int(value):
    return int(value)


def _float(value):
    return float(value)


def _flag(value):

    lowered = value.lower()
    if lowered in ('true', 'yes', 'on', '1'):
        return True

    if lowered in ('false', 'no', 'off', '0'):
        return False

    raise ValueError("expected true or false, got {!r}".format(value))


def _items(value):
    return [v.strip() for v in value.split(',') if v.strip()]


def _texts(value):
    return tuple(_items(value))


def _floats(value):
    return tuple(float(v) for v in _items(value))


def _ints(value):

    values = []
    for item in _items(value):
        if '..' in item:
            low, high = item.split('..')
            values.extend(range(int(low), int(high) + 1))
        else:
            values.append(int(item))

    return tuple(values)


def _pair(value):

    values = _floats(value)
    if len(values) != 2:
        raise ValueError("expected two numbers, got {}".format(len(values)))

    return values


def _ladder(value):
    """Benchmark sizes written as :code:`vertices:edges` pairs."""

    points = []
    for item in _items(value):
        n, m = item.split(':')
        points.append((int(n), int(m)))

    return tuple(points)


def _optional_float(value):
    return None if value == '' else float(value)


@dataclass
class ExperimentConfig(object):
    """Everything an experiment run needs, desk scale by default."""

    method: str = 'drlgo'
    dataset: str = ''
    datasets: tuple = ()
    n_users: int = 30
    n_assoc: int = 60
    capacity: int = 0
    n_servers: int = 4
    plane: tuple = (1000., 1000.)
    scope: float = 500.

    sweep: str = 'users'
    sweep_points: tuple = (50, 100)
    seeds: tuple = tuple(range(1, 11))
    episodes: int = 500
    eval_seeds: int = 10
    change_rate: float = 0.2
    gnn_model: str = 'gcn'
    gnn_models: tuple = ('gcn', 'gat', 'sage', 'sgc')
    checkpoint_dir: str = ''
    out_dir: str = 'results'
    fill_links: bool = False

    bench_sparse: tuple = ((500, 5010), (1000, 20010), (2000, 80010), (5000, 200010))
    bench_dense: tuple = ((500, 500100), (1000, 1000200))
    bench_repeats: int = 5
    bench_servers: int = 25

    # Scenario ranges and constants
    noise_dbm: float = -110.
    user_power: tuple = (2., 5.)
    server_power: tuple = (10., 15.)
    cpu_ghz: tuple = (2., 10.)
    bw_user_ap: tuple = (20., 50.)
    bw_server: float = 100.
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
    zeta: float = None

    # Learning
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

    source: str = field(default='', compare=False)

    def constants(self, model=None):
        return CostConstants(
            noise_dbm=self.noise_dbm, cost_up=self.cost_up, cost_kl=self.cost_kl,
            mu=self.mu, theta=self.theta, phi=self.phi, ref_gain=self.ref_gain,
            server_gain=self.server_gain, layer_sizes=self.layer_sizes,
            b_max1=self.b_max1, b_max2=self.b_max2, p_max1=self.p_max1,
            p_max2=self.p_max2, w_time=self.w_time, w_energy=self.w_energy,
            model=self.gnn_model if model is None else model)

    def scenario_params(self, model=None):
        return ScenarioParams(plane=self.plane, scope=self.scope, user_power=self.user_power,
                              server_power=self.server_power, cpu_ghz=self.cpu_ghz,
                              bw_user_ap=self.bw_user_ap, bw_server=self.bw_server,
                              constants=self.constants(model))

    def hyperparams(self):
        return Hyperparams(lr=self.lr, gamma=self.gamma, tau=self.tau,
                           buffer_size=self.buffer_size, batch_size=self.batch_size,
                           hidden=self.hidden, epsilon=self.epsilon, warmup=self.warmup,
                           train_every=self.train_every, ppo_clip=self.ppo_clip,
                           ppo_epochs=self.ppo_epochs, entropy_coef=self.entropy_coef)

    @property
    def checkpoints(self):
        """Where trained networks live."""
        if self.checkpoint_dir:
            return Path(self.checkpoint_dir)

        return Path(self.out_dir) / 'checkpoints'

    def override(self, out_dir=None, seed=None):
        """Apply the command line overrides, a seed replaces the seed list."""

        changes = {}
        if out_dir is not None:
            changes['out_dir'] = str(out_dir)

        if seed is not None:
            changes['seeds'] = (int(seed),)

        return replace(self, **changes)

    def validate(self):

        if self.method not in METHODS:
            raiseError("HA01.4", key='method', detail="expected one of {}".format(', '.join(METHODS)))

        if self.sweep not in SWEEPS:
            raiseError("HA01.4", key='sweep', detail="expected one of {}".format(', '.join(SWEEPS)))

        for key, models in (('gnn_model', (self.gnn_model,)), ('gnn_models', self.gnn_models)):
            unknown = [m for m in models if m not in MODEL_MULTIPLIERS]
            if unknown:
                raiseError("HA01.4", key=key, detail="unknown models {}".format(', '.join(unknown)))

        if not self.seeds:
            raiseError("HA01.4", key='seeds', detail="at least one seed is needed")

        if any(p <= 0 for p in self.sweep_points):
            raiseError("HA01.4", key='sweep_points', detail="sweep points must be positive")

        for key in ('n_users', 'n_servers', 'episodes', 'eval_seeds', 'bench_repeats', 'batch_size'):
            if getattr(self, key) <= 0:
                raiseError("HA01.4", key=key, detail="must be positive")

        if not 0 <= self.change_rate <= 1:
            raiseError("HA01.4", key='change_rate', detail="must lie in [0, 1]")

        for key, paths in (('dataset', [self.dataset] if self.dataset else []), ('datasets', self.datasets)):
            for path in paths:
                if not Path(path).exists():
                    raiseError("HA01.4", key=key, detail="{} does not exist".format(path))

        return self


PARSERS = {
    'method': _text, 'dataset': _text, 'datasets': _texts, 'n_users': _int,
    'n_assoc': _int, 'capacity': _int, 'n_servers': _int, 'plane': _pair,
    'scope': _float, 'sweep': _text, 'sweep_points': _ints, 'seeds': _ints,
    'episodes': _int, 'eval_seeds': _int, 'change_rate': _float,
    'gnn_model': _text, 'gnn_models': _texts, 'checkpoint_dir': _text,
    'out_dir': _text, 'fill_links': _flag, 'bench_sparse': _ladder,
    'bench_dense': _ladder, 'bench_repeats': _int, 'bench_servers': _int,
    'noise_dbm': _float, 'user_power': _pair, 'server_power': _pair,
    'cpu_ghz': _pair, 'bw_user_ap': _pair, 'bw_server': _float,
    'cost_up': _float, 'cost_kl': _float, 'mu': _float, 'theta': _float,
    'phi': _float, 'ref_gain': _float, 'server_gain': _float,
    'layer_sizes': _floats, 'b_max1': _float, 'b_max2': _float,
    'p_max1': _float, 'p_max2': _float, 'w_time': _float, 'w_energy': _float,
    'zeta': _optional_float, 'lr': _float, 'gamma': _float, 'tau': _float,
    'buffer_size': _int, 'batch_size': _int, 'hidden': _ints,
    'epsilon': _float, 'warmup': _int, 'train_every': _int,
    'ppo_clip': _float, 'ppo_epochs': _int, 'entropy_coef': _float,
}


def parse_config(text, source=''):
    """
    Parse the contents of a configuration file.

    Paths are taken relative to the working directory. Raises
    :py:class:`ConfigError` naming the line and key of the first problem.

    Returns
    -------
    config: ExperimentConfig
    """

    values = {}
    for number, line in enumerate(text.splitlines(), start=1):

        line = line.split('#', 1)[0].strip()
        if not line:
            continue

        if '=' not in line:
            raiseError("HA01.3", line=number)

        key, value = (part.strip() for part in line.split('=', 1))

        if key not in PARSERS:
            raiseError("HA01.1", line=number, key=key)

        try:
            values[key] = PARSERS[key](value)
        except ValueError as err:
            raiseError("HA01.2", line=number, key=key, detail=err)

    config = ExperimentConfig(source=str(source), **values)
    log.debug("Parsed %d keys from %s", len(values), source or "text")

    return config


def load_config(path):
    """Read and validate the configuration file at :code:`path`."""
    path = Path(path)
    return parse_config(path.read_text(), source=path).validate()

"""The experiment suite: dynamic sweeps, the partition benchmark, training and
the partition ablation, each writing one CSV file.

Every row is reproducible from the configuration and its seed. Layouts and
scenarios are seeded by the row's seed alone so every method in a sweep and
both arms of the ablation see the same instances.
"""
import csv
import logging
import time
from pathlib import Path

import numpy as np

from .agents import checkpoint_exists, drl_only_variant, load_agents, make_agents, run_episode, save_agents
from .baselines import greedy_offload, random_offload
from .config import TRAINED
from .costs import cross_server_cost, system_cost
from .datasets import load_citation_graph, sample_scenario
from .env import reset
from .errors import raiseError
from .flow import mincut_partition
from .generators import gen_synthetic, max_edges, random_events, random_positions, sample_pairs
from .layout import apply_events, new_layout
from .partition import Partition, cut_edge_count, hicut
from .ptom import load_policy, make_policy, ptom_episode, ptom_offload, save_policy
from .scenario import build_scenario


log = logging.getLogger(__name__)

SWEEP_HEADER = ('method', 'dataset', 'n_users', 'n_assoc', 'seed', 'T_all_s', 'I_all_mJ', 'cost', 'cross_server_mJ')
BENCH_HEADER = ('algo', 'n_vertices', 'n_edges', 'runtime_ms', 'cut_edges')
TRAIN_HEADER = ('episode', 'global_reward', 'critic_loss_mean', 'epsilon')
ABLATE_HEADER = ('arm', 'dataset', 'seed', 'cost', 'cross_server_mJ')

SYNTHETIC = 'synthetic'
SYNTHETIC_TASK_KB = (100, 1500)

# Independent streams drawn from one seed
LAYOUT_STREAM = 0
METHOD_STREAM = 1
EVENT_STREAM = 2


def _num(value):
    return repr(float(value))


def _rng(seed, stream):
    return np.random.default_rng([int(seed), stream])


def _writer(path, header):

    path.parent.mkdir(parents=True, exist_ok=True)
    f = open(path, 'w', newline='')

    writer = csv.writer(f, lineterminator='\n')
    writer.writerow(header)

    return f, writer


def n_slots(config):
    """Number of user slots: the configured capacity, or else the largest
    user count the configuration puts in play."""

    if config.capacity > 0:
        return config.capacity

    if config.sweep == 'users':
        return max(config.n_users, *config.sweep_points)

    return config.n_users


def load_graph(path):
    return load_citation_graph(path) if path else None


def dataset_name(graph):
    return graph.name if graph is not None else SYNTHETIC


def make_layout(config, n_users, n_assoc, seed, graph=None, slots=None):
    """
    The user layout of one run: sampled from :code:`graph` when given,
    otherwise users scattered uniformly with random associations.
    """

    slots = n_slots(config) if slots is None else slots
    rng = _rng(seed, LAYOUT_STREAM)

    limit = max_edges(n_users)
    if n_assoc > limit:
        log.warning("Only %d associations fit between %d users, asked for %d", limit, n_users, n_assoc)
        n_assoc = limit

    if graph is not None:
        return sample_scenario(graph, n_users, n_assoc, seed=int(rng.integers(2**31)), capacity=slots,
                               fill_links=config.fill_links, plane=config.plane)

    edges = sample_pairs(np.arange(n_users), n_assoc, rng)
    positions = random_positions(n_users, config.plane, rng)
    sizes = rng.integers(SYNTHETIC_TASK_KB[0], SYNTHETIC_TASK_KB[1] + 1, size=n_users)

    return new_layout(n_users, edges, positions, sizes, capacity=slots)


def make_scenario(config, seed, model=None, slots=None):
    slots = n_slots(config) if slots is None else slots
    return build_scenario(slots, config.n_servers, seed, config.scenario_params(model))


def _method_dir(config, method):
    return config.checkpoints / method


def load_trained(config, method, slots=None):
    """
    The trained policy of :code:`method` from the checkpoint directory.

    Raises :py:class:`MissingCheckpoint` when it was never trained.
    """

    slots = n_slots(config) if slots is None else slots
    directory = _method_dir(config, method)
    hp = config.hyperparams()

    if method == 'ptom':
        if not ((directory / 'ptom_actor.bin').is_file() and (directory / 'ptom_critic.bin').is_file()):
            raiseError("HA02.1", method=method, path=directory)

        return load_policy(directory, hp)

    if not checkpoint_exists(directory, config.n_servers):
        raiseError("HA02.1", method=method, path=directory)

    return load_agents(directory, slots, config.n_servers, hp, penalty=method == 'drlgo')


def offload(method, layout, scenario, policy=None, rng=None, zeta=None):
    """
    The decision :code:`method` makes for :code:`layout`.

    Trained methods need the :code:`policy` returned by
    :py:func:`load_trained`. Only :code:`drlgo` partitions the layout.
    """

    if method == 'gm':
        return greedy_offload(layout, scenario)

    if method == 'rm':
        return random_offload(layout, scenario, rng)

    if method == 'drlgo':
        state = reset(layout, hicut(layout)[0], scenario, zeta=zeta)
        return run_episode(state, policy, 'eval', rng)[1]

    state = reset(layout, Partition.single(layout), scenario, zeta=zeta, penalty=False)

    if method == 'ptom':
        return ptom_offload(state, policy)

    return run_episode(state, policy, 'eval', rng)[1]


def _sweep_points(config):
    """Yield :code:`(label, n_users, n_assoc, model, shuffles)` per point."""

    if config.sweep == 'users':
        for n in config.sweep_points:
            yield '', n, config.n_assoc, config.gnn_model, 0

    elif config.sweep == 'assoc':
        for m in config.sweep_points:
            yield '', config.n_users, m, config.gnn_model, 0

    elif config.sweep == 'position':
        for t in config.sweep_points:
            yield 'shuffle{}'.format(t), config.n_users, config.n_assoc, config.gnn_model, t

    else:
        for model in config.gnn_models:
            yield model, config.n_users, config.n_assoc, model, 0


def _shuffle(layout, times, seed, plane):

    rng = _rng(seed, EVENT_STREAM)
    for _ in range(times):
        layout = apply_events(layout, random_events(layout, 1., rng, plane, kinds=('position',)))

    return layout


def run_sweep(config):
    """
    Evaluate the configured method at every sweep point and seed, followed
    by one mean row per point.

    Returns
    -------
    path: pathlib.Path
        The CSV file written
    """

    graph = load_graph(config.dataset)
    name = dataset_name(graph)
    policy = load_trained(config, config.method) if config.method in TRAINED else None

    path = Path(config.out_dir) / 'sweep.csv'
    f, writer = _writer(path, SWEEP_HEADER)

    with f:
        for label, n_users, n_assoc, model, shuffles in _sweep_points(config):

            dataset = name + ':' + label if label else name
            results = []

            for seed in config.seeds:

                layout = make_layout(config, n_users, n_assoc, seed, graph)
                layout = _shuffle(layout, shuffles, seed, config.plane)
                scenario = make_scenario(config, seed, model)

                decision = offload(config.method, layout, scenario, policy, _rng(seed, METHOD_STREAM),
                                   zeta=config.zeta)
                cost = system_cost(scenario, layout, decision)
                cross = cross_server_cost(scenario, layout, decision)

                values = (cost.T_all, cost.I_all, cost.C, cross)
                results.append(values)

                writer.writerow([config.method, dataset, layout.n_active, layout.n_edges, seed]
                                + [_num(v) for v in values])

            mean = np.mean(results, axis=0)
            writer.writerow([config.method, dataset, n_users, n_assoc, 'mean'] + [_num(v) for v in mean])

            log.info("%s on %s with %d users: mean cost %.6g", config.method, dataset, n_users, mean[2])

    return path


def _median_ms(fn, repeats):

    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn()
        times.append(1e3 * (time.perf_counter() - start))

    return float(np.median(times)), result


def run_partition_bench(config):
    """
    Time HiCut against repeated minimum cuts on synthetic graphs of the
    sparse and dense ladders. Edge counts beyond what a simple graph can
    hold are clamped and the row records the clamped count.
    """

    seed = config.seeds[0]
    path = Path(config.out_dir) / 'bench.csv'
    f, writer = _writer(path, BENCH_HEADER)

    with f:
        for n, m in tuple(config.bench_sparse) + tuple(config.bench_dense):

            limit = max_edges(n)
            if m > limit:
                log.warning("Clamping %d edges on %d vertices to %d", m, n, limit)
                m = limit

            layout, weights = gen_synthetic(n, m, seed=seed, plane=config.plane)

            runtime, (partition, _) = _median_ms(lambda: hicut(layout), config.bench_repeats)
            writer.writerow(['hicut', n, m, _num(runtime), cut_edge_count(layout, partition)])

            runtime, partition = _median_ms(
                lambda: mincut_partition(layout, weights, config.bench_servers, seed=seed),
                config.bench_repeats)
            writer.writerow(['mincut', n, m, _num(runtime), cut_edge_count(layout, partition)])

            f.flush()
            log.info("Benchmarked %d vertices, %d edges", n, m)

    return path


def _train_episode(method, state, policy, rng):

    if method == 'ptom':
        return ptom_episode(state, policy, 'train', rng)

    return run_episode(state, policy, 'train', rng)


def run_training(config):
    """
    Train the configured method, changing the layout by random events at
    the configured rate before every episode after the first.

    Writes one CSV row per episode and the final checkpoints under
    :code:`<checkpoints>/<method>`.
    """

    method = config.method
    if method not in TRAINED:
        raiseError("HA01.4", key='method', detail="{} is not trained".format(method))

    slots = n_slots(config)
    seed = config.seeds[0]
    hp = config.hyperparams()

    graph = load_graph(config.dataset)
    scenario = make_scenario(config, seed, slots=slots)
    layout = make_layout(config, config.n_users, config.n_assoc, seed, graph, slots)

    if method == 'drlgo':
        policy = make_agents(slots, config.n_servers, hp, seed)
    elif method == 'drl_only':
        policy = drl_only_variant(slots, config.n_servers, hp, seed)
    else:
        policy = make_policy(slots, config.n_servers, hp, seed)

    rng = _rng(seed, EVENT_STREAM)
    epsilon = float('nan') if method == 'ptom' else hp.epsilon

    path = Path(config.out_dir) / 'train_{}.csv'.format(method)
    f, writer = _writer(path, TRAIN_HEADER)

    with f:
        for episode in range(config.episodes):

            if episode > 0 and config.change_rate > 0:
                layout = apply_events(layout, random_events(layout, config.change_rate, rng, config.plane))

            if method == 'drlgo':
                state = reset(layout, hicut(layout)[0], scenario, zeta=config.zeta)
            else:
                state = reset(layout, Partition.single(layout), scenario, zeta=config.zeta, penalty=False)

            reward, _, metrics = _train_episode(method, state, policy, rng)
            writer.writerow([episode, _num(reward), _num(metrics['critic_loss_mean']), _num(epsilon)])

            log.debug("Episode %d: reward %.6g, cost %.6g", episode, reward, metrics['cost'])

    directory = _method_dir(config, method)
    if method == 'ptom':
        save_policy(policy, directory)
    else:
        save_agents(policy, directory)

    costs = []
    for n in range(config.eval_seeds):
        eval_seed = seed + 1 + n
        eval_layout = make_layout(config, config.n_users, config.n_assoc, eval_seed, graph, slots)
        decision = offload(method, eval_layout, scenario, policy, zeta=config.zeta)
        costs.append(system_cost(scenario, eval_layout, decision).C)

    log.info("Trained %s for %d episodes, mean cost %.6g over %d evaluation layouts",
             method, config.episodes, np.mean(costs), len(costs))

    return path


def run_ablation(config):
    """
    Compare the agents trained with and without HiCut on identical layouts,
    per dataset and seed, with one mean row per dataset and arm.
    """

    slots = n_slots(config)
    arms = [(method, load_trained(config, method, slots)) for method in ('drlgo', 'drl_only')]

    paths = config.datasets or ((config.dataset,) if config.dataset else ('',))

    path = Path(config.out_dir) / 'ablate.csv'
    f, writer = _writer(path, ABLATE_HEADER)

    with f:
        for dataset in paths:

            graph = load_graph(dataset)
            name = dataset_name(graph)
            results = {method: [] for method, _ in arms}

            for seed in config.seeds:

                layout = make_layout(config, config.n_users, config.n_assoc, seed, graph, slots)
                scenario = make_scenario(config, seed, slots=slots)

                for method, policy in arms:
                    decision = offload(method, layout, scenario, policy, zeta=config.zeta)

                    values = (system_cost(scenario, layout, decision).C,
                              cross_server_cost(scenario, layout, decision))
                    results[method].append(values)

                    writer.writerow([method, name, seed] + [_num(v) for v in values])

            for method, _ in arms:
                mean = np.mean(results[method], axis=0)
                writer.writerow([method, name, 'mean'] + [_num(v) for v in mean])

                log.info("%s on %s: mean cross server energy %.6g mJ", method, name, mean[1])

    return path

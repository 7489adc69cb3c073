import csv
import math
from dataclasses import replace
from pathlib import Path
from pytest import raises, fixture, mark
from scipy.stats import binomtest


import numpy as np
from offloadsim.core.errors import MissingCheckpoint, ConfigError
from offloadsim.core.config import ExperimentConfig
from offloadsim.core.costs import system_cost, cross_server_cost
from offloadsim.core.harness import (run_sweep, run_partition_bench, run_training, run_ablation, make_layout,
                                     make_scenario, n_slots, load_trained, offload, SWEEP_HEADER, BENCH_HEADER,
                                     TRAIN_HEADER, ABLATE_HEADER)


DATA = Path(__file__).parent / "data"
CORA = str(DATA / "cora.graph")


def rows(path):
    with open(path, newline='') as f:
        return list(csv.reader(f))


def tiny(tmp_path, **kwargs):
    """A configuration small enough to train in a moment."""

    fields = dict(out_dir=str(tmp_path), n_users=6, n_assoc=8, capacity=8, n_servers=2,
                  sweep_points=(6,), seeds=(1, 2), episodes=3, eval_seeds=1, hidden=(8, 8),
                  batch_size=4, buffer_size=100)
    fields.update(kwargs)

    return ExperimentConfig(**fields).validate()


@fixture(scope='module')
def trained(tmp_path_factory):
    """Both ablation arms trained on the same tiny configuration."""

    out = tmp_path_factory.mktemp("trained")
    for method in ('drlgo', 'drl_only'):
        run_training(tiny(out, method=method))

    return out


class TestSlots(object):

    def test_capacity(self):
        assert n_slots(ExperimentConfig(capacity=40)) == 40

    def test_users_sweep(self):
        assert n_slots(ExperimentConfig(n_users=30, sweep_points=(50, 100))) == 100

    def test_other_sweeps(self):
        assert n_slots(ExperimentConfig(n_users=30, sweep='assoc', sweep_points=(50, 100))) == 30


class TestInstances(object):

    def test_synthetic(self):

        config = ExperimentConfig(n_users=20, n_assoc=30)
        layout = make_layout(config, 20, 30, seed=1)

        assert layout.capacity == 100
        assert layout.n_active == 20
        assert layout.n_edges == 30
        assert all(100 <= x <= 1500 for x in layout.task_size[layout.active])

    def test_clamped_assoc(self, caplog):

        layout = make_layout(ExperimentConfig(), 5, 50, seed=1)

        assert layout.n_edges == 10
        assert any("associations" in r.message for r in caplog.records)

    def test_graph(self):

        from offloadsim.core.datasets import load_citation_graph

        config = ExperimentConfig(capacity=8)
        layout = make_layout(config, 6, 100, seed=1, graph=load_citation_graph(CORA))

        assert layout.n_active == 6
        assert set(layout.task_size[layout.active]) == {1433.}

    def test_shared_by_methods(self):

        config = ExperimentConfig(method='rm')

        assert make_layout(config, 30, 60, seed=3) == make_layout(config.override(), 30, 60, seed=3)
        assert make_scenario(config, 3).cpu_ghz.tolist() == make_scenario(config, 3).cpu_ghz.tolist()


class TestSweep(object):

    def test_default_users_sweep(self, tmp_path):

        path = run_sweep(ExperimentConfig(method='gm', out_dir=str(tmp_path)).validate())
        table = rows(path)

        assert path == tmp_path / 'sweep.csv'
        assert tuple(table[0]) == SWEEP_HEADER
        assert len(table) == 1 + 20 + 2

        assert table[1][:5] == ['gm', 'synthetic', '50', '60', '1']
        assert table[11][:5] == ['gm', 'synthetic', '50', '60', 'mean']
        assert table[-1][:5] == ['gm', 'synthetic', '100', '60', 'mean']

        first = [float(r[7]) for r in table[1:11]]
        assert math.isclose(float(table[11][7]), sum(first) / len(first))

    def test_deterministic(self, tmp_path):

        config = tiny(tmp_path / 'a', method='rm')

        a = run_sweep(config)
        b = run_sweep(config.override(out_dir=tmp_path / 'b'))

        assert a.read_bytes() == b.read_bytes()

    def test_seed_override(self, tmp_path):

        table = rows(run_sweep(tiny(tmp_path, method='gm').override(seed=5)))

        assert [r[4] for r in table[1:]] == ['5', 'mean']

    def test_dataset(self, tmp_path):

        table = rows(run_sweep(tiny(tmp_path, method='gm', dataset=CORA)))
        assert {r[1] for r in table[1:]} == {'cora'}

    def test_position(self, tmp_path):

        table = rows(run_sweep(tiny(tmp_path, method='gm', sweep='position', sweep_points=(1, 2))))

        assert [r[1] for r in table[1:]] == ['synthetic:shuffle1'] * 3 + ['synthetic:shuffle2'] * 3

    def test_model(self, tmp_path):

        table = rows(run_sweep(tiny(tmp_path, method='gm', sweep='model', gnn_models=('gcn', 'gat'))))
        gcn = [float(r[7]) for r in table[1:3]]
        gat = [float(r[7]) for r in table[4:6]]

        assert table[1][1] == 'synthetic:gcn'
        assert table[4][1] == 'synthetic:gat'
        assert all(b > a for a, b in zip(gcn, gat))

    def test_untrained(self, tmp_path):

        with raises(MissingCheckpoint):
            run_sweep(tiny(tmp_path, method='drlgo'))

    def test_trained(self, trained):

        table = rows(run_sweep(tiny(trained, method='drlgo')))

        assert len(table) == 1 + 2 + 1
        assert all(math.isfinite(float(r[7])) for r in table[1:])


class TestBench(object):

    def test_ladders(self, tmp_path, caplog):

        config = tiny(tmp_path, bench_sparse=((20, 30),), bench_dense=((10, 100),), bench_servers=3,
                      bench_repeats=1)
        table = rows(run_partition_bench(config))

        assert tuple(table[0]) == BENCH_HEADER
        assert [r[:3] for r in table[1:]] == [['hicut', '20', '30'], ['mincut', '20', '30'],
                                               ['hicut', '10', '45'], ['mincut', '10', '45']]
        assert all(float(r[3]) >= 0 for r in table[1:])
        assert all(int(r[4]) >= 0 for r in table[1:])
        assert any("Clamping" in r.message for r in caplog.records)


class TestTraining(object):

    def test_drlgo(self, trained):

        table = rows(trained / 'train_drlgo.csv')

        assert tuple(table[0]) == TRAIN_HEADER
        assert [r[0] for r in table[1:]] == ['0', '1', '2']
        assert all(float(r[3]) == 0.1 for r in table[1:])
        assert (trained / 'checkpoints' / 'drlgo' / 'actor_0.bin').is_file()

    def test_ptom(self, tmp_path):

        config = tiny(tmp_path, method='ptom')
        table = rows(run_training(config))

        assert all(r[3] == 'nan' for r in table[1:])
        assert all(math.isfinite(float(r[2])) for r in table[1:])
        assert load_trained(config, 'ptom').episodes == 1

    def test_not_trainable(self, tmp_path):

        with raises(ConfigError):
            run_training(tiny(tmp_path, method='gm'))


class TestAblation(object):

    def test_synthetic(self, trained):

        table = rows(run_ablation(tiny(trained)))

        assert tuple(table[0]) == ABLATE_HEADER
        assert [(r[0], r[2]) for r in table[1:]] == [('drlgo', '1'), ('drl_only', '1'), ('drlgo', '2'),
                                                     ('drl_only', '2'), ('drlgo', 'mean'), ('drl_only', 'mean')]

    def test_datasets(self, trained):

        table = rows(run_ablation(tiny(trained, datasets=(CORA, str(DATA / 'pubmed.graph')), n_users=5)))

        assert len(table) == 1 + 2 * 6
        assert [r[1] for r in table[1::6]] == ['cora', 'pubmed']

    def test_untrained(self, tmp_path):

        with raises(MissingCheckpoint):
            run_ablation(tiny(tmp_path))


def smoothed_quintiles(rewards, window=20):
    """Mean of the first and last fifth of the moving average."""

    smooth = np.convolve(rewards, np.ones(window) / window, mode='valid')
    fifths = np.array_split(smooth, 5)

    return fifths[0].mean(), fifths[-1].mean()


@fixture(scope='module')
def desk(tmp_path_factory):
    """DRLGO trained at desk scale, once per training seed."""

    out = tmp_path_factory.mktemp("desk")
    configs = {}

    for s in range(1, 6):
        config = ExperimentConfig(out_dir=str(out / str(s)), seeds=(s,), eval_seeds=10).validate()
        run_training(config)
        configs[s] = config

    return configs


@mark.slow
class TestDeskScale(object):

    def test_beats_baselines(self, desk):

        config = desk[1]
        policy = load_trained(config, 'drlgo')
        scenario = make_scenario(config, 1)

        costs = {method: [] for method in ('drlgo', 'gm', 'rm')}
        cross = {method: [] for method in ('drlgo', 'rm')}

        for s in range(2, 12):
            layout = make_layout(config, config.n_users, config.n_assoc, s)

            for method in costs:
                decision = offload(method, layout, scenario, policy, rng=np.random.default_rng(s))
                costs[method].append(system_cost(scenario, layout, decision).C)

                if method in cross:
                    cross[method].append(cross_server_cost(scenario, layout, decision))

        assert np.mean(costs['drlgo']) <= np.mean(costs['gm'])
        assert np.mean(costs['drlgo']) <= np.mean(costs['rm'])
        assert np.mean(cross['drlgo']) <= np.mean(cross['rm'])

    def test_converges(self, desk):

        improved = 0
        for s, config in desk.items():

            table = rows(Path(config.out_dir) / 'train_drlgo.csv')
            first, last = smoothed_quintiles([float(r[1]) for r in table[1:]])
            improved += last > first

        assert binomtest(improved, len(desk), 0.5, alternative='greater').pvalue < 0.05


@mark.slow
class TestAblationProperty(object):

    def test_fewer_transfers(self, tmp_path):

        datasets = tuple(str(DATA / name) for name in ('cora.graph', 'citeseer.graph', 'pubmed.graph'))
        config = ExperimentConfig(out_dir=str(tmp_path), dataset=CORA, datasets=datasets, n_users=5, n_assoc=4,
                                  capacity=8, seeds=tuple(range(1, 11)), episodes=300).validate()

        for method in ('drlgo', 'drl_only'):
            run_training(replace(config, method=method))

        means = {(r[0], r[1]): float(r[4]) for r in rows(run_ablation(config))[1:] if r[2] == 'mean'}
        wins = sum(means['drlgo', name] <= means['drl_only', name] for name in ('cora', 'citeseer', 'pubmed'))

        assert wins >= 2


@mark.slow
class TestBenchScaling(object):

    SPARSE = ((200, 2010), (400, 8010), (800, 32010))
    DENSE = ((200, 19900), (300, 44850))

    def test_ordering_and_growth(self, tmp_path):

        config = ExperimentConfig(out_dir=str(tmp_path), seeds=(1,), bench_sparse=self.SPARSE,
                                  bench_dense=self.DENSE, bench_repeats=3, bench_servers=4).validate()
        times = {(r[0], int(r[1]), int(r[2])): float(r[3]) for r in rows(run_partition_bench(config))[1:]}

        for n, m in self.DENSE:
            assert times['hicut', n, m] < times['mincut', n, m]

        # Calibrated on the smallest graph of each ladder
        for ladder in (self.SPARSE, self.DENSE):
            n0, m0 = ladder[0]
            c = times['hicut', n0, m0] / (n0 * n0 + n0 * m0)

            for n, m in ladder[1:]:
                assert times['hicut', n, m] <= 2 * c * (n * n + n * m)

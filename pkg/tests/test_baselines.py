from pytest import raises, fixture
from hypothesis import given, settings
from hypothesis.strategies import integers
from unittest.mock import patch
from .strategies import layouts, seed


import numpy as np
from offloadsim.core.errors import AllServersFull
from offloadsim.core.baselines import greedy_offload, random_offload
from offloadsim.core.costs import check
from offloadsim.core.layout import new_layout
from offloadsim.core.scenario import Scenario, build_scenario


@fixture
def pair():
    return Scenario(server_positions=[(250, 250), (750, 750)], cpu_ghz=[2., 4.],
                    server_power=[10., 12.], user_power=[3., 4., 5.],
                    bw_user_ap=np.full((3, 2), 20.), bw_server=[[0., 100.], [100., 0.]])


LAYOUT = new_layout(3, [(0, 1)], [(100, 100), (900, 900), (300, 200)], [100, 200, 300])


class TestGreedy(object):

    def test_nearest(self, pair):

        decision = greedy_offload(LAYOUT, pair.replace(capacity=[3, 3]))
        assert list(decision.assignment) == [0, 1, 0]

    def test_spills_over(self, pair):

        decision = greedy_offload(LAYOUT, pair.replace(capacity=[1, 2]))
        assert list(decision.assignment) == [0, 1, 1]

    def test_tie(self, pair):

        layout = new_layout(3, [], [(500, 500)] * 3, [1, 1, 1])
        decision = greedy_offload(layout, pair.replace(capacity=[3, 3]))

        assert list(decision.assignment) == [0, 0, 0]

    def test_full(self, pair):

        with raises(AllServersFull):
            greedy_offload(LAYOUT, pair.replace(capacity=[1, 1]))

    @patch('offloadsim.core.baselines.raiseError')
    def test_full_code(self, Err, pair):

        try:
            greedy_offload(LAYOUT, pair.replace(capacity=[0, 0]))
        except Exception:
            pass

        Err.assert_any_call("EN01.1")

    @settings(max_examples=50, deadline=None)
    @given(g=layouts(), m=integers(min_value=1, max_value=6))
    def test_valid(self, g, m):

        scenario = build_scenario(g.capacity, m, seed=0)
        check(scenario, g, greedy_offload(g, scenario))


class TestRandom(object):

    @settings(max_examples=50, deadline=None)
    @given(g=layouts(), m=integers(min_value=1, max_value=6), s=seed)
    def test_valid(self, g, m, s):

        scenario = build_scenario(g.capacity, m, seed=0)
        check(scenario, g, random_offload(g, scenario, np.random.default_rng(s)))

    def test_seeded(self, pair):

        a = random_offload(LAYOUT, pair, np.random.default_rng(3))
        b = random_offload(LAYOUT, pair, np.random.default_rng(3))

        assert a == b

    def test_only_open(self, pair):

        for s in range(20):
            decision = random_offload(LAYOUT, pair.replace(capacity=[0, 3]), np.random.default_rng(s))
            assert list(decision.assignment) == [1, 1, 1]

    def test_full(self, pair):

        with raises(AllServersFull):
            random_offload(LAYOUT, pair.replace(capacity=[1, 1]), np.random.default_rng(0))

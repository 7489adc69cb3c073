from itertools import product
from pytest import raises
from hypothesis import given, settings
from hypothesis.strategies import integers
from .strategies import layouts, seed


import networkx as nx
import numpy as np
from offloadsim.core.errors import InsufficientServers, EmptyGraph
from offloadsim.core.flow import FlowNetwork, min_cut, mincut_partition, nearest_anchors
from offloadsim.core.generators import gen_synthetic
from offloadsim.core.layout import new_layout


def random_weighted(rng, n, p=0.4):

    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                edges.append((i, j, int(rng.integers(1, 10))))

    return edges


def brute_force_cut(n, edges, s, t):
    """Smallest cut over every split of the vertices separating s and t."""

    others = [v for v in range(n) if v not in (s, t)]
    best = None

    for sides in product((False, True), repeat=len(others)):
        source = {s} | {v for v, side in zip(others, sides) if side}
        value = sum(w for i, j, w in edges if (i in source) != (j in source))
        best = value if best is None else min(best, value)

    return best


class TestFlowNetwork(object):

    def test_series(self):

        net = FlowNetwork(3)
        net.add_edge(0, 1, 5)
        net.add_edge(1, 2, 3)

        assert net.max_flow(0, 2) == 3

    def test_parallel_paths(self):

        net = FlowNetwork(4)
        net.add_edge(0, 1, 2)
        net.add_edge(0, 2, 2)
        net.add_edge(1, 3, 2)
        net.add_edge(2, 3, 2)
        net.add_edge(1, 2, 1)

        assert net.max_flow(0, 3) == 4

    def test_disconnected(self):

        net = FlowNetwork(2)

        assert net.max_flow(0, 1) == 0
        assert net.reachable(0) == {0}


class TestMinCut(object):

    @settings(max_examples=200, deadline=None)
    @given(n=integers(min_value=2, max_value=12), s=seed)
    def test_brute_force(self, n, s):

        rng = np.random.default_rng(s)
        edges = random_weighted(rng, n)
        source, sink = rng.choice(n, size=2, replace=False)

        value, side = min_cut(n, edges, int(source), int(sink))

        assert value == brute_force_cut(n, edges, source, sink)
        assert source in side and sink not in side
        assert value == sum(w for i, j, w in edges if (i in side) != (j in side))

    @settings(max_examples=50, deadline=None)
    @given(n=integers(min_value=2, max_value=60), s=seed)
    def test_networkx(self, n, s):

        rng = np.random.default_rng(s)
        edges = random_weighted(rng, n, p=0.2)

        G = nx.DiGraph()
        G.add_nodes_from(range(n))
        for i, j, w in edges:
            G.add_edge(i, j, capacity=w)
            G.add_edge(j, i, capacity=w)

        value, _ = min_cut(n, edges, 0, n - 1)
        assert value == nx.maximum_flow_value(G, 0, n - 1)


class TestAnchors(object):

    def test_nearest(self):

        g = new_layout(4, [], [(0, 0), (10, 0), (0, 10), (10, 10)], np.ones(4))
        anchors = nearest_anchors(g, np.array([(9., 9.), (1., 1.)]))

        assert anchors == [3, 0]

    def test_claimed(self):

        g = new_layout(2, [], [(0, 0), (10, 0)], np.ones(2))
        anchors = nearest_anchors(g, np.array([(0., 0.), (0., 0.), (0., 0.)]))

        assert anchors == [0, 1]


class TestMincutPartition(object):

    @settings(max_examples=100, deadline=None)
    @given(g=layouts(min_vertices=2, max_vertices=60), m=integers(min_value=2, max_value=6))
    def test_valid(self, g, m):

        p = mincut_partition(g, {}, m)

        assert p.covers(g)
        assert len(p) <= m

    def test_two_cliques(self):

        # Two heavy triangles joined by a light edge split along that edge
        edges = [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)]
        weights = {e: 10 for e in edges}
        weights[(2, 3)] = 1

        g = new_layout(6, edges, [(0, 0), (1, 0), (2, 0), (10, 0), (11, 0), (12, 0)], np.ones(6))
        p = mincut_partition(g, weights, 2, server_positions=[(0., 0.), (12., 0.)])

        assert p.subgraphs == ((0, 1, 2), (3, 4, 5))

    def test_seeded(self):

        g, w = gen_synthetic(80, 300, seed=1)
        assert mincut_partition(g, w, 4, seed=2) == mincut_partition(g, w, 4, seed=2)

    def test_single_vertex(self):

        g = new_layout(1, [], [(0, 0)], [1])
        assert mincut_partition(g, {}, 3).subgraphs == ((0,),)

    def test_too_few_servers(self):

        g, w = gen_synthetic(10, 10)

        with raises(InsufficientServers):
            mincut_partition(g, w, 1)

    def test_empty(self):

        with raises(EmptyGraph):
            mincut_partition(new_layout(0, [], np.zeros((0, 2)), [], capacity=2), {}, 2)

    def test_bad_weight(self):

        g = new_layout(2, [(0, 1)], np.zeros((2, 2)), np.ones(2))

        with raises(ValueError):
            mincut_partition(g, {(0, 1): 0}, 2)

        with raises(ValueError):
            mincut_partition(g, {(1, 0): 2.5}, 2)

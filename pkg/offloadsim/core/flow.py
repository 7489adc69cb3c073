"""Maximum flow, minimum cut and the server-anchored min-cut partitioner the
layer cut is benchmarked against."""
import logging
from collections import deque
from itertools import combinations

import numpy as np

from .errors import raiseError
from .partition import Partition


log = logging.getLogger(__name__)


class FlowNetwork(object):
    """A residual network solved with Dinic's algorithm.

    Edges are stored in flat arrays, edge :code:`e` and its reverse
    :code:`e ^ 1` are always adjacent.

    :param n: Number of nodes.
    """

    def __init__(self, n):
        self.n = n
        self.head = [[] for _ in range(n)]
        self.to = []
        self.cap = []

    def add_edge(self, u, v, capacity, reverse_capacity=0):
        self.head[u].append(len(self.to))
        self.to.append(v)
        self.cap.append(capacity)

        self.head[v].append(len(self.to))
        self.to.append(u)
        self.cap.append(reverse_capacity)

    def add_undirected(self, u, v, capacity):
        self.add_edge(u, v, capacity, capacity)

    def _levels(self, s, t):

        level = [-1] * self.n
        level[s] = 0
        queue = deque([s])

        while queue:
            u = queue.popleft()

            for e in self.head[u]:
                v = self.to[e]
                if self.cap[e] > 0 and level[v] < 0:
                    level[v] = level[u] + 1
                    queue.append(v)

        return level if level[t] >= 0 else None

    def _augment(self, s, t, level, it):
        """Push flow along one path of the level graph, 0 when blocked."""

        stack = [s]
        path = []

        while stack:
            u = stack[-1]

            if u == t:
                pushed = min(self.cap[e] for e in path)
                for e in path:
                    self.cap[e] -= pushed
                    self.cap[e ^ 1] += pushed

                return pushed

            edges = self.head[u]
            while it[u] < len(edges):
                e = edges[it[u]]
                v = self.to[e]

                if self.cap[e] > 0 and level[v] == level[u] + 1:
                    stack.append(v)
                    path.append(e)
                    break

                it[u] += 1

            else:
                # Dead end
                stack.pop()
                level[u] = -1

                if path:
                    path.pop()
                    it[stack[-1]] += 1

        return 0

    def max_flow(self, s, t):

        flow = 0
        phases = 0

        while True:
            level = self._levels(s, t)
            if level is None:
                break

            phases += 1
            it = [0] * self.n

            while True:
                pushed = self._augment(s, t, level, it)
                if pushed == 0:
                    break

                flow += pushed

        log.debug("Max flow %s from %d to %d in %d phases", flow, s, t, phases)
        return flow

    def reachable(self, s):
        """Nodes reachable from :code:`s` in the residual network."""

        seen = {s}
        queue = deque([s])

        while queue:
            u = queue.popleft()

            for e in self.head[u]:
                v = self.to[e]
                if self.cap[e] > 0 and v not in seen:
                    seen.add(v)
                    queue.append(v)

        return seen


def min_cut(n, weighted_edges, source, sink):
    """
    Minimum :code:`source`-:code:`sink` cut of an undirected weighted graph.

    Parameters
    ----------
    n: int
        Number of nodes, labelled :code:`0..n-1`
    weighted_edges: iterable
        Triples :code:`(i, j, w)`
    source, sink: int
        The terminals

    Returns
    -------
    value: int
        Weight of the minimum cut, equal to the maximum flow
    source_side: frozenset
        Nodes still reachable from the source once the flow is saturated
    """

    network = FlowNetwork(n)
    for i, j, w in weighted_edges:
        network.add_undirected(i, j, w)

    value = network.max_flow(source, sink)
    return value, frozenset(network.reachable(source))


def _check_weights(layout, edge_weights):

    weights = {}
    for i, j in layout.edges:
        w = edge_weights.get((i, j), edge_weights.get((j, i), 1))

        if int(w) != w or w <= 0:
            raiseError("PA03.2", w=w, i=i, j=j)

        weights[(i, j)] = int(w)

    return weights


def nearest_anchors(layout, server_positions):
    """For every server in order, the nearest active vertex not claimed by an
    earlier server, ties broken by index."""

    active = layout.active
    taken = np.zeros(len(active), dtype=bool)
    anchors = []

    for p in server_positions:
        if taken.all():
            break

        dist = np.linalg.norm(layout.positions[active] - p, axis=1)
        dist[taken] = np.inf

        k = int(np.argmin(dist))
        taken[k] = True
        anchors.append(int(active[k]))

    return anchors


def mincut_partition(layout, edge_weights, n_servers, seed=0, server_positions=None):
    """
    Partition the layout into server-anchored regions by repeated minimum
    cuts.

    Each server is anchored at its nearest unclaimed vertex. Then, for every
    pair of servers :code:`(k, l)` in lexicographic order, the vertices
    currently labelled :code:`k` or :code:`l` (or not labelled yet) are split
    along a minimum cut between the two anchors, the source side taking
    label :code:`k` and the rest label :code:`l`.

    Parameters
    ----------
    layout: GraphLayout
        The layout to partition
    edge_weights: dict
        Positive integer weight per edge, missing edges weigh 1
    n_servers: int
        Number of servers, at least 2
    seed: int
        Seeds the server positions when none are given
    server_positions: numpy.ndarray, optional
        Array of shape :code:`(n_servers, 2)`

    Returns
    -------
    partition: Partition
        One subgraph per server region, in server order
    """

    if n_servers < 2:
        raiseError("PA03.1", n=n_servers)

    if layout.n_active == 0:
        raiseError("PA02.1")

    weights = _check_weights(layout, edge_weights)
    active = layout.active

    if server_positions is None:
        rng = np.random.default_rng(seed)
        points = layout.positions[active]
        low, high = points.min(axis=0), points.max(axis=0)
        server_positions = rng.uniform(low, high, size=(n_servers, 2))

    anchors = nearest_anchors(layout, np.asarray(server_positions, dtype=float))

    if len(anchors) < 2:
        return Partition([active], layout.capacity)

    label = {int(v): None for v in active}
    for k, a in enumerate(anchors):
        label[a] = k

    for k, l in combinations(range(len(anchors)), 2):

        members = [v for v, c in label.items() if c in (k, l, None)]
        local = {v: n for n, v in enumerate(members)}

        edges = [(local[i], local[j], weights[(i, j)])
                 for i, j in layout.edges if i in local and j in local]

        value, side = min_cut(len(members), edges, local[anchors[k]], local[anchors[l]])
        log.debug("Servers %d and %d: %d vertices, cut %s", k, l, len(members), value)

        for v in members:
            label[v] = k if local[v] in side else l

    regions = [[] for _ in anchors]
    for v, c in label.items():
        regions[c].append(v)

    return Partition([r for r in regions if r], layout.capacity)

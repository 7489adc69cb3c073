"""Splitting a graph layout into weakly associated subgraphs.

:py:func:`hicut` walks the layout breadth first from every unassigned vertex
and cuts each traversal at the layer where the number of outgoing edges
starts growing again after having shrunk.
"""
import logging
from dataclasses import dataclass

import numpy as np

from .errors import raiseError


log = logging.getLogger(__name__)

CONTINUE = 'continue'
RECORD_SEG = 'record_seg'
FLUSH_SEG_EXIT = 'flush_seg_exit'
TERMINAL_FLUSH = 'terminal_flush'


@dataclass(frozen=True)
class CutStep(object):
    """The decision taken at one layer of a traversal."""

    layer: int
    edge_count: int
    action: str


class CutTrace(object):
    """The layer by layer decisions of a single :py:func:`layer_cut` call.

    :param start: The vertex the traversal started from.
    :param steps: Sequence of :py:class:`CutStep`
    """

    def __init__(self, start, steps):
        self.start = start
        self.steps = tuple(steps)

    def __repr__(self):
        return "CutTrace({}, {})".format(self.start, [(s.layer, s.edge_count, s.action) for s in self.steps])

    def __eq__(self, other):

        if not isinstance(other, CutTrace):
            return NotImplemented

        return self.start == other.start and self.steps == other.steps

    def __len__(self):
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def __getitem__(self, key):
        return self.steps[key]

    @property
    def edge_counts(self):
        """The sequence :math:`d_1, d_2, \\ldots` of per-layer edge counts."""
        return tuple(s.edge_count for s in self.steps)

    @property
    def actions(self):
        return tuple(s.action for s in self.steps)

    def is_sound(self):
        """Check the branch conditions hold at every recorded step.

        A segment is only recorded when the edge count strictly drops and
        only flushed on exit once the count strictly rises above the count
        it was recorded at, or when nothing is left to traverse.
        """
        recorded = None

        for n, step in enumerate(self.steps):
            previous = self.steps[n - 1].edge_count if n > 0 else None

            if step.action == RECORD_SEG:
                if previous is None or not previous > step.edge_count:
                    return False
                recorded = step.edge_count

            elif step.action == FLUSH_SEG_EXIT:
                if recorded is None or not recorded < step.edge_count:
                    return False
                if not previous < step.edge_count:
                    return False

            elif step.action == TERMINAL_FLUSH:
                if step.edge_count != 0:
                    return False

            if step.action in (FLUSH_SEG_EXIT, TERMINAL_FLUSH) and n != len(self.steps) - 1:
                return False

        return True


class Partition(object):
    """An ordered collection of disjoint, non-empty vertex sets.

    :param subgraphs: Iterable of vertex collections, stored as sorted tuples
                      in the order given.
    :param capacity: The number of vertex slots :math:`N` of the layout the
                     partition belongs to.
    """

    def __init__(self, subgraphs, capacity):

        subgraphs = tuple(tuple(sorted(int(v) for v in sub)) for sub in subgraphs)
        assignment = np.full(capacity, -1, dtype=int)

        for c, sub in enumerate(subgraphs):

            if len(sub) == 0:
                raiseError("PA04.2", c=c)

            for v in sub:
                if assignment[v] != -1:
                    raiseError("PA04.1", i=v)

                assignment[v] = c

        assignment.setflags(write=False)

        self._subgraphs = subgraphs
        self._assignment = assignment

    def __repr__(self):

        if len(self) == 1:
            return "Partition: 1 subgraph"

        return "Partition: {} subgraphs".format(len(self))

    def __eq__(self, other):

        if not isinstance(other, Partition):
            return NotImplemented

        return self._subgraphs == other._subgraphs and len(self._assignment) == len(other._assignment)

    def __hash__(self):
        return hash(self._subgraphs)

    def __len__(self):
        return len(self._subgraphs)

    def __iter__(self):
        return iter(self._subgraphs)

    def __getitem__(self, c):
        return self._subgraphs[c]

    @property
    def subgraphs(self):
        return self._subgraphs

    @property
    def assignment(self):
        """Subgraph index of every vertex slot, :code:`-1` if unassigned."""
        return self._assignment

    def subgraph_of(self, i):
        """Index of the subgraph holding vertex :code:`i` or :code:`None`."""
        c = int(self._assignment[i])
        return None if c < 0 else c

    def covers(self, layout):
        """Whether every active vertex, and nothing else, is assigned."""
        return (len(self._assignment) == layout.capacity
                and np.array_equal(self._assignment >= 0, layout.mask))

    @classmethod
    def single(cls, layout):
        """The trivial partition with all active vertices in one subgraph."""

        if layout.n_active == 0:
            raiseError("PA02.1")

        return cls([layout.active], layout.capacity)


def layer_cut(layout, start, assigned):
    """
    Traverse the layout layer by layer from :code:`start` and cut out one
    subgraph.

    At every layer the number of edges :math:`d_n` leaving its vertices
    towards vertices that are neither assigned nor in an earlier layer is
    compared with the previous layer's count.

    - A drop records the layer as a candidate segment.
    - A rise after a drop flushes the segment and stops.
    - A layer with no such edges flushes the segment and itself and stops.
    - Otherwise the layer joins the subgraph.

    Vertices reached beyond the cut are left unassigned.

    Parameters
    ----------
    layout: GraphLayout
        The layout to cut
    start: int
        Active vertex to start from
    assigned: set
        Vertices already belonging to earlier subgraphs, never traversed

    Returns
    -------
    subgraph: frozenset
    trace: CutTrace
    """

    if not layout.mask[start] or start in assigned:
        raiseError("PA01.1", i=start)

    subgraph = [start]
    segment = []
    steps = []

    depth = {start: 1}
    current = [start]
    layer = 1
    d_prev = 0

    while current:
        d = 0
        following = []

        for v in current:
            for r in layout.neighbors(v):

                if r in assigned:
                    continue

                dr = depth.get(r)
                if dr is None:
                    depth[r] = layer + 1
                    following.append(r)
                    d += 1

                elif dr >= layer:
                    d += 1

        if d == 0:
            steps.append(CutStep(layer, d, TERMINAL_FLUSH))
            subgraph.extend(segment)
            if layer > 1:
                subgraph.extend(current)
            break

        if layer == 1:
            steps.append(CutStep(layer, d, CONTINUE))
            d_prev = d

        elif d_prev <= d:

            if segment and d_prev < d:
                steps.append(CutStep(layer, d, FLUSH_SEG_EXIT))
                subgraph.extend(segment)
                segment = []
                break

            steps.append(CutStep(layer, d, CONTINUE))
            subgraph.extend(current)
            d_prev = d

        else:
            steps.append(CutStep(layer, d, RECORD_SEG))
            subgraph.extend(segment)
            segment = list(current)
            d_prev = d

        current = following
        layer += 1

    else:
        # Ran out of vertices without an exit
        subgraph.extend(segment)

    trace = CutTrace(start, steps)
    log.debug("Cut %d vertices from %d, edge counts %s", len(subgraph), start, trace.edge_counts)

    return frozenset(subgraph), trace


def hicut(layout):
    """
    Cut the layout into weakly associated subgraphs.

    Every active vertex not yet assigned, in ascending index order, starts a
    :py:func:`layer_cut` over the vertices not assigned so far.

    Returns
    -------
    partition: Partition
    traces: list
        One :py:class:`CutTrace` per subgraph
    """

    if layout.n_active == 0:
        raiseError("PA02.1")

    assigned = set()
    subgraphs = []
    traces = []

    for v in layout.active:
        v = int(v)

        if v in assigned:
            continue

        subgraph, trace = layer_cut(layout, v, assigned)
        assigned.update(subgraph)

        subgraphs.append(subgraph)
        traces.append(trace)

    partition = Partition(subgraphs, layout.capacity)
    log.debug("HiCut produced %s over %s", partition, layout)

    return partition, traces


def cut_edge_count(layout, partition):
    """Number of edges whose endpoints lie in different subgraphs."""

    if layout.n_edges == 0:
        return 0

    ij = np.array(layout.edges)
    a = partition.assignment

    return int(np.count_nonzero(a[ij[:, 0]] != a[ij[:, 1]]))


def cut_weight(layout, partition, weights):
    """Total weight of the edges whose endpoints lie in different subgraphs.
    Edges missing from :code:`weights` count as 1."""

    a = partition.assignment
    return sum(weights.get(e, 1) for e in layout.edges if a[e[0]] != a[e[1]])

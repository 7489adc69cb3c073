"""The dynamic graph of users: which user slots are active, where each user
is, how much data it holds and which users are associated with each other.

Layouts are treated as values, :py:func:`apply_event` never modifies its
input but returns a new :py:class:`GraphLayout`.
"""
from dataclasses import dataclass

import numpy as np

from .errors import raiseError


ADD_USERS = 'add_users'
REMOVE_USERS = 'remove_users'
REWIRE = 'rewire'
MOVE = 'move'

EVENT_KINDS = (ADD_USERS, REMOVE_USERS, REWIRE, MOVE)


def _frozen(array, dtype):
    array = np.array(array, dtype=dtype)
    array.setflags(write=False)
    return array


def normalize_edges(edges, n):
    """Return the sorted, deduplicated :code:`(i, j)` pairs with
    :code:`i < j` for an iterable of undirected edges over :code:`[0, n)`."""

    pairs = set()

    for i, j in edges:
        i, j = int(i), int(j)

        if i == j:
            raiseError("GL01.2", i=i)

        if not (0 <= i < n and 0 <= j < n):
            raiseError("GL01.1", i=i, j=j, n=n)

        pairs.add((i, j) if i < j else (j, i))

    return tuple(sorted(pairs))


class GraphLayout(object):
    """The graph layout of users perceived by the controller at one timestep.

    :param mask: One entry per user slot, non-zero when the slot is active.
    :param positions: Array of shape :code:`(N, 2)` holding user coordinates
                      in meters.
    :param edges: Iterable of undirected :code:`(i, j)` associations.
    :param task_size: Array of shape :code:`(N,)` holding each user's task
                      data size in kilobits.
    """

    def __init__(self, mask, positions, edges, task_size):

        mask = _frozen(mask, bool)
        n = mask.shape[0]

        positions = _frozen(positions, float)
        if positions.shape != (n, 2):
            raiseError("GL01.3", expected=(n, 2), what="positions", got=positions.shape)

        task_size = _frozen(task_size, float)
        if task_size.shape != (n,):
            raiseError("GL01.3", expected=(n,), what="task sizes", got=task_size.shape)

        edges = normalize_edges(edges, n)

        neighbors = [[] for _ in range(n)]
        for i, j in edges:

            if not (mask[i] and mask[j]):
                raiseError("GL02.2", i=i, j=j)

            neighbors[i].append(j)
            neighbors[j].append(i)

        self._mask = mask
        self._positions = positions
        self._task_size = task_size
        self._edges = edges
        self._neighbors = tuple(tuple(sorted(ns)) for ns in neighbors)

    def __repr__(self):
        s = "Graph Layout: "

        if self.n_active == 1:
            s += "1 active user, "
        else:
            s += "{} active users, ".format(self.n_active)

        if self.n_edges == 1:
            s += "1 edge"
        else:
            s += "{} edges".format(self.n_edges)

        return s

    def __eq__(self, other):

        if not isinstance(other, GraphLayout):
            return NotImplemented

        return (self._edges == other._edges
                and np.array_equal(self._mask, other._mask)
                and np.array_equal(self._positions, other._positions)
                and np.array_equal(self._task_size, other._task_size))

    def __hash__(self):
        return hash((self._edges, self._mask.tobytes()))

    @property
    def capacity(self):
        """The number of user slots :math:`N`."""
        return self._mask.shape[0]

    @property
    def mask(self):
        return self._mask

    @property
    def positions(self):
        return self._positions

    @property
    def task_size(self):
        return self._task_size

    @property
    def edges(self):
        """Sorted tuple of :code:`(i, j)` pairs with :code:`i < j`."""
        return self._edges

    @property
    def n_edges(self):
        return len(self._edges)

    @property
    def active(self):
        """Indices of the active vertices in ascending order."""
        return np.flatnonzero(self._mask)

    @property
    def n_active(self):
        return int(self._mask.sum())

    def neighbors(self, i):
        return self._neighbors[i]

    def degrees(self):
        """Number of neighbours of every slot, zero for inactive ones."""
        return np.array([len(ns) for ns in self._neighbors], dtype=int)

    def free_slots(self, k):
        """The :code:`k` lowest-index inactive slots."""
        return np.flatnonzero(~self._mask)[:k]

    def adjacency_matrix(self):
        """Dense symmetric 0/1 adjacency over all :math:`N` slots."""
        A = np.zeros((self.capacity, self.capacity))

        if self._edges:
            ij = np.array(self._edges)
            A[ij[:, 0], ij[:, 1]] = 1.
            A[ij[:, 1], ij[:, 0]] = 1.

        return A

    def replace(self, mask=None, positions=None, edges=None, task_size=None):
        """Return a copy of this layout with some of its fields swapped out."""
        return GraphLayout(
            self._mask if mask is None else mask,
            self._positions if positions is None else positions,
            self._edges if edges is None else edges,
            self._task_size if task_size is None else task_size,
        )


@dataclass(frozen=True)
class GraphEvent(object):
    """A single change to the users between two timesteps.

    :code:`vertices` are the slots the event acts on. :code:`positions` are
    absolute coordinates for :code:`add_users` and deltas for :code:`move`.
    :code:`edges` are inserted, :code:`removed_edges` deleted (rewire only).
    :code:`seed` records the generator seed that produced the payload.
    """

    kind: str
    vertices: tuple = ()
    edges: tuple = ()
    removed_edges: tuple = ()
    positions: tuple = ()
    task_sizes: tuple = ()
    seed: object = None


def new_layout(n_active, edges, positions, task_sizes, capacity=None):
    """Build a layout whose first :code:`n_active` slots are active.

    :param n_active: Number of active users.
    :param edges: Undirected associations between active users.
    :param positions: One :code:`(x, y)` per active user.
    :param task_sizes: One size in kilobits per active user.
    :param capacity: Total number of slots :math:`N`, defaults to
                     :code:`n_active`.
    """

    capacity = n_active if capacity is None else capacity

    if n_active > capacity:
        raiseError("GL01.4", n=n_active, capacity=capacity)

    positions = np.asarray(positions, dtype=float).reshape(-1, 2)
    if positions.shape[0] != n_active:
        raiseError("GL01.3", expected=n_active, what="positions", got=positions.shape[0])

    task_sizes = np.asarray(task_sizes, dtype=float).reshape(-1)
    if task_sizes.shape[0] != n_active:
        raiseError("GL01.3", expected=n_active, what="task sizes", got=task_sizes.shape[0])

    edges = normalize_edges(edges, n_active)

    mask = np.zeros(capacity, dtype=bool)
    mask[:n_active] = True

    full_positions = np.zeros((capacity, 2))
    full_positions[:n_active] = positions

    full_sizes = np.zeros(capacity)
    full_sizes[:n_active] = task_sizes

    return GraphLayout(mask, full_positions, edges, full_sizes)


def active_degree(layout, i):
    """Number of active neighbours of vertex :code:`i`."""

    if not layout.mask[i]:
        raiseError("GL03.1", i=i)

    return len(layout.neighbors(i))


def _remove_users(layout, event):

    mask = layout.mask.copy()
    positions = layout.positions.copy()
    sizes = layout.task_size.copy()

    for i in event.vertices:
        if not mask[i]:
            raiseError("GL02.1", action="remove", i=i, bit=0)

        mask[i] = False
        positions[i] = 0.
        sizes[i] = 0.

    edges = [(i, j) for i, j in layout.edges if mask[i] and mask[j]]
    return GraphLayout(mask, positions, edges, sizes)


def _add_users(layout, event):

    mask = layout.mask.copy()
    positions = layout.positions.copy()
    sizes = layout.task_size.copy()

    new_positions = np.asarray(event.positions, dtype=float).reshape(-1, 2)
    if new_positions.shape[0] != len(event.vertices):
        raiseError("GL01.3", expected=len(event.vertices), what="positions",
                   got=new_positions.shape[0])

    for k, i in enumerate(event.vertices):
        if mask[i]:
            raiseError("GL02.1", action="add to", i=i, bit=1)

        mask[i] = True
        positions[i] = new_positions[k]
        sizes[i] = event.task_sizes[k]

    edges = layout.edges + normalize_edges(event.edges, layout.capacity)
    return GraphLayout(mask, positions, edges, sizes)


def _rewire(layout, event):

    removed = set(normalize_edges(event.removed_edges, layout.capacity))
    added = normalize_edges(event.edges, layout.capacity)

    for i, j in added:
        if not (layout.mask[i] and layout.mask[j]):
            raiseError("GL02.2", i=i, j=j)

    edges = [e for e in layout.edges if e not in removed]
    return layout.replace(edges=edges + list(added))


def _move(layout, event):

    positions = layout.positions.copy()
    deltas = np.asarray(event.positions, dtype=float).reshape(-1, 2)

    if deltas.shape[0] != len(event.vertices):
        raiseError("GL01.3", expected=len(event.vertices), what="position deltas",
                   got=deltas.shape[0])

    for k, i in enumerate(event.vertices):
        if not layout.mask[i]:
            raiseError("GL03.1", i=i)

        positions[i] += deltas[k]

    return layout.replace(positions=positions)


_APPLY = {
    ADD_USERS: _add_users,
    REMOVE_USERS: _remove_users,
    REWIRE: _rewire,
    MOVE: _move,
}


def apply_event(layout, event):
    """Apply a :py:class:`GraphEvent` and return the resulting layout."""

    if event.kind not in _APPLY:
        raiseError("GL02.3", kind=event.kind)

    return _APPLY[event.kind](layout, event)


def apply_events(layout, events):
    for event in events:
        layout = apply_event(layout, event)

    return layout

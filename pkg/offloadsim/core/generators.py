import logging

import numpy as np

from .errors import raiseError
from .layout import GraphEvent, apply_event, new_layout, ADD_USERS, REMOVE_USERS, REWIRE, MOVE


log = logging.getLogger(__name__)


def random_positions(n, plane, rng):
    """
    Draw :code:`n` positions uniformly on the :code:`plane = (width, height)`
    rectangle with its lower left corner at the origin.
    """
    width, height = plane
    return rng.uniform(0., 1., size=(n, 2)) * np.array([width, height])


def grid_positions(m, plane):
    """
    Place :code:`m` points at the centres of a near-square grid of cells
    covering the plane. Four points land on the quadrant centres.
    """
    cols = int(np.ceil(np.sqrt(m)))
    rows = int(np.ceil(m / cols))
    width, height = plane

    points = []
    for r in range(rows):
        for c in range(cols):
            points.append(((c + 0.5) * width / cols, (r + 0.5) * height / rows))

    return np.array(points[:m])


def decode_pairs(index, n):
    """
    Map edge slot numbers in :math:`[0, n(n-1)/2)` to the pairs
    :code:`(i, j)`, :code:`i < j`, they stand for in row-major order.

    Parameters
    ----------
    index: numpy.ndarray
        Integer slot numbers
    n: int
        Number of vertices

    Returns
    -------
    pairs: numpy.ndarray
        Array of shape :code:`(len(index), 2)`
    """
    index = np.asarray(index, dtype=np.int64)

    # Row i starts at slot i*n - i*(i+1)/2
    i = (n - 2 - np.floor(np.sqrt(-8. * index + 4. * n * (n - 1) - 7) / 2. - 0.5)).astype(np.int64)
    start = i * n - i * (i + 1) // 2
    j = index - start + i + 1

    return np.stack([i, j], axis=1)


def sample_pairs(vertices, k, rng, exclude=()):
    """
    Sample :code:`k` distinct unordered pairs of :code:`vertices` that are
    not in :code:`exclude`, uniformly and without rejection.
    """
    vertices = np.asarray(vertices)
    n = len(vertices)
    total = n * (n - 1) // 2

    excluded = set()
    if exclude:
        position = {v: p for p, v in enumerate(vertices.tolist())}
        for a, b in exclude:
            if a in position and b in position:
                p, q = sorted((position[a], position[b]))
                excluded.add(p * n - p * (p + 1) // 2 + (q - p - 1))

    k = min(k, total - len(excluded))
    if k <= 0:
        return []

    if excluded:
        # Slots are drawn from the complement by ranking
        blocked = np.array(sorted(excluded), dtype=np.int64)
        free = rng.choice(total - len(blocked), size=k, replace=False)
        free = np.sort(free)
        slots = free + np.searchsorted(blocked - np.arange(len(blocked)), free, side='right')
    else:
        slots = np.sort(rng.choice(total, size=k, replace=False))

    pairs = decode_pairs(slots, n)
    return [(int(vertices[a]), int(vertices[b])) for a, b in pairs]


def max_edges(n):
    return n * (n - 1) // 2


def gen_synthetic(n_vertices, n_edges, weight_range=(1, 100), seed=0, plane=(1000., 1000.)):
    """
    Generate a seeded simple graph with exactly :code:`n_edges` edges chosen
    uniformly from all vertex pairs, together with integer edge weights.

    Parameters
    ----------
    n_vertices: int
        Number of vertices, all active
    n_edges: int
        Number of edges, at most :math:`n(n-1)/2`
    weight_range: tuple
        Inclusive bounds of the integer weights
    seed: int
        Seed of the generator

    Returns
    -------
    layout: GraphLayout
    weights: dict
        Maps every edge :code:`(i, j)` to its weight
    """
    limit = max_edges(n_vertices)
    if n_edges > limit:
        raiseError("DI03.1", n=n_vertices, limit=limit, m=n_edges)

    rng = np.random.default_rng(seed)
    edges = sample_pairs(np.arange(n_vertices), n_edges, rng)
    positions = random_positions(n_vertices, plane, rng)

    low, high = weight_range
    ws = rng.integers(low, high + 1, size=len(edges))

    layout = new_layout(n_vertices, edges, positions, np.zeros(n_vertices))
    weights = {e: int(w) for e, w in zip(layout.edges, ws)}

    return layout, weights


def random_events(layout, rate, rng, plane, kinds=('users', 'assoc', 'position')):
    """
    Draw the events that change a layout at the given change rate.

    - :code:`users`: add or remove up to :code:`round(rate * n_active)`
      users. New users get the typical task size and as many associations
      to random active users as the current mean degree allows.
    - :code:`assoc`: rewire associations, half removed and half added
      between active users.
    - :code:`position`: redraw the position of every active user uniformly
      on the plane.

    Users and associations share one budget of :code:`round(rate * n_edges)`
    association changes. Associations dropped with removed users or given
    to new users count against it and rewiring takes what is left.

    Returns the events in the order users, assoc, position.
    """
    events = []
    seed = int(rng.integers(2**31))
    budget = int(round(rate * layout.n_edges))

    if 'users' in kinds:
        event, used = _user_event(layout, rate, rng, plane, seed, budget)
        events.append(event)
        layout = _preview(layout, event)
        budget -= used

    if 'assoc' in kinds:
        events.append(_rewire_event(layout, budget, rng, seed))
        layout = _preview(layout, events[-1])

    if 'position' in kinds:
        events.append(_move_event(layout, rng, plane, seed))

    events = [e for e in events if e is not None]
    log.debug("Drew %s at change rate %s", [e.kind for e in events], rate)

    return events


def _preview(layout, event):
    if event is None:
        return layout

    return apply_event(layout, event)


def _removal(layout, k, rng, budget):
    """Up to :code:`k` random active users whose associations fit the budget."""

    chosen, dropped = set(), 0
    for v in rng.permutation(layout.active):
        if len(chosen) == k:
            break

        cost = sum(1 for u in layout.neighbors(v) if u not in chosen)
        if dropped + cost <= budget:
            chosen.add(int(v))
            dropped += cost

    return sorted(chosen), dropped


def _user_event(layout, rate, rng, plane, seed, budget):
    """The add or remove event and the number of associations it changes."""

    n_active = layout.n_active
    k = int(round(rate * n_active))
    if k == 0:
        return None, 0

    free = layout.capacity - n_active
    add = bool(rng.integers(2))

    if add and free == 0:
        add = False
    if not add and n_active - k < 1:
        add = True

    if not add:
        vertices, dropped = _removal(layout, k, rng, budget)
        if not vertices:
            return None, 0

        return GraphEvent(REMOVE_USERS, vertices=tuple(vertices), seed=seed), dropped

    slots = layout.free_slots(min(k, free))
    if len(slots) == 0:
        return None, 0

    active = layout.active
    size = float(np.median(layout.task_size[active])) if n_active else 0.
    degree = int(round(2. * layout.n_edges / n_active)) if n_active else 0
    degree = min(degree, budget // len(slots))

    positions = random_positions(len(slots), plane, rng)
    pool = np.concatenate([active, slots])

    # Two new users may pick each other
    edges = set()
    for s in slots:
        others = pool[pool != s]
        d = min(degree, len(others))
        if d:
            for v in rng.choice(others, size=d, replace=False):
                edges.add((min(int(s), int(v)), max(int(s), int(v))))

    event = GraphEvent(ADD_USERS,
                       vertices=tuple(int(s) for s in slots),
                       edges=tuple(sorted(edges)),
                       positions=tuple(map(tuple, positions)),
                       task_sizes=(size,) * len(slots),
                       seed=seed)

    return event, len(edges)


def _rewire_event(layout, k, rng, seed):

    if k <= 0:
        return None

    n_remove = k // 2
    existing = layout.edges
    picked = rng.choice(len(existing), size=min(n_remove, len(existing)), replace=False)
    removed = [existing[p] for p in np.sort(picked)]

    added = sample_pairs(layout.active, k - len(removed), rng, exclude=existing)

    return GraphEvent(REWIRE, edges=tuple(added), removed_edges=tuple(removed), seed=seed)


def _move_event(layout, rng, plane, seed):

    active = layout.active
    if len(active) == 0:
        return None

    targets = random_positions(len(active), plane, rng)
    deltas = targets - layout.positions[active]

    return GraphEvent(MOVE,
                      vertices=tuple(int(v) for v in active),
                      positions=tuple(map(tuple, deltas)),
                      seed=seed)

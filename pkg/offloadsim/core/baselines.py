"""Offloading policies that need no training."""
import logging

import numpy as np

from .costs import OffloadDecision, distances
from .errors import raiseError


log = logging.getLogger(__name__)


def greedy_offload(layout, scenario):
    """
    Send every active user, in index order, to the nearest server that still
    has capacity. Ties go to the lowest index.

    Returns
    -------
    decision: OffloadDecision
    """

    remaining = scenario.capacities_for(layout.n_active)
    assignment = np.full(layout.capacity, -1, dtype=int)
    dist = distances(scenario, layout)

    for i in layout.active:

        if not (remaining > 0).any():
            raiseError("EN01.1")

        # Stable sort keeps the lowest index first among equal distances
        for k in np.argsort(dist[i], kind='stable'):
            if remaining[k] > 0:
                break

        assignment[i] = k
        remaining[k] -= 1

    return OffloadDecision(assignment, scenario.n_servers)


def random_offload(layout, scenario, rng):
    """Send every active user to a server drawn uniformly from those with
    capacity left."""

    remaining = scenario.capacities_for(layout.n_active)
    assignment = np.full(layout.capacity, -1, dtype=int)

    for i in layout.active:

        open_ = np.flatnonzero(remaining > 0)
        if len(open_) == 0:
            raiseError("EN01.1")

        k = int(rng.choice(open_))
        assignment[i] = k
        remaining[k] -= 1

    return OffloadDecision(assignment, scenario.n_servers)

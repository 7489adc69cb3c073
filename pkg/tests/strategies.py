import numpy as np
from hypothesis.strategies import integers, floats, composite, lists, tuples

from offloadsim.core.layout import GraphLayout

# In this file we define a number of strategies representing
# particular data types. Defining them here in one place will
# help keep ourselves consistent.

# Seeds for the numpy generators that build the bigger objects
seed = integers(min_value=0, max_value=2**32 - 1)

# A coordinate on the default 1000 x 1000 plane
coord = floats(min_value=0., max_value=1000.)

# A task size in kilobits
task = floats(min_value=1., max_value=1500.)

# A probability, used for edge densities
density = floats(min_value=0., max_value=1.)

# A single agent's action
action = tuples(floats(min_value=0., max_value=1.), floats(min_value=0., max_value=1.))


def random_layout(rng, n_vertices, p, capacity=None, plane=(1000., 1000.)):
    """A layout over :code:`capacity` slots with :code:`n_vertices` active
    ones scattered among them and every active pair joined with
    probability :code:`p`."""

    capacity = n_vertices if capacity is None else capacity

    active = np.sort(rng.choice(capacity, size=n_vertices, replace=False))
    mask = np.zeros(capacity, dtype=bool)
    mask[active] = True

    ii, jj = np.triu_indices(n_vertices, k=1)
    keep = rng.random(len(ii)) < p
    edges = list(zip(active[ii[keep]], active[jj[keep]]))

    positions = np.zeros((capacity, 2))
    positions[active] = rng.uniform(0., 1., size=(n_vertices, 2)) * np.array(plane)

    sizes = np.zeros(capacity)
    sizes[active] = rng.integers(1, 1501, size=n_vertices)

    return GraphLayout(mask, positions, edges, sizes)


@composite
def layouts(draw, min_vertices=1, max_vertices=40, spare=5):
    """Random layouts, some slots left inactive."""

    n = draw(integers(min_value=min_vertices, max_value=max_vertices))
    extra = draw(integers(min_value=0, max_value=spare))
    p = draw(density)
    rng = np.random.default_rng(draw(seed))

    return random_layout(rng, n, p, capacity=n + extra)


@composite
def edge_lists(draw, n, max_size=60):
    """Lists of distinct-endpoint pairs over :code:`[0, n)`."""

    pairs = draw(lists(tuples(integers(0, n - 1), integers(0, n - 1)), max_size=max_size))
    return [(i, j) for i, j in pairs if i != j]


@composite
def joint_actions(draw, n_agents):
    return np.array(draw(lists(action, min_size=n_agents, max_size=n_agents)))

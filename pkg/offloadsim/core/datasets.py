"""Citation graphs stored as plain text and the user layouts sampled from them.

A graph file reads::

    GRAPH <n_docs> <n_edges> <feature_dim> <n_classes>
    <src> <dst>          # n_edges lines, 0-based document ids
    <label>              # n_docs lines

Links are undirected, repeated links are merged and self-loops dropped on
load. Synthetic benchmark instances use the same format with a feature
dimension of 0.
"""
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import raiseError
from .generators import random_positions, sample_pairs
from .layout import new_layout


log = logging.getLogger(__name__)

MAX_TASK_KB = 1500
HEADER = 'GRAPH'


@dataclass(frozen=True)
class CitationGraph(object):
    """Documents joined by citation links.

    :param n_docs: Number of documents.
    :param edges: Sorted undirected links :code:`(i, j)` with :code:`i < j`.
    :param feature_dim: Length of each document's feature vector.
    :param labels: Class of every document.
    :param n_classes: Number of classes.
    """

    n_docs: int
    edges: tuple
    feature_dim: int
    labels: tuple
    n_classes: int
    name: str = ''

    def __repr__(self):
        return "CitationGraph{}: {} documents, {} links, {} features".format(
            " " + self.name if self.name else "", self.n_docs, self.n_links, self.feature_dim)

    @property
    def n_links(self):
        return len(self.edges)

    @property
    def task_size(self):
        return task_size_from_dim(self.feature_dim)


def task_size_from_dim(feature_dim):
    """Each feature dimension stands for 1 kb of user data, up to 1500 kb."""
    return min(int(feature_dim), MAX_TASK_KB)


def _ints(tokens, path, number):

    try:
        values = [int(t) for t in tokens]
    except ValueError:
        raiseError("DI01.1", path=path, line=number, detail="expected integers, got {!r}".format(' '.join(tokens)))

    return values


def load_citation_graph(path):
    """
    Read a graph file.

    Raises :py:class:`ParseError` naming the offending line and
    :py:class:`CountMismatch` when the header disagrees with the body.
    """

    path = Path(path)
    lines = [(n, line.split()) for n, line in enumerate(path.read_text().splitlines(), start=1)]
    lines = [(n, tokens) for n, tokens in lines if tokens]

    if not lines or lines[0][1][0] != HEADER or len(lines[0][1]) != 5:
        number = lines[0][0] if lines else 1
        raiseError("DI01.1", path=path, line=number,
                   detail="expected '{} <n_docs> <n_edges> <feature_dim> <n_classes>'".format(HEADER))

    number, tokens = lines[0]
    n_docs, n_edges, feature_dim, n_classes = _ints(tokens[1:], path, number)

    if min(n_docs, n_edges, feature_dim, n_classes) < 0:
        raiseError("DI01.1", path=path, line=number, detail="counts must not be negative")

    body = lines[1:]
    n_links = 0
    while n_links < len(body) and len(body[n_links][1]) == 2:
        n_links += 1

    links, rest = body[:n_links], body[n_links:]

    if len(links) != n_edges:
        raiseError("DI01.2", path=path, declared=n_edges, what="links", found=len(links))

    if len(rest) != n_docs:
        raiseError("DI01.2", path=path, declared=n_docs, what="labels", found=len(rest))

    edges = set()
    loops = 0
    for number, tokens in links:
        i, j = _ints(tokens, path, number)

        if not (0 <= i < n_docs and 0 <= j < n_docs):
            raiseError("DI01.1", path=path, line=number,
                       detail="link ({}, {}) outside [0, {})".format(i, j, n_docs))

        if i == j:
            loops += 1
            continue

        edges.add((min(i, j), max(i, j)))

    if loops:
        log.warning("%s: dropped %d self-loops", path, loops)

    labels = []
    for number, tokens in rest:

        if len(tokens) != 1:
            raiseError("DI01.1", path=path, line=number, detail="expected a single label")

        label, = _ints(tokens, path, number)
        if not 0 <= label < max(n_classes, 1):
            raiseError("DI01.1", path=path, line=number,
                       detail="label {} outside [0, {})".format(label, n_classes))

        labels.append(label)

    graph = CitationGraph(n_docs, tuple(sorted(edges)), feature_dim, tuple(labels), n_classes,
                          name=path.stem)

    log.debug("Loaded %s", graph)
    return graph


def save_citation_graph(graph, path):
    """Write :code:`graph` in the format read by
    :py:func:`load_citation_graph`."""

    lines = ["{} {} {} {} {}".format(HEADER, graph.n_docs, graph.n_links, graph.feature_dim, graph.n_classes)]
    lines += ["{} {}".format(i, j) for i, j in graph.edges]
    lines += [str(label) for label in graph.labels]

    Path(path).write_text("\n".join(lines) + "\n")


def graph_from_layout(layout, name=''):
    """
    The active part of :code:`layout` as a graph with no features and a single
    class, active slots renumbered in order.
    """

    active = layout.active
    index = {int(v): n for n, v in enumerate(active)}
    edges = tuple(sorted((index[i], index[j]) for i, j in layout.edges))

    return CitationGraph(len(active), edges, 0, (0,) * len(active), 1, name=name)


def convert_linqs(content, cites, out):
    """
    Convert a dataset distributed as a :code:`.content` file of
    :code:`<paper> <features...> <class>` lines and a :code:`.cites` file of
    :code:`<cited> <citing>` lines into a graph file.

    Documents are numbered in the order of the content file and classes in
    sorted order of their names. Citations naming unknown papers are skipped.

    Returns
    -------
    graph: CitationGraph
    """

    papers, classes, dims = [], [], set()
    for line in Path(content).read_text().splitlines():
        tokens = line.split()
        if len(tokens) < 2:
            continue

        paper_id, *rest = tokens

        papers.append(paper_id)
        classes.append(rest[-1])
        dims.add(len(rest) - 1)

    if len(dims) > 1:
        raiseError("DI01.1", path=content, line='*',
                   detail="feature lengths differ: {}".format(sorted(dims)))

    index = {p: n for n, p in enumerate(papers)}
    names = sorted(set(classes))
    label_of = {c: n for n, c in enumerate(names)}

    edges, skipped = [], 0
    for line in Path(cites).read_text().splitlines():
        tokens = line.split()
        if len(tokens) != 2:
            continue

        cited, citing = tokens
        if cited in index and citing in index:
            edges.append((index[citing], index[cited]))
        else:
            skipped += 1

    if skipped:
        log.warning("%s: skipped %d citations of unknown papers", cites, skipped)

    feature_dim = dims.pop() if dims else 0
    labels = [label_of[c] for c in classes]

    out = Path(out)
    lines = ["{} {} {} {} {}".format(HEADER, len(papers), len(edges), feature_dim, len(names))]
    lines += ["{} {}".format(i, j) for i, j in edges]
    lines += [str(label) for label in labels]
    out.write_text("\n".join(lines) + "\n")

    log.info("Converted %d papers and %d citations into %s", len(papers), len(edges), out)
    return load_citation_graph(out)


def sample_scenario(graph, n_docs, n_links=None, seed=0, capacity=None, fill_links=False,
                    plane=(1000., 1000.)):
    """
    Sample a user layout from a citation graph.

    Documents are drawn uniformly and renumbered in ascending id order. The
    links between them are kept, dropping a uniform selection beyond
    :code:`n_links`. With :code:`fill_links` set a smaller sample is topped
    up with random new links. Users are scattered uniformly on the plane and
    every task has the size given by the graph's feature dimension.

    Parameters
    ----------
    n_docs: int
        Number of users
    n_links: int, optional
        Most links to keep, all of them when not given
    seed: int
    capacity: int, optional
        Number of user slots, :code:`n_docs` when not given

    Returns
    -------
    layout: GraphLayout
    """

    if n_docs > graph.n_docs:
        raiseError("DI02.1", n=n_docs, total=graph.n_docs)

    rng = np.random.default_rng(seed)
    docs = np.sort(rng.choice(graph.n_docs, size=n_docs, replace=False))
    index = {int(d): n for n, d in enumerate(docs)}

    edges = [(index[i], index[j]) for i, j in graph.edges if i in index and j in index]

    if n_links is not None and len(edges) > n_links:
        keep = np.sort(rng.choice(len(edges), size=n_links, replace=False))
        edges = [edges[k] for k in keep]

    elif fill_links and n_links is not None and len(edges) < n_links:
        extra = sample_pairs(np.arange(n_docs), n_links - len(edges), rng, exclude=edges)
        log.debug("Topped up %d sampled links with %d random ones", len(edges), len(extra))
        edges += extra

    positions = random_positions(n_docs, plane, rng)
    sizes = np.full(n_docs, float(graph.task_size))

    return new_layout(n_docs, edges, positions, sizes, capacity=capacity)

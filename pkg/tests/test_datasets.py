from pathlib import Path
from pytest import raises, mark
from unittest.mock import patch


import numpy as np
from offloadsim.core.errors import ParseError, CountMismatch, SampleTooLarge
from offloadsim.core.datasets import (CitationGraph, load_citation_graph, save_citation_graph, graph_from_layout,
                                      convert_linqs, sample_scenario, task_size_from_dim)
from offloadsim.core.layout import GraphLayout


DATA = Path(__file__).parent / "data"


def write(tmp_path, text, name="graph.graph"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestLoad(object):

    def test_cora(self):

        graph = load_citation_graph(DATA / "cora.graph")

        assert graph.name == 'cora'
        assert graph.n_docs == 8
        assert graph.n_links == 10
        assert graph.n_classes == 3
        assert graph.labels == (0, 1, 2, 0, 1, 2, 0, 1)
        assert (0, 7) in graph.edges
        assert list(graph.edges) == sorted(graph.edges)
        assert repr(graph) == "CitationGraph cora: 8 documents, 10 links, 1433 features"

    @mark.parametrize("name, size", [("cora", 1433), ("citeseer", 1500), ("pubmed", 500)])
    def test_task_size(self, name, size):
        assert load_citation_graph(DATA / (name + ".graph")).task_size == size

    def test_clamp(self):

        assert task_size_from_dim(0) == 0
        assert task_size_from_dim(1500) == 1500
        assert task_size_from_dim(3703) == 1500

    def test_merge_and_loops(self, tmp_path, caplog):

        path = write(tmp_path, "GRAPH 3 3 5 1\n0 1\n1 0\n\n2 2\n0\n0\n0\n")
        graph = load_citation_graph(path)

        assert graph.edges == ((0, 1),)
        assert any("self-loops" in r.message for r in caplog.records)

    def test_save_load(self, tmp_path):

        graph = load_citation_graph(DATA / "pubmed.graph")
        save_citation_graph(graph, tmp_path / "pubmed.graph")

        assert load_citation_graph(tmp_path / "pubmed.graph") == graph


class TestLoadErrors(object):

    def test_bad_header(self, tmp_path):

        with raises(ParseError):
            load_citation_graph(write(tmp_path, "GRAF 1 0 0 1\n0\n"))

    def test_short_header(self, tmp_path):

        with raises(ParseError):
            load_citation_graph(write(tmp_path, "GRAPH 1 0 0\n0\n"))

    def test_empty(self, tmp_path):

        with raises(ParseError):
            load_citation_graph(write(tmp_path, "\n\n"))

    def test_negative(self, tmp_path):

        with raises(ParseError):
            load_citation_graph(write(tmp_path, "GRAPH -1 0 0 1\n"))

    def test_not_integers(self, tmp_path):

        with raises(ParseError):
            load_citation_graph(write(tmp_path, "GRAPH 2 1 0 1\n0 x\n0\n0\n"))

    def test_missing_links(self, tmp_path):

        with raises(CountMismatch):
            load_citation_graph(write(tmp_path, "GRAPH 2 2 0 1\n0 1\n0\n0\n"))

    def test_missing_labels(self, tmp_path):

        with raises(CountMismatch):
            load_citation_graph(write(tmp_path, "GRAPH 3 1 0 1\n0 1\n0\n0\n"))

    @patch('offloadsim.core.datasets.raiseError')
    def test_link_out_of_range(self, Err, tmp_path):

        path = write(tmp_path, "GRAPH 2 1 0 1\n0 2\n0\n0\n")
        try:
            load_citation_graph(path)
        except Exception:
            pass

        Err.assert_any_call("DI01.1", path=path, line=2, detail="link (0, 2) outside [0, 2)")

    def test_label_out_of_range(self, tmp_path):

        with raises(ParseError):
            load_citation_graph(write(tmp_path, "GRAPH 2 0 0 2\n0\n2\n"))

    def test_label_tokens(self, tmp_path):

        with raises(ParseError):
            load_citation_graph(write(tmp_path, "GRAPH 1 0 0 2\n0 1 1\n"))


class TestGraphFromLayout(object):

    def test_renumbered(self):

        layout = GraphLayout([1, 0, 1, 1], np.zeros((4, 2)), [(0, 3), (2, 3)], np.ones(4))
        graph = graph_from_layout(layout, name='synthetic')

        assert graph == CitationGraph(3, ((0, 2), (1, 2)), 0, (0, 0, 0), 1, name='synthetic')
        assert graph.task_size == 0


class TestConvert(object):

    def test_linqs(self, tmp_path, caplog):

        content = write(tmp_path, "p1 1 0 1 ClassB\np2 0 1 1 ClassA\n\np3 1 1 0 ClassB\n", "tiny.content")
        cites = write(tmp_path, "p1 p2\np3 p9\np2 p3\n", "tiny.cites")

        graph = convert_linqs(content, cites, tmp_path / "tiny.graph")

        assert graph.n_docs == 3
        assert graph.edges == ((0, 1), (1, 2))
        assert graph.feature_dim == 3
        assert graph.labels == (1, 0, 1)
        assert graph.n_classes == 2
        assert graph.name == 'tiny'
        assert any("unknown papers" in r.message for r in caplog.records)

    def test_ragged_features(self, tmp_path):

        content = write(tmp_path, "p1 1 0 A\np2 0 1 1 B\n", "tiny.content")
        cites = write(tmp_path, "", "tiny.cites")

        with raises(ParseError):
            convert_linqs(content, cites, tmp_path / "tiny.graph")


class TestSampleScenario(object):

    def setup_method(self):
        self.cora = load_citation_graph(DATA / "cora.graph")

    def test_whole_graph(self):

        layout = sample_scenario(self.cora, 8)

        assert layout.edges == self.cora.edges
        assert np.all(layout.task_size == 1433)

    def test_induced(self):

        layout = sample_scenario(self.cora, 5, seed=3, capacity=7)

        assert layout.capacity == 7
        assert layout.n_active == 5
        assert list(layout.active) == [0, 1, 2, 3, 4]
        assert layout.n_edges <= self.cora.n_links

    def test_link_limit(self):
        assert sample_scenario(self.cora, 8, n_links=3, seed=1).n_edges == 3

    def test_fill(self):

        layout = sample_scenario(self.cora, 8, n_links=20, seed=1, fill_links=True)

        assert layout.n_edges == 20
        assert set(self.cora.edges) <= set(layout.edges)

    def test_no_fill(self):
        assert sample_scenario(self.cora, 8, n_links=20, seed=1).n_edges == 10

    def test_positions(self):

        layout = sample_scenario(self.cora, 8, plane=(10., 20.), seed=2)
        assert np.all((layout.positions >= 0) & (layout.positions <= (10., 20.)))

    def test_seeded(self):
        assert sample_scenario(self.cora, 5, seed=4) == sample_scenario(self.cora, 5, seed=4)

    def test_too_large(self):

        with raises(SampleTooLarge):
            sample_scenario(self.cora, 9)

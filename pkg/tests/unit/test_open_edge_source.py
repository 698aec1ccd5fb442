import gzip
import io
import os
import tempfile
import unittest
from unittest import mock

import networkx as nx

from src.models.errors import ConfigError, GraphFormatError
from src.models.graph_model import from_networkx, generate_graph, load_edge_list, open_edge_source

class FakeResponse(io.BytesIO):
    """Stands in for a urllib3 response streamed with preload_content=False"""

    def __init__(self, payload: bytes, status: int = 200) -> None:
        super().__init__(payload)
        self.status = status
        self.released = False

    def release_conn(self) -> None:
        self.released = True

class TestOpenEdgeSource(unittest.TestCase):
    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.addCleanup(self.directory.cleanup)

    def test_local_file(self):
        path = os.path.join(self.directory.name, "edges.txt")
        with open(path, "w", encoding="utf-8") as stream:
            stream.write("0 1 0.5\n1 2 0.5\n")
        with open_edge_source(path) as stream:
            g = load_edge_list(stream)
        self.assertEqual((3, 2), (g.n, g.m))

    def test_gzip_file(self):
        path = os.path.join(self.directory.name, "edges.txt.gz")
        with gzip.open(path, "wt", encoding="utf-8") as stream:
            stream.write("a b\nb c\nc d\n")
        with open_edge_source(path) as stream:
            g = load_edge_list(stream)
        self.assertEqual((4, 3), (g.n, g.m))

    def test_remote_edge_list(self):
        response = FakeResponse(b"# snap header\n1 2\n2 3\n")
        with mock.patch("src.models.graph_model.urllib3.PoolManager") as pool:
            pool.return_value.request.return_value = response
            with open_edge_source("https://example.org/graph.txt") as stream:
                g = load_edge_list(stream)
            pool.return_value.request.assert_called_once_with("GET", "https://example.org/graph.txt",
                                                             preload_content=False)
        self.assertEqual((3, 2), (g.n, g.m))
        self.assertTrue(response.released)

    def test_remote_gzip_edge_list(self):
        response = FakeResponse(gzip.compress(b"x y\ny z\n"))
        with mock.patch("src.models.graph_model.urllib3.PoolManager") as pool:
            pool.return_value.request.return_value = response
            with open_edge_source("http://example.org/graph.txt.gz") as stream:
                g = load_edge_list(stream)
        self.assertEqual(("x", "y", "z"), g.labels)

    def test_remote_error_status(self):
        with mock.patch("src.models.graph_model.urllib3.PoolManager") as pool:
            pool.return_value.request.return_value = FakeResponse(b"", status=404)
            with self.assertRaises(GraphFormatError):
                with open_edge_source("https://example.org/missing.txt") as stream:
                    stream.read()

class TestSyntheticGraphs(unittest.TestCase):
    def test_gnm(self):
        g = generate_graph("gnm", 50, 200, seed=5)
        self.assertEqual(50, g.n)
        self.assertEqual(200, g.m)
        again = generate_graph("gnm", 50, 200, seed=5)
        self.assertEqual(list(zip(g.sources.tolist(), g.targets.tolist())),
                         list(zip(again.sources.tolist(), again.targets.tolist())))

    def test_scale_free_has_no_self_loops(self):
        g = generate_graph("scale_free", 100, seed=1)
        self.assertEqual(100, g.n)
        self.assertFalse(bool((g.sources == g.targets).any()))

    def test_unknown_generator(self):
        with self.assertRaises(ConfigError):
            generate_graph("lattice", 10)
        with self.assertRaises(ConfigError):
            generate_graph("gnm", 10)

    def test_from_networkx_keeps_probabilities(self):
        digraph = nx.DiGraph()
        digraph.add_edge("s", "t", p=0.4)
        digraph.add_edge("t", "u")
        g = from_networkx(digraph)
        self.assertEqual(("s", "t", "u"), g.labels)
        self.assertEqual(0.4, g.adjacency()["s"]["t"])
        self.assertFalse(g.has_probabilities)

if __name__ == '__main__':
    unittest.main()

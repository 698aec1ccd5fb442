import io
import unittest
from unittest import mock

from hypothesis import given, settings
from hypothesis import strategies as st

from src.models.errors import GraphFormatError, ProbabilityError
from src.models import graph_model
from src.models.graph_model import DirectedGraph, load_edge_list, write_edge_list

class TestLoadEdgeList(unittest.TestCase):
    def setUp(self):
        self.chain = load_edge_list(io.StringIO("0 1\n1 2\n"), directed=True)

    def test_chain_sizes(self):
        self.assertEqual(3, self.chain.n)
        self.assertEqual(2, self.chain.m)
        self.assertEqual(("0", "1", "2"), self.chain.labels)
        self.assertFalse(self.chain.has_probabilities)

    def test_comments_and_blank_lines_are_skipped(self):
        g = load_edge_list(io.StringIO("# header\n\na b 0.5\n# trailing\n"))
        self.assertEqual(2, g.n)
        self.assertEqual({"a": {"b": 0.5}, "b": {}}, g.adjacency())

    def test_probability_out_of_range(self):
        with self.assertRaises(ProbabilityError) as caught:
            load_edge_list(io.StringIO("0 1 1.5\n"))
        self.assertEqual("probability out of range at line 1", caught.exception.message)
        self.assertEqual(1, caught.exception.line)
        self.assertEqual(1, caught.exception.record()["line"])

    def test_zero_probability_rejected(self):
        with self.assertRaises(ProbabilityError):
            load_edge_list(io.StringIO("0 1 0.5\n1 2 0\n"))

    def test_malformed_line_reports_line_number(self):
        with self.assertRaises(GraphFormatError) as caught:
            load_edge_list(io.StringIO("0 1\n# c\n1 2 0.5 9\n"))
        self.assertEqual(3, caught.exception.line)

    def test_empty_input(self):
        with self.assertRaises(GraphFormatError):
            load_edge_list(io.StringIO("# nothing here\n"))

    def test_undirected_symmetric_pair_collapses(self):
        g = load_edge_list(io.StringIO("a b\nb a\n"), directed=False)
        self.assertEqual(2, g.n)
        self.assertEqual(2, g.m)

    def test_duplicate_keeps_first_probability(self):
        g = load_edge_list(io.StringIO("0 1 0.2\n0 1 0.7\n"))
        self.assertEqual(1, g.m)
        self.assertEqual(0.2, g.probabilities[0])

    def test_duplicates_and_self_loops_are_warned(self):
        with self.assertLogs("src.models.graph_model", level="WARNING") as logs:
            load_edge_list(io.StringIO("0 1 0.2\n0 1 0.7\n1 1 0.5\n"))
        messages = " ".join(logs.output)
        self.assertIn("collapsed 1 duplicate edges", messages)
        self.assertIn("dropped 1 self-loops", messages)

    def test_self_loop_registers_node_only(self):
        g = load_edge_list(io.StringIO("0 1\nz z\n"))
        self.assertEqual(3, g.n)
        self.assertEqual(1, g.m)

    def test_round_trip_keeps_adjacency(self):
        g = load_edge_list(io.StringIO("a b 0.25\nb c 0.1\nc a 1.0\nlonely lonely\n"))
        buffer = io.StringIO()
        write_edge_list(g, buffer)
        reloaded = load_edge_list(io.StringIO(buffer.getvalue()))
        self.assertEqual(g.adjacency(), reloaded.adjacency())
        self.assertEqual(g.labels, reloaded.labels)

    def test_isolated_marker_is_not_a_self_loop(self):
        g = load_edge_list(io.StringIO("a b 0.25\nlonely lonely\n"))
        buffer = io.StringIO()
        write_edge_list(g, buffer)
        with mock.patch.object(graph_model.logger, "warning") as warning:
            reloaded = load_edge_list(io.StringIO(buffer.getvalue()))
        warning.assert_not_called()
        self.assertEqual(3, reloaded.n)

    def test_adjacency_is_read_only(self):
        with self.assertRaises(ValueError):
            self.chain.sources[0] = 2

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.tuples(st.integers(0, 7), st.integers(0, 7), st.floats(0.01, 1.0)), min_size=1, max_size=30))
    def test_in_and_out_adjacency_agree(self, edges):
        text = "".join(f"{u} {v} {p}\n" for u, v, p in edges)
        g = load_edge_list(io.StringIO(text))
        outgoing = set()
        incoming = set()
        for u in range(g.n):
            targets, probabilities = g.out_neighbors(u)
            outgoing.update((u, v, p) for v, p in zip(targets.tolist(), probabilities.tolist()))
        for v in range(g.n):
            sources, probabilities = g.in_neighbors(v)
            incoming.update((u, v, p) for u, p in zip(sources.tolist(), probabilities.tolist()))
        self.assertEqual(outgoing, incoming)
        self.assertEqual(g.m, len(outgoing))
        self.assertEqual(g.m, int(g.in_degree.sum()))

    def test_from_edges_rejects_bad_endpoint(self):
        with self.assertRaises(GraphFormatError):
            DirectedGraph.from_edges(["a", "b"], [0], [2])

if __name__ == '__main__':
    unittest.main()

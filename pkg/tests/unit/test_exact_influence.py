import io
import itertools
import unittest

import numpy as np

from src.models.activation_model import ActivationSpec, ActivationType
from src.models.cascade_model import Cascade, CascadeConfig
from src.models.errors import ConfigError, OracleGuardError
from src.models.graph_model import DirectedGraph, load_edge_list
from src.models.oracle_model import exact_influence, exact_optimal, iter_realizations

def _dominated(seeds):
    return CascadeConfig((Cascade("c1", frozenset(seeds)),), ActivationSpec(ActivationType.DOMINATED))

class TestExactInfluence(unittest.TestCase):
    def setUp(self):
        self.edge = load_edge_list(io.StringIO("u v 0.5\n"))

    def test_single_edge(self):
        self.assertAlmostEqual(1.5, exact_influence(self.edge, CascadeConfig(), {0}))

    def test_conflict_lost_by_dominated_cascade(self):
        g = load_edge_list(io.StringIO("a c 1\nb c 1\n"))
        self.assertAlmostEqual(1.0, exact_influence(g, _dominated({0}), {2}))

    def test_path_regression_value(self):
        g = load_edge_list(io.StringIO("a b 0.5\nb c 0.5\n"))
        self.assertAlmostEqual(1.5, exact_influence(g, _dominated({0}), {1}))

    def test_empty_seed_set(self):
        self.assertEqual(0.0, exact_influence(self.edge, CascadeConfig(), set()))

    def test_realization_probabilities_sum_to_one(self):
        g = load_edge_list(io.StringIO("".join(f"{i} {i + 1} {0.1 + 0.05 * i}\n" for i in range(12))))
        realizations = list(iter_realizations(g))
        self.assertEqual(2 ** 12, len(realizations))
        self.assertAlmostEqual(1.0, sum(r.probability for r in realizations), delta=1e-9)
        self.assertEqual(list(range(2 ** 12)), [r.mask for r in realizations])
        last = realizations[-1]
        self.assertEqual(list(range(12)), last.live_edges(12))
        self.assertEqual([0, 2], realizations[0b101].live_edges(12))

    def test_edge_guard(self):
        g = load_edge_list(io.StringIO("".join(f"{i} {i + 1} 0.5\n" for i in range(21))))
        with self.assertRaises(OracleGuardError):
            exact_influence(g, CascadeConfig(), {0})

    def test_random_activation_rejected(self):
        cfg = CascadeConfig(activation=ActivationSpec(ActivationType.RANDOM))
        with self.assertRaises(ConfigError):
            exact_influence(self.edge, cfg, {0})

    def test_invariant_under_relabeling(self):
        edges = [(0, 1, 0.5), (1, 2, 0.4), (3, 2, 0.7), (0, 3, 0.6)]
        g = DirectedGraph.from_edges(["0", "1", "2", "3"], *zip(*edges))
        permutation = [2, 0, 3, 1]
        relabeled = DirectedGraph.from_edges(["0", "1", "2", "3"],
                                             [permutation[u] for u, _, _ in edges],
                                             [permutation[v] for _, v, _ in edges],
                                             [p for _, _, p in edges])
        before = exact_influence(g, _dominated({3}), {0})
        after = exact_influence(relabeled, _dominated({permutation[3]}), {permutation[0]})
        self.assertAlmostEqual(before, after, delta=1e-12)

class TestExactOptimal(unittest.TestCase):
    def setUp(self):
        # two chains and a half-live tail
        self.graph = load_edge_list(io.StringIO("0 1 1\n1 2 1\n3 4 1\n4 5 0.5\n"))

    def test_six_node_fixture(self):
        seeds, value = exact_optimal(self.graph, CascadeConfig(), 2)
        self.assertEqual(frozenset({0, 3}), seeds)
        self.assertAlmostEqual(5.5, value)

    def test_budget_equal_to_candidates(self):
        cfg = CascadeConfig(candidates=frozenset({1, 4}))
        seeds, value = exact_optimal(self.graph, cfg, 2)
        self.assertEqual(frozenset({1, 4}), seeds)
        self.assertAlmostEqual(2 + 1.5, value)

    def test_zero_budget(self):
        self.assertEqual((frozenset(), 0.0), exact_optimal(self.graph, CascadeConfig(), 0))

    def test_ties_go_to_smallest_set(self):
        g = load_edge_list(io.StringIO("a b 1\nc d 1\n"))
        seeds, value = exact_optimal(g, CascadeConfig(), 1)
        self.assertEqual(frozenset({0}), seeds)
        self.assertAlmostEqual(2.0, value)

    def test_optimum_dominates_every_subset(self):
        cfg = _dominated({5})
        seeds, value = exact_optimal(self.graph, cfg, 2)
        for combo in itertools.combinations(range(self.graph.n), 2):
            self.assertLessEqual(exact_influence(self.graph, cfg, combo), value + 1e-12)

    def test_subset_guard(self):
        g = load_edge_list(io.StringIO("".join(f"{i} {i + 1} 0.5\n" for i in range(19))))
        with self.assertRaises(OracleGuardError):
            exact_optimal(g, CascadeConfig(), 10)

if __name__ == '__main__':
    unittest.main()

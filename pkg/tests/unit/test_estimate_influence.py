import io
import os
import unittest
from unittest import mock

from src.models.activation_model import ActivationSpec, ActivationType
from src.models.cascade_model import Cascade, CascadeConfig, estimate_influence, seed_overlap
from src.models.errors import ConfigError
from src.models.graph_model import load_edge_list

class TestEstimateInfluence(unittest.TestCase):
    def setUp(self):
        patcher = mock.patch.dict(os.environ, {"MCIM_THREADS": "1"})
        patcher.start()
        self.addCleanup(patcher.stop)
        self.edge = load_edge_list(io.StringIO("u v 0.5\n"))

    def test_single_edge_half_probability(self):
        estimate = estimate_influence(self.edge, CascadeConfig(), {0}, trials=20000, rng_seed=3)
        self.assertLess(abs(estimate.mean - 1.5), 4 * estimate.stderr)
        self.assertGreater(estimate.stderr, 0.0)
        self.assertAlmostEqual(2 - estimate.mean, estimate.not_active_mean)

    def test_deterministic_instance_has_zero_stderr(self):
        g = load_edge_list(io.StringIO("a c 1\nb c 1\n"))
        cfg = CascadeConfig((Cascade("c1", frozenset({0})),), ActivationSpec(ActivationType.DOMINATING))
        estimate = estimate_influence(g, cfg, {2}, trials=50, rng_seed=0)
        self.assertEqual(2.0, estimate.mean)
        self.assertEqual(0.0, estimate.stderr)

    def test_empty_seeds(self):
        estimate = estimate_influence(self.edge, CascadeConfig(), set(), trials=10, rng_seed=0)
        self.assertEqual(0.0, estimate.mean)
        self.assertEqual(2.0, estimate.not_active_mean)

    def test_zero_trials(self):
        with self.assertRaises(ConfigError):
            estimate_influence(self.edge, CascadeConfig(), {0}, trials=0, rng_seed=0)

    def test_single_trial_has_zero_stderr(self):
        estimate = estimate_influence(self.edge, CascadeConfig(), {0}, trials=1, rng_seed=0)
        self.assertEqual(0.0, estimate.stderr)

    def test_reproducible(self):
        first = estimate_influence(self.edge, CascadeConfig(), {0}, trials=500, rng_seed=8)
        second = estimate_influence(self.edge, CascadeConfig(), {0}, trials=500, rng_seed=8)
        self.assertEqual(first, second)

    def test_per_node_frequencies(self):
        estimate = estimate_influence(self.edge, CascadeConfig(), {0}, trials=4000, rng_seed=1, per_node=True)
        self.assertEqual(1.0, estimate.per_node[0])
        self.assertAlmostEqual(0.5, estimate.per_node[1], delta=0.05)
        self.assertAlmostEqual(estimate.mean, float(estimate.per_node.sum()))

    def test_matches_plain_independent_cascade(self):
        # with no competitors the process is the classic independent cascade
        g = load_edge_list(io.StringIO("0 1 0.5\n0 2 0.5\n1 3 0.5\n2 3 0.5\n"))
        # P(3 active) = 1 - (1 - 0.25)^2
        exact = 1 + 0.5 + 0.5 + (1 - 0.75 ** 2)
        estimate = estimate_influence(g, CascadeConfig(), {0}, trials=20000, rng_seed=6)
        self.assertLess(abs(estimate.mean - exact), 4 * estimate.stderr)

class TestSeedOverlap(unittest.TestCase):
    def test_overlap(self):
        self.assertEqual(0.5, seed_overlap([1, 2], [2, 3]))
        self.assertEqual(1.0, seed_overlap([], []))
        self.assertEqual(0.0, seed_overlap([], [1]))

if __name__ == '__main__':
    unittest.main()

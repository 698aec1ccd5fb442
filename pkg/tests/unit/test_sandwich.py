import io
import math
import unittest

import numpy as np

from src.models.activation_model import ActivationSpec, ActivationType
from src.models.cascade_model import Cascade, CascadeConfig
from src.models.graph_model import load_edge_list
from src.models.sampling_model import EstimatorKind, TupleCollection, TupleSampler
from src.models.solver_model import GREEDY_RATIO, sandwich

FIXTURE = "0 1 0.6\n1 2 0.5\n3 2 0.7\n4 3 0.5\n4 5 0.8\n5 2 0.4\n6 4 0.9\n1 6 0.3\n7 1 0.5\n2 7 0.5\n"

class TestSandwich(unittest.TestCase):
    def setUp(self):
        self.graph = load_edge_list(io.StringIO(FIXTURE))

    def _collection(self, cfg, count=4000, seed=3):
        tuples = TupleSampler(self.graph, cfg).sample(np.random.SeedSequence(seed), count)
        return TupleCollection(self.graph, cfg, tuples=tuples)

    def test_no_competition_degenerates(self):
        coll = self._collection(CascadeConfig())
        result = sandwich(coll, 2)
        self.assertEqual(result.upper_seeds, result.lower_seeds)
        self.assertEqual(GREEDY_RATIO, result.gamma_lower)
        self.assertEqual(result.estimates["upper_seeds"], result.estimates["lower_seeds"])

    def test_dominating_makes_the_ratio_tight(self):
        cfg = CascadeConfig((Cascade("c1", frozenset({4, 7})),), ActivationSpec(ActivationType.DOMINATING))
        result = sandwich(self._collection(cfg), 2)
        self.assertEqual(GREEDY_RATIO, result.gamma_lower)
        estimates = result.estimates["upper_seeds"]
        self.assertEqual(estimates["upper"], estimates["exact_g"])

    def test_choice_is_the_better_greedy_set_under_g(self):
        for variant in (ActivationType.CASCADE_ORDER, ActivationType.DOMINATED, ActivationType.NEIGHBOR_ORDER):
            cfg = CascadeConfig((Cascade("c1", frozenset({4, 7})),), ActivationSpec(variant, rng_seed=2))
            coll = self._collection(cfg)
            result = sandwich(coll, 2)
            upper_g = coll.estimate(result.upper_seeds, EstimatorKind.EXACT_G)
            lower_g = coll.estimate(result.lower_seeds, EstimatorKind.EXACT_G)
            expected = result.lower_seeds if lower_g > upper_g else result.upper_seeds
            self.assertEqual(expected, result.seeds)
            self.assertLessEqual(len(result.seeds), 2)
            self.assertGreaterEqual(result.gamma_lower, 0.0)
            self.assertLessEqual(result.gamma_lower, 1 - 1 / math.e)
            self.assertEqual(coll.l, result.l)

if __name__ == '__main__':
    unittest.main()

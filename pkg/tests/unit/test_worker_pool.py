import io
import os
import unittest
from unittest import mock

from src.models.activation_model import ActivationSpec, ActivationType
from src.models.cascade_model import Cascade, CascadeConfig, estimate_influence
from src.models.errors import ConfigError
from src.models.graph_model import load_edge_list
from src.models.rng_model import Stream
from src.models.sampling_model import CHUNK_SIZE
from src.threads.worker_pool import WorkerPool, resolve_workers

FIXTURE = "0 1 0.6\n1 2 0.5\n3 2 0.7\n4 3 0.5\n4 5 0.8\n5 2 0.4\n6 4 0.9\n1 6 0.3\n7 1 0.5\n2 7 0.5\n"

class TestResolveWorkers(unittest.TestCase):
    def test_capped_by_environment(self):
        with mock.patch.dict(os.environ, {"MCIM_THREADS": "2"}):
            self.assertEqual(2, resolve_workers(8))
            self.assertEqual(1, resolve_workers(1))
            self.assertEqual(2, resolve_workers())

    def test_invalid_environment(self):
        with mock.patch.dict(os.environ, {"MCIM_THREADS": "many"}):
            with self.assertRaises(ConfigError):
                resolve_workers()

class TestWorkerPool(unittest.TestCase):
    def setUp(self):
        patcher = mock.patch.dict(os.environ, {"MCIM_THREADS": "2"})
        patcher.start()
        self.addCleanup(patcher.stop)
        self.graph = load_edge_list(io.StringIO(FIXTURE))
        self.cfg = CascadeConfig((Cascade("c1", frozenset({4})),), ActivationSpec(ActivationType.NEIGHBOR_ORDER))

    def test_samples_do_not_depend_on_worker_count(self):
        count = 2 * CHUNK_SIZE + 7
        with WorkerPool(self.graph, self.cfg, 1) as pool:
            single, next_single = pool.sample(5, Stream.COLLECTION, count)
        with WorkerPool(self.graph, self.cfg, 2) as pool:
            double, next_double = pool.sample(5, Stream.COLLECTION, count)
        self.assertEqual(3, next_single)
        self.assertEqual(next_single, next_double)
        self.assertEqual([(rr.root, rr.upper, rr.lower) for rr in single],
                         [(rr.root, rr.upper, rr.lower) for rr in double])

    def test_chunks_continue_where_they_stopped(self):
        with WorkerPool(self.graph, self.cfg, 1) as pool:
            whole, _ = pool.sample(5, Stream.OPT_LOWER, 2 * CHUNK_SIZE)
            head, next_chunk = pool.sample(5, Stream.OPT_LOWER, CHUNK_SIZE)
            tail, _ = pool.sample(5, Stream.OPT_LOWER, CHUNK_SIZE, next_chunk)
        self.assertEqual([rr.upper for rr in whole], [rr.upper for rr in head + tail])

    def test_trials_do_not_depend_on_worker_count(self):
        single = estimate_influence(self.graph, self.cfg, {0, 6}, 300, rng_seed=2, workers=1)
        double = estimate_influence(self.graph, self.cfg, {0, 6}, 300, rng_seed=2, workers=2)
        self.assertEqual(single, double)

    def test_outside_context(self):
        with self.assertRaises(RuntimeError):
            WorkerPool(self.graph, self.cfg, 1).sample(0, Stream.COLLECTION, 1)

if __name__ == '__main__':
    unittest.main()

import os
import tempfile
import unittest

from src.models.activation_model import ActivationType
from src.models.errors import ConfigError
from src.models.run_config_model import RunConfig, load_run, read_seed_file

FIXTURES = "tests/unit/fixtures"

GENERATED = {
    "graph": {"generator": {"kind": "gnm", "n": 20, "m": 40, "seed": 1}},
    "probabilities": {"scheme": "uniform", "p": 0.1},
    "cascades": [{"name": "c1", "seed_fraction": 0.25}],
    "solver": {"k": 2},
    "rng_seed": 5,
}

class TestRunConfig(unittest.TestCase):
    def setUp(self):
        self.path = os.path.join(FIXTURES, "solve_config.json")

    def test_load_fixture(self):
        config = RunConfig.load(self.path)
        self.assertEqual("rs", config.algorithm)
        self.assertEqual(1, config.params.k)
        self.assertEqual(11, config.params.rng_seed)
        self.assertEqual(200, config.params.evaluation_trials)
        self.assertTrue(os.path.isabs(config.graph.path))
        self.assertTrue(config.graph.path.endswith(os.path.join("fixtures", "fig_graph.txt")))
        self.assertEqual(config.raw, config.echo())

    def test_load_run_builds_graph_and_cascades(self):
        _, g, cfg = load_run(self.path)
        self.assertEqual(4, g.n)
        self.assertEqual(frozenset({g.label_index["a"]}), cfg.existing[0].seeds)
        self.assertEqual(ActivationType.DOMINATING, cfg.activation.variant)
        self.assertEqual(("c1", "c_new"), cfg.names)
        self.assertEqual(frozenset({g.label_index["b"]}),
                         read_seed_file(g, os.path.join(FIXTURES, "new_seeds.txt")))

    def test_unknown_keys_rejected(self):
        for data in ({**GENERATED, "bogus": 1},
                     {**GENERATED, "solver": {"k": 1, "epsilonn": 0.1}},
                     {**GENERATED, "graph": {"generator": {"kind": "gnm", "n": 5, "m": 4, "p": 1}}}):
            with self.assertRaises(ConfigError):
                RunConfig.from_dict(data)

    def test_required_fields(self):
        with self.assertRaises(ConfigError):
            RunConfig.from_dict({**GENERATED, "solver": {"epsilon": 0.1}})
        with self.assertRaises(ConfigError):
            RunConfig.from_dict({**GENERATED, "graph": {"path": "x.txt", "generator": {"kind": "gnm", "n": 5}}})
        with self.assertRaises(ConfigError):
            RunConfig.from_dict({**GENERATED, "probabilities": {"scheme": "frequency_weighted"}})
        with self.assertRaises(ConfigError):
            RunConfig.from_dict({**GENERATED, "solver": {"k": 1, "algorithm": "celf"}})

    def test_missing_files(self):
        with self.assertRaises(ConfigError):
            RunConfig.load(os.path.join(FIXTURES, "no_such_config.json"))
        with self.assertRaises(ConfigError):
            RunConfig.from_dict({**GENERATED, "graph": {"path": "no_such_graph.txt"}}, FIXTURES)

    def test_invalid_json(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "broken.json")
            with open(path, "w") as stream:
                stream.write("{\"graph\": ")
            with self.assertRaises(ConfigError):
                RunConfig.load(path)

    def test_seed_fraction_draws(self):
        config = RunConfig.from_dict(GENERATED)
        g = config.build_graph()
        first = config.build_cascades(g)
        self.assertEqual(5, len(first.existing[0].seeds))
        self.assertEqual(first.existing[0].seeds, config.build_cascades(g).existing[0].seeds)
        self.assertEqual(2, len(config.with_seed_fraction(0.1).build_cascades(g).existing[0].seeds))
        self.assertTrue(all(p == 0.1 for p in g.probabilities))
        with self.assertRaises(ConfigError):
            config.with_seed_fraction(0.0)

    def test_candidates_file(self):
        data = {**GENERATED, "graph": {"path": "fig_graph.txt"}, "probabilities": {"scheme": "from_file"},
                "cascades": [], "candidates": "candidates.txt"}
        config = RunConfig.from_dict(data, FIXTURES)
        g = config.build_graph()
        cfg = config.build_cascades(g)
        self.assertEqual(frozenset({g.label_index["b"], g.label_index["d"]}), cfg.candidates)

    def test_explicit_table(self):
        data = {
            "graph": {"path": "fig_graph.txt"},
            "cascades": [{"name": "c1", "seeds": "c1_seeds.txt"}],
            "activation": {"type": "explicit_table",
                           "table": [{"node": "c", "offers": [["a", "c1"], ["b", "c_new"]], "winner": "c_new"}]},
            "solver": {"k": 1},
        }
        config = RunConfig.from_dict(data, FIXTURES)
        g = config.build_graph()
        cfg = config.build_cascades(g)
        index = g.label_index
        key = (index["c"], frozenset({(index["a"], 0), (index["b"], 1)}))
        self.assertEqual({key: 1}, cfg.activation.table)

    def test_explicit_table_unknown_cascade(self):
        data = {
            "graph": {"path": "fig_graph.txt"},
            "activation": {"type": "explicit_table",
                           "table": [{"node": "c", "offers": [["a", "c9"]], "winner": "c9"}]},
            "solver": {"k": 1},
        }
        config = RunConfig.from_dict(data, FIXTURES)
        with self.assertRaises(ConfigError):
            config.build_cascades(config.build_graph())

    def test_with_k(self):
        config = RunConfig.load(self.path).with_k(3)
        self.assertEqual(3, config.params.k)
        self.assertEqual(0.5, config.params.epsilon)

if __name__ == '__main__':
    unittest.main()

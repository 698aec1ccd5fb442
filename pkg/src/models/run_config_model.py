# Filename: run_config_model.py

"""Model of a run configuration: JSON parsing, and building the graph and cascades it describes."""

import json
import logging
import os
from dataclasses import dataclass, field, replace
from typing import Any, Mapping, Optional

from src.models.activation_model import ActivationSpec, ActivationType
from src.models.cascade_model import Cascade, CascadeConfig
from src.models.errors import ConfigError, McimError
from src.models.graph_model import (DirectedGraph, ProbabilityScheme, SchemeType, assign_probabilities,
                                    generate_graph, load_edge_list, load_frequency_table, open_edge_source)
from src.models.rng_model import Stream, derive_int, generator
from src.models.solver_model import SolverParams

logger = logging.getLogger(__name__)

ALGORITHMS = ("rs", "nr_greedy", "maxinf")
DEFAULT_TRIALS = 1000

# Accepted keys per section; anything else is rejected
TOP_KEYS = {"graph", "probabilities", "cascades", "activation", "solver", "evaluate", "rng_seed", "candidates"}
GRAPH_KEYS = {"path", "directed", "generator"}
GENERATOR_KEYS = {"kind", "n", "m", "seed"}
PROBABILITY_KEYS = {"scheme", "p", "mean", "file", "rng_seed"}
CASCADE_KEYS = {"name", "seeds", "seed_fraction"}
ACTIVATION_KEYS = {"type", "rng_seed", "table"}
SOLVER_KEYS = {"algorithm", "k", "epsilon", "epsilon0", "epsilon1", "epsilon2", "N", "K", "max_tuples",
               "workers", "sample_multiplier"}
EVALUATE_KEYS = {"trials"}


def _check_keys(section: str, data: Any, allowed: set) -> dict:
    if not isinstance(data, Mapping):
        raise ConfigError(f"{section} must be an object")
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"unknown keys in {section}: {', '.join(unknown)}")
    return dict(data)


def _resolve(base_dir: str, path: str) -> str:
    if path.startswith(("http://", "https://")) or os.path.isabs(path):
        return path
    return os.path.normpath(os.path.join(base_dir, path))


def _require_file(path: str, what: str) -> str:
    if not path.startswith(("http://", "https://")) and not os.path.isfile(path):
        raise ConfigError(f"{what} file not found: {path}")
    return path


def read_labels(path: str) -> list:
    """One node label per line; blank lines and '#' comments ignored"""

    labels = []
    with open(path, "r", encoding="utf-8") as stream:
        for raw in stream:
            line = raw.strip()
            if line and not line.startswith("#"):
                labels.extend(line.split())
    return labels


def labels_to_indices(g: DirectedGraph, labels, what: str) -> frozenset:
    """Maps labels to node indices, naming the unknown ones"""

    index = g.label_index
    unknown = [label for label in labels if str(label) not in index]
    if unknown:
        raise ConfigError(f"unknown node labels in {what}: {unknown[:5]}")
    return frozenset(index[str(label)] for label in labels)


@dataclass(frozen=True)
class GraphSource:
    """
    Where the graph comes from: an edge-list path (local, .gz or http(s)) or a synthetic generator.

    :param path: Edge-list location, resolved against the config directory
    :type path: str
    :param directed: Whether each line is one directed edge
    :type directed: bool
    :param generator: Synthetic generator {kind, n, m, seed}
    :type generator: dict
    """

    path: Optional[str] = None
    directed: bool = True
    generator: Optional[dict] = None

    def load(self) -> DirectedGraph:
        if self.generator is not None:
            spec = self.generator
            return generate_graph(spec["kind"], int(spec["n"]), spec.get("m"), int(spec.get("seed", 0)))
        with open_edge_source(self.path) as stream:
            return load_edge_list(stream, self.directed)


@dataclass(frozen=True)
class CascadeSpec:
    """An existing cascade: seeds from a label file or a fraction of nodes drawn at random"""

    name: str
    seeds: Optional[str] = None
    seed_fraction: Optional[float] = None


@dataclass(frozen=True)
class RunConfig:
    """
    A complete, reproducible run description.

    :param graph: Graph source
    :type graph: GraphSource
    :param scheme: Probability assignment applied after loading
    :type scheme: ProbabilityScheme
    :param frequency_file: Action-count table for frequency_weighted
    :type frequency_file: str
    :param cascades: Existing cascades
    :type cascades: tuple[CascadeSpec, ...]
    :param activation: Activation specification, table labels still unresolved
    :type activation: dict
    :param algorithm: One of rs, nr_greedy, maxinf
    :type algorithm: str
    :param params: Solver parameters
    :type params: SolverParams
    :param trials: Monte-Carlo trials for evaluation
    :type trials: int
    :param rng_seed: Root seed of every stream
    :type rng_seed: int
    :param candidates: Candidate file path, None for all nodes
    :type candidates: str
    :param raw: The parsed JSON, echoed in reports
    :type raw: dict
    """

    graph: GraphSource
    scheme: ProbabilityScheme
    cascades: tuple = ()
    activation: dict = field(default_factory=dict)
    algorithm: str = "rs"
    params: SolverParams = field(default_factory=lambda: SolverParams(k=1))
    trials: int = DEFAULT_TRIALS
    rng_seed: int = 0
    candidates: Optional[str] = None
    frequency_file: Optional[str] = None
    raw: dict = field(default_factory=dict, compare=False, repr=False)

    @classmethod
    def load(cls, path: str) -> "RunConfig":
        """Reads a JSON config file; relative paths resolve against its directory"""

        try:
            with open(path, "r", encoding="utf-8") as stream:
                data = json.load(stream)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as error:
            raise ConfigError(f"config {path} is not valid JSON: {error}") from None
        return cls.from_dict(data, os.path.dirname(os.path.abspath(path)))

    @classmethod
    def from_dict(cls, data: Mapping, base_dir: str = ".") -> "RunConfig":
        data = _check_keys("config", data, TOP_KEYS)
        rng_seed = int(data.get("rng_seed", 0))

        graph_data = _check_keys("graph", data.get("graph", {}), GRAPH_KEYS)
        generator_spec = graph_data.get("generator")
        if generator_spec is not None:
            generator_spec = _check_keys("graph.generator", generator_spec, GENERATOR_KEYS)
            if "kind" not in generator_spec or "n" not in generator_spec:
                raise ConfigError("graph.generator needs kind and n")
        path = graph_data.get("path")
        if (path is None) == (generator_spec is None):
            raise ConfigError("give exactly one of graph.path and graph.generator")
        if path is not None:
            path = _require_file(_resolve(base_dir, path), "graph")
        graph = GraphSource(path, bool(graph_data.get("directed", True)), generator_spec)

        prob_data = _check_keys("probabilities", data.get("probabilities", {"scheme": "from_file"}), PROBABILITY_KEYS)
        try:
            variant = SchemeType(prob_data.get("scheme", "from_file"))
        except ValueError:
            raise ConfigError(f"unknown probability scheme {prob_data.get('scheme')!r}") from None
        frequency_file = None
        if variant is SchemeType.FREQUENCY_WEIGHTED:
            if "file" not in prob_data:
                raise ConfigError("frequency_weighted needs probabilities.file")
            frequency_file = _require_file(_resolve(base_dir, prob_data["file"]), "frequency")
        scheme_seed = prob_data.get("rng_seed")
        scheme = ProbabilityScheme(
            variant,
            p=prob_data.get("p"),
            mean=prob_data.get("mean"),
            rng_seed=int(scheme_seed) if scheme_seed is not None else derive_int(rng_seed, Stream.PROBABILITIES),
        )

        cascades = []
        for i, entry in enumerate(data.get("cascades", [])):
            entry = _check_keys(f"cascades[{i}]", entry, CASCADE_KEYS)
            if "name" not in entry:
                raise ConfigError(f"cascades[{i}] needs a name")
            if ("seeds" in entry) == ("seed_fraction" in entry):
                raise ConfigError(f"cascades[{i}] needs exactly one of seeds and seed_fraction")
            seeds, fraction = entry.get("seeds"), entry.get("seed_fraction")
            if seeds is not None:
                seeds = _require_file(_resolve(base_dir, seeds), f"cascades[{i}] seeds")
            if fraction is not None and not 0.0 < float(fraction) <= 1.0:
                raise ConfigError(f"cascades[{i}].seed_fraction must lie in (0, 1], got {fraction}")
            cascades.append(CascadeSpec(str(entry["name"]), seeds, float(fraction) if fraction is not None else None))

        activation = _check_keys("activation", data.get("activation", {}), ACTIVATION_KEYS)
        activation.setdefault("type", "cascade_order")
        ActivationType.parse(activation["type"])

        solver = _check_keys("solver", data.get("solver", {}), SOLVER_KEYS)
        algorithm = solver.pop("algorithm", "rs")
        if algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {algorithm!r}, expected one of {', '.join(ALGORITHMS)}")
        if "k" not in solver:
            raise ConfigError("solver.k is required")
        evaluate = _check_keys("evaluate", data.get("evaluate", {}), EVALUATE_KEYS)
        trials = int(evaluate.get("trials", DEFAULT_TRIALS))
        if trials < 1:
            raise ConfigError(f"evaluate.trials must be >= 1, got {trials}")
        try:
            params = SolverParams(rng_seed=rng_seed, evaluation_trials=trials, **solver)
        except TypeError as error:
            raise ConfigError(f"invalid solver section: {error}") from None

        candidates = data.get("candidates", "all")
        candidates = None if candidates == "all" else _require_file(_resolve(base_dir, candidates), "candidates")

        return cls(graph, scheme, tuple(cascades), activation, algorithm, params, trials, rng_seed, candidates,
                   frequency_file, raw=dict(data))

    def with_k(self, k: int) -> "RunConfig":
        return replace(self, params=replace(self.params, k=k))

    def with_seed_fraction(self, fraction: float) -> "RunConfig":
        """Every existing cascade re-drawn with the given seed fraction"""

        if not 0.0 < fraction <= 1.0:
            raise ConfigError(f"seed fraction must lie in (0, 1], got {fraction}")
        return replace(self, cascades=tuple(CascadeSpec(c.name, None, fraction) for c in self.cascades))

    def build_graph(self) -> DirectedGraph:
        """Loads the graph and assigns probabilities"""

        g = self.graph.load()
        scheme = self.scheme
        if scheme.variant is SchemeType.FREQUENCY_WEIGHTED:
            with open_edge_source(self.frequency_file) as stream:
                scheme = replace(scheme, frequencies=load_frequency_table(stream, g))
        g = assign_probabilities(g, scheme)
        logger.info("graph: %s", g.summary(scheme))
        return g

    def _cascade_seeds(self, g: DirectedGraph, index: int, spec: CascadeSpec) -> frozenset:
        if spec.seeds is not None:
            return labels_to_indices(g, read_labels(spec.seeds), f"seeds of {spec.name}")
        count = max(1, int(round(spec.seed_fraction * g.n)))
        rng = generator(self.rng_seed, Stream.SEED_SELECTION, index)
        return frozenset(rng.choice(g.n, size=count, replace=False).tolist())

    def _activation_spec(self, g: DirectedGraph, names: list) -> ActivationSpec:
        variant = ActivationType.parse(self.activation["type"])
        table = None
        if variant is ActivationType.EXPLICIT_TABLE:
            table = self._activation_table(g, names)
        return ActivationSpec(variant, int(self.activation.get("rng_seed", self.rng_seed)), table)

    def _activation_table(self, g: DirectedGraph, names: list) -> dict:
        """
        JSON entries {"node": label, "offers": [[neighbor label, cascade name], ...], "winner": name}.

        A seed-time conflict is written with the node itself as the neighbor.
        """

        entries = self.activation.get("table")
        if not isinstance(entries, list):
            raise ConfigError("explicit_table activation needs activation.table as a list")
        cascade_id = {name: i for i, name in enumerate(names)}

        def _cascade(name: str) -> int:
            if name not in cascade_id:
                raise ConfigError(f"unknown cascade {name!r} in activation.table")
            return cascade_id[name]

        table = {}
        for entry in entries:
            node = next(iter(labels_to_indices(g, [entry["node"]], "activation.table")))
            offers = frozenset(
                (next(iter(labels_to_indices(g, [neighbor], "activation.table"))), _cascade(cascade))
                for neighbor, cascade in entry["offers"]
            )
            table[(node, offers)] = _cascade(entry["winner"])
        return table

    def build_cascades(self, g: DirectedGraph) -> CascadeConfig:
        """Existing cascades, activation and candidates resolved against g"""

        existing = tuple(Cascade(spec.name, self._cascade_seeds(g, i, spec)) for i, spec in enumerate(self.cascades))
        new_name = "c_new"
        names = [cascade.name for cascade in existing] + [new_name]
        candidates = None
        if self.candidates is not None:
            candidates = labels_to_indices(g, read_labels(self.candidates), "candidates")
        cfg = CascadeConfig(existing, self._activation_spec(g, names), new_name, candidates)
        cfg.validate(g)
        return cfg

    def echo(self) -> dict:
        """The parsed config as given, for reports"""
        return self.raw


def load_run(path: str) -> tuple:
    """(RunConfig, graph, cascade config) for a config path"""

    try:
        config = RunConfig.load(path)
        g = config.build_graph()
        return config, g, config.build_cascades(g)
    except McimError:
        raise
    except (KeyError, TypeError, ValueError) as error:
        raise ConfigError(f"invalid config {path}: {error}") from None


def read_seed_file(g: DirectedGraph, path: str) -> frozenset:
    """Seed labels of the new cascade for evaluation"""

    if not os.path.isfile(path):
        raise ConfigError(f"seeds file not found: {path}")
    return labels_to_indices(g, read_labels(path), path)
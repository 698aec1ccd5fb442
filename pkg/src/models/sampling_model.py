# Filename: sampling_model.py

"""Reverse sandwich sampling: RR-tuples, their evaluators and the coverage estimators built on them."""

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, Optional, Sequence, TextIO

import numpy as np

from src.models.activation_model import ActivationRules
from src.models.cascade_model import CascadeConfig, spread
from src.models.errors import EmptyCollectionError
from src.models.graph_model import DirectedGraph

logger = logging.getLogger(__name__)

CHUNK_SIZE = 2048


@dataclass(frozen=True, eq=False)
class RRTuple:
    """
    One reverse-reachable sample rooted at root.

    upper is V(G_v); lower drops the last BFS layer when that layer reached an existing seed.
    Edges keep their original direction (u1 -> u2 with u2 closer to the root).

    :param root: Root node v
    :type root: int
    :param nodes: V(G_v) in discovery order
    :type nodes: tuple[int, ...]
    :param edges: E(G_v)
    :type edges: tuple[tuple[int, int], ...]
    :param upper: Upper seed set
    :type upper: frozenset
    :param lower: Lower seed set
    :type lower: frozenset
    :param hit_existing: Whether the search stopped at an existing seed
    :type hit_existing: bool
    :param activation_seed: Frozen seed for random activation inside the tuple
    :type activation_seed: int
    :param edges_tested: Number of edge tests performed while sampling
    :type edges_tested: int
    """

    root: int
    nodes: tuple
    edges: tuple
    upper: frozenset
    lower: frozenset
    hit_existing: bool
    activation_seed: int
    edges_tested: int

    @cached_property
    def _successor_lists(self) -> dict:
        successors = defaultdict(list)
        for u1, u2 in self.edges:
            successors[u1].append(u2)
        return {u: (sorted(targets), [1.0] * len(targets)) for u, targets in successors.items()}

    def successors(self, u: int) -> tuple:
        """Out-edges of u inside G_v, all with probability 1"""
        return self._successor_lists.get(u, ((), ()))


class TupleSampler:
    """
    Generates RR-tuples on one graph for one cascade configuration.

    Visited marks are epoch-stamped, so nothing is cleared between tuples.

    :param graph: Graph to sample from
    :type graph: DirectedGraph
    :param config: Cascade configuration (only the existing seeds matter here)
    :type config: CascadeConfig
    """

    def __init__(self, graph: DirectedGraph, config: CascadeConfig) -> None:
        graph.require_probabilities()
        self.graph = graph
        self.config = config
        self._existing = config.existing_mask(graph.n)
        self._stamp = np.zeros(graph.n, dtype=np.int64)
        self._epoch = 0

    def rr_tuple_of(self, v: int, rng: np.random.Generator) -> RRTuple:
        """RR-tuple of v, following the reverse BFS layer by layer"""

        g = self.graph
        activation_seed = int(rng.integers(2 ** 63 - 1))
        self._epoch += 1
        epoch = self._epoch
        stamp = self._stamp

        stamp[v] = epoch
        nodes = [v]
        edges = []
        upper = set()
        lower = set()
        tested = 0
        hit_existing = False
        layer = [v]

        while layer:
            if self._existing[layer].any():
                upper.update(layer)
                hit_existing = True
                break
            upper.update(layer)
            lower.update(layer)

            reached = {}
            for u2 in sorted(layer):
                sources, probabilities = g.in_neighbors(u2)
                if not len(sources):
                    continue
                fresh = stamp[sources] != epoch
                tested += int(np.count_nonzero(fresh))
                live = fresh & (rng.random(len(sources)) <= probabilities)
                for u1 in sources[live].tolist():
                    edges.append((u1, u2))
                    reached.setdefault(u1, None)

            layer = list(reached)
            if layer:
                stamp[layer] = epoch
                nodes.extend(layer)

        return RRTuple(v, tuple(nodes), tuple(edges), frozenset(upper), frozenset(lower),
                       hit_existing, activation_seed, tested)

    def rr_tuple(self, rng: np.random.Generator) -> RRTuple:
        """RR-tuple of a uniformly random root"""

        return self.rr_tuple_of(int(rng.integers(self.graph.n)), rng)

    def sample(self, seed: np.random.SeedSequence, count: int) -> list:
        """count tuples from one chunk stream"""

        rng = np.random.Generator(np.random.PCG64(seed))
        return [self.rr_tuple(rng) for _ in range(count)]


def generate_rr_tuple_of(g: DirectedGraph, cfg: CascadeConfig, v: int, rng: np.random.Generator) -> RRTuple:
    return TupleSampler(g, cfg).rr_tuple_of(v, rng)


def generate_rr_tuple(g: DirectedGraph, cfg: CascadeConfig, rng: np.random.Generator) -> RRTuple:
    return TupleSampler(g, cfg).rr_tuple(rng)


def eval_upper(rr: RRTuple, seeds: Iterable[int]) -> int:
    return int(not rr.upper.isdisjoint(seeds))


def eval_lower(rr: RRTuple, seeds: Iterable[int]) -> int:
    return int(not rr.lower.isdisjoint(seeds))


def eval_g(rr: RRTuple, cfg: CascadeConfig, seeds: Iterable[int], rules: ActivationRules,
           shortcut: bool = True) -> int:
    """
    1 iff the root ends up active in the new cascade inside the tuple's own instance.

    That instance is G_v with every probability 1, existing seeds restricted to V(G_v) and the
    same activation functions. A seed outside upper can never reach the root; a seed in lower
    reaches it strictly before any existing cascade can, so only seeds confined to the last
    layer need a simulation (disable with shortcut=False).
    """

    seeds = frozenset(seeds)
    inside = seeds & rr.upper
    if not inside:
        return 0
    if shortcut and not inside.isdisjoint(rr.lower):
        return 1

    seed_sets = [cascade.seeds & rr.upper for cascade in cfg.existing] + [inside]
    activation_rng = None
    if not rules.deterministic:
        activation_rng = np.random.Generator(np.random.PCG64(rr.activation_seed))
    state = spread(rules, seed_sets, rr.successors, None, activation_rng)
    return int(state.state_of(rr.root) == cfg.new_id)


class EstimatorKind(Enum):
    EXACT_G = "exact_g"
    UPPER = "upper"
    LOWER = "lower"


class TupleCollection:
    """
    A collection of RR-tuples with inverted coverage indices.

    :param graph: Graph the tuples were sampled from
    :type graph: DirectedGraph
    :param config: Cascade configuration used for exact evaluation
    :type config: CascadeConfig
    :param rules: Compiled activation rules, compiled from config when omitted
    :type rules: ActivationRules
    """

    def __init__(self, graph: DirectedGraph, config: CascadeConfig, rules: Optional[ActivationRules] = None,
                 tuples: Iterable[RRTuple] = ()) -> None:
        self.graph = graph
        self.n = graph.n
        self.config = config
        self.rules = rules or config.compile(graph)
        self.tuples = []
        self.upper_index = defaultdict(list)
        self.lower_index = defaultdict(list)
        self._arrays = {}
        self.extend(tuples)

    @property
    def l(self) -> int:
        return len(self.tuples)

    def __len__(self) -> int:
        return len(self.tuples)

    def extend(self, tuples: Iterable[RRTuple]) -> None:
        """Appends tuples in order and indexes them"""

        for rr in tuples:
            tid = len(self.tuples)
            self.tuples.append(rr)
            for node in rr.upper:
                self.upper_index[node].append(tid)
            for node in rr.lower:
                self.lower_index[node].append(tid)
        self._arrays.clear()

    def covering(self, node: int, kind: EstimatorKind) -> np.ndarray:
        """Ids of the tuples whose upper (or lower) set contains node"""

        key = (node, kind)
        if key not in self._arrays:
            index = self.lower_index if kind is EstimatorKind.LOWER else self.upper_index
            self._arrays[key] = np.asarray(index.get(node, ()), dtype=np.int64)
        return self._arrays[key]

    def _require_tuples(self) -> None:
        if not self.tuples:
            raise EmptyCollectionError("the tuple collection is empty")

    def coverage_count(self, seeds: Iterable[int], kind: EstimatorKind) -> int:
        """Number of tuples with eval_upper (or eval_lower) equal to 1"""

        index = self.lower_index if kind is EstimatorKind.LOWER else self.upper_index
        covered = set()
        for node in set(seeds):
            covered.update(index.get(node, ()))
        return len(covered)

    def g_values(self, seeds: Iterable[int]) -> dict:
        """eval_g for every tuple whose upper set meets seeds; all other tuples evaluate to 0"""

        seeds = frozenset(seeds)
        touched = set()
        for node in seeds:
            touched.update(self.upper_index.get(node, ()))
        return {tid: eval_g(self.tuples[tid], self.config, seeds, self.rules) for tid in sorted(touched)}

    def g_count(self, seeds: Iterable[int]) -> int:
        return sum(self.g_values(seeds).values())

    def count(self, seeds: Iterable[int], kind: EstimatorKind) -> int:
        self._require_tuples()
        if kind is EstimatorKind.EXACT_G:
            return self.g_count(seeds)
        return self.coverage_count(seeds, kind)

    def estimate(self, seeds: Iterable[int], kind: EstimatorKind) -> float:
        """n times the mean of the chosen evaluator over the collection"""

        return self.n * self.count(seeds, kind) / self.l

    def stats(self) -> dict:
        """Mean tuple sizes, mean edges tested and the fraction that hit an existing seed"""

        if not self.tuples:
            return {"tuples": 0}
        return {
            "tuples": self.l,
            "mean_upper_size": float(np.mean([len(rr.upper) for rr in self.tuples])),
            "mean_lower_size": float(np.mean([len(rr.lower) for rr in self.tuples])),
            "mean_edges_tested": float(np.mean([rr.edges_tested for rr in self.tuples])),
            "hit_existing_fraction": float(np.mean([rr.hit_existing for rr in self.tuples])),
        }


def estimate(coll: TupleCollection, seeds: Iterable[int], kind: EstimatorKind) -> float:
    return coll.estimate(seeds, kind)


def write_collection(coll: TupleCollection, stream: TextIO, labels: Optional[Sequence[str]] = None) -> None:
    """Debug dump: one tab-separated record per tuple (root, upper, lower, edges)"""

    def _name(v: int) -> str:
        return labels[v] if labels is not None else str(v)

    stream.write("# root\tupper\tlower\tedges\n")
    for rr in coll.tuples:
        stream.write("\t".join([
            _name(rr.root),
            ",".join(_name(v) for v in sorted(rr.upper)),
            ",".join(_name(v) for v in sorted(rr.lower)),
            ",".join(f"{_name(u)}>{_name(v)}" for u, v in rr.edges),
        ]) + "\n")

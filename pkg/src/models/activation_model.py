# Filename: activation_model.py

"""Activation functions: which arriving cascade wins a node when several arrive in the same round."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional, Sequence

import numpy as np

from src.models.errors import ActivationError, ConfigError
from src.models.graph_model import DirectedGraph
from src.models.rng_model import Stream, generator


class ActivationType(Enum):
    CASCADE_ORDER = "cascade_order"
    NEIGHBOR_ORDER = "neighbor_order"
    RANDOM = "random"
    DOMINATING = "dominating"
    DOMINATED = "dominated"
    MAJORITY = "majority"
    EXPLICIT_TABLE = "explicit_table"

    @classmethod
    def parse(cls, name: str) -> "ActivationType":
        """Accepts the variant names and the short experiment names CA/NA/RA"""

        aliases = {"ca": cls.CASCADE_ORDER, "na": cls.NEIGHBOR_ORDER, "ra": cls.RANDOM}
        key = str(name).strip().lower()
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            raise ConfigError(f"unknown activation type {name!r}") from None

    @property
    def deterministic(self) -> bool:
        return self is not ActivationType.RANDOM


@dataclass(frozen=True)
class ActivationSpec:
    """
    Activation function specification shared by every node.

    Priority orders are drawn once from rng_seed and stay fixed; the random variant draws its
    choices from the stream handed to resolve().

    :param variant: Activation rule
    :type variant: ActivationType
    :param rng_seed: Seed of the per-node priority orders
    :type rng_seed: int
    :param table: explicit_table entries {(node, frozenset of (neighbor, cascade)): winner}
    :type table: Mapping
    """

    variant: ActivationType = ActivationType.CASCADE_ORDER
    rng_seed: int = 0
    table: Optional[Mapping] = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.variant is ActivationType.EXPLICIT_TABLE and self.table is None:
            raise ConfigError("explicit_table activation needs a table")


class ActivationRules:
    """
    ActivationSpec compiled against a graph and a cascade count.

    Cascade ids are 0..n_cascades-1 and the new cascade is new_cascade. The cascade order of
    node v is the permutation row cascade_rank[v]; higher rank wins. Neighbor priorities are a
    random permutation over edge indices, so each node sees a total order of its in-neighbors.

    :param spec: Activation specification
    :type spec: ActivationSpec
    :param graph: Graph the orders are drawn for
    :type graph: DirectedGraph
    :param n_cascades: Number of cascades including the new one
    :type n_cascades: int
    :param new_cascade: Id of the new cascade
    :type new_cascade: int
    """

    def __init__(self, spec: ActivationSpec, graph: DirectedGraph, n_cascades: int, new_cascade: int) -> None:
        self.spec = spec
        self.variant = spec.variant
        self.n_cascades = n_cascades
        self.new_cascade = new_cascade
        self._edge_index = graph.edge_index if spec.variant is ActivationType.NEIGHBOR_ORDER else None

        orders = generator(spec.rng_seed, Stream.ACTIVATION_ORDERS, 0)
        base = np.tile(np.arange(n_cascades, dtype=np.int32), (graph.n, 1))
        self.cascade_rank = orders.permuted(base, axis=1)
        if spec.variant is ActivationType.NEIGHBOR_ORDER:
            self.neighbor_rank = generator(spec.rng_seed, Stream.ACTIVATION_ORDERS, 1).permutation(graph.m)
        else:
            self.neighbor_rank = None

    @property
    def deterministic(self) -> bool:
        return self.variant.deterministic

    def _by_cascade_order(self, node: int, cascades: Sequence[int]) -> int:
        ranks = self.cascade_rank[node]
        return max(cascades, key=lambda c: ranks[c])

    def _neighbor_priority(self, neighbor: int, node: int) -> int:
        return int(self.neighbor_rank[self._edge_index[(neighbor, node)]])

    def resolve(self, node: int, offers: Sequence[tuple], rng: Optional[np.random.Generator] = None) -> int:
        """
        Winner among the offered cascades.

        :param node: Node being activated
        :param offers: (neighbor, cascade) pairs; the neighbor is the node itself for seed conflicts
        :param rng: Stream for the random variant
        """

        if not offers:
            raise ActivationError(f"empty offer set at node {node}")
        cascades = sorted({cascade for _, cascade in offers})
        if len(cascades) == 1:
            return cascades[0]

        variant = self.variant
        if variant is ActivationType.CASCADE_ORDER:
            return self._by_cascade_order(node, cascades)

        if variant is ActivationType.NEIGHBOR_ORDER:
            neighbors = [(neighbor, cascade) for neighbor, cascade in offers if neighbor != node]
            if not neighbors:
                # seed-time conflict: the node has no in-edge to itself
                return self._by_cascade_order(node, cascades)
            _, winner = max(neighbors, key=lambda offer: self._neighbor_priority(offer[0], node))
            return winner

        if variant is ActivationType.RANDOM:
            if rng is None:
                raise ActivationError("random activation needs a random stream")
            return cascades[int(rng.integers(len(cascades)))]

        if variant is ActivationType.DOMINATING:
            if self.new_cascade in cascades:
                return self.new_cascade
            return self._by_cascade_order(node, cascades)

        if variant is ActivationType.DOMINATED:
            return self._by_cascade_order(node, [c for c in cascades if c != self.new_cascade])

        if variant is ActivationType.MAJORITY:
            supporters = {}
            for neighbor, cascade in offers:
                supporters.setdefault(cascade, set()).add(neighbor)
            top = max(len(s) for s in supporters.values())
            return self._by_cascade_order(node, [c for c in cascades if len(supporters[c]) == top])

        key = (node, frozenset(offers))
        try:
            winner = self.spec.table[key]
        except KeyError:
            raise ActivationError(f"no table entry for node {node} and offers {sorted(offers)}") from None
        if winner not in cascades:
            raise ActivationError(f"table winner {winner} at node {node} was not offered")
        return winner


def resolve_activation(rules: ActivationRules, node: int, offers: Sequence[tuple],
                       rng: Optional[np.random.Generator] = None) -> int:
    """Module-level form of ActivationRules.resolve"""

    return rules.resolve(node, offers, rng)

# Filename: graph_model.py

"""Model that holds the directed graph, reads edge lists and assigns propagation probabilities."""

# Import contextlib, gzip and io to hand every edge source out as a text stream
import contextlib
import gzip
import io
import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Optional, TextIO

import networkx as nx
import numpy as np
# Import urllib3 to fetch remote edge lists (SNAP datasets are published as URLs)
import urllib3

from src.models.errors import ConfigError, GraphFormatError, ProbabilityError

logger = logging.getLogger(__name__)

MISSING = float("nan")


@dataclass(frozen=True, eq=False)
class DirectedGraph:
    """
    Immutable weighted digraph with dense 0-based node indices.

    Edges keep their ingestion order; that order is the edge index. Out-adjacency lists
    each node's edges by ascending edge index, in-adjacency by ascending source index.

    :param labels: Original node label of every index
    :type labels: tuple[str, ...]
    :param sources: Source index of every edge
    :type sources: np.ndarray
    :param targets: Target index of every edge
    :type targets: np.ndarray
    :param probabilities: Propagation probability of every edge, NaN where the edge list gave none
    :type probabilities: np.ndarray
    """

    labels: tuple
    sources: np.ndarray
    targets: np.ndarray
    probabilities: np.ndarray
    out_ptr: np.ndarray = field(repr=False)
    out_edges: np.ndarray = field(repr=False)
    in_ptr: np.ndarray = field(repr=False)
    in_edges: np.ndarray = field(repr=False)

    @classmethod
    def from_edges(cls, labels: Iterable[str], sources: Iterable[int], targets: Iterable[int],
                   probabilities: Optional[Iterable[float]] = None) -> "DirectedGraph":
        """Builds both adjacency directions from parallel edge arrays"""

        labels = tuple(str(label) for label in labels)
        n = len(labels)
        sources = np.asarray(list(sources) if not isinstance(sources, np.ndarray) else sources, dtype=np.int64)
        targets = np.asarray(list(targets) if not isinstance(targets, np.ndarray) else targets, dtype=np.int64)
        m = len(sources)
        if probabilities is None:
            probabilities = np.full(m, MISSING)
        else:
            probabilities = np.asarray(list(probabilities) if not isinstance(probabilities, np.ndarray)
                                       else probabilities, dtype=np.float64)

        if len(targets) != m or len(probabilities) != m:
            raise GraphFormatError("edge arrays differ in length")
        if m and (sources.min() < 0 or targets.min() < 0 or max(sources.max(), targets.max()) >= n):
            raise GraphFormatError("edge endpoint outside the node range")
        known = probabilities[~np.isnan(probabilities)]
        if np.any((known <= 0.0) | (known > 1.0)):
            raise ProbabilityError("probability out of range")

        out_edges = np.lexsort((np.arange(m), sources))
        in_edges = np.lexsort((sources, targets))
        out_ptr = np.zeros(n + 1, dtype=np.int64)
        in_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(sources, minlength=n), out=out_ptr[1:])
        np.cumsum(np.bincount(targets, minlength=n), out=in_ptr[1:])

        for array in (sources, targets, probabilities, out_edges, in_edges, out_ptr, in_ptr):
            array.setflags(write=False)

        return cls(labels, sources, targets, probabilities, out_ptr, out_edges, in_ptr, in_edges)

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def m(self) -> int:
        return len(self.sources)

    @cached_property
    def label_index(self) -> dict:
        """Label to dense index"""
        return {label: index for index, label in enumerate(self.labels)}

    @cached_property
    def edge_index(self) -> dict:
        """(source, target) to edge index"""
        return {(u, v): e for e, (u, v) in enumerate(zip(self.sources.tolist(), self.targets.tolist()))}

    @cached_property
    def in_degree(self) -> np.ndarray:
        return np.diff(self.in_ptr)

    @cached_property
    def out_degree(self) -> np.ndarray:
        return np.diff(self.out_ptr)

    @property
    def has_probabilities(self) -> bool:
        return not bool(np.isnan(self.probabilities).any())

    def require_probabilities(self) -> None:
        """Raises if some edge still lacks a probability"""

        if not self.has_probabilities:
            missing = int(np.isnan(self.probabilities).sum())
            raise ProbabilityError(f"{missing} edges have no propagation probability; assign a probability scheme")

    def out_neighbors(self, u: int) -> tuple:
        """Targets and probabilities of u's out-edges, ascending edge index"""

        edges = self.out_edges[self.out_ptr[u]:self.out_ptr[u + 1]]
        return self.targets[edges], self.probabilities[edges]

    def in_neighbors(self, v: int) -> tuple:
        """Sources and probabilities of v's in-edges, ascending source index"""

        edges = self.in_edges[self.in_ptr[v]:self.in_ptr[v + 1]]
        return self.sources[edges], self.probabilities[edges]

    def successors(self, u: int) -> tuple:
        """Plain-list form of out_neighbors for the diffusion loop"""

        targets, probabilities = self.out_neighbors(u)
        return targets.tolist(), probabilities.tolist()

    def with_probabilities(self, probabilities: np.ndarray) -> "DirectedGraph":
        """Same structure, new edge probabilities"""

        return DirectedGraph.from_edges(self.labels, self.sources, self.targets, np.array(probabilities, dtype=np.float64))

    def adjacency(self) -> dict:
        """Label-keyed adjacency {u: {v: p}}, used to compare graphs independent of index order"""

        result = {label: {} for label in self.labels}
        for u, v, p in zip(self.sources.tolist(), self.targets.tolist(), self.probabilities.tolist()):
            result[self.labels[u]][self.labels[v]] = p
        return result

    def summary(self, scheme: Optional["ProbabilityScheme"] = None) -> dict:
        """The {n, m, scheme, seed} record carried by run reports"""

        return {"n": self.n, "m": self.m,
                "scheme": scheme.variant.value if scheme else None,
                "seed": scheme.rng_seed if scheme else None}


class SchemeType(Enum):
    UNIFORM = "uniform"
    WEIGHTED_CASCADE = "weighted_cascade"
    EXPONENTIAL = "exponential"
    FROM_FILE = "from_file"
    FREQUENCY_WEIGHTED = "frequency_weighted"


@dataclass(frozen=True)
class ProbabilityScheme:
    """
    How edge probabilities are (re)assigned after ingestion.

    :param variant: Which assignment rule to apply
    :type variant: SchemeType
    :param p: Probability of the uniform scheme
    :type p: float
    :param mean: Target mean of the exponential scheme
    :type mean: float
    :param rng_seed: Seed of the exponential draws
    :type rng_seed: int
    :param frequencies: Action count per (source, target) index pair for frequency_weighted
    :type frequencies: Mapping[tuple[int, int], float]
    """

    variant: SchemeType
    p: Optional[float] = None
    mean: Optional[float] = None
    rng_seed: int = 0
    frequencies: Optional[Mapping] = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.variant is SchemeType.UNIFORM and (self.p is None or not 0.0 < self.p <= 1.0):
            raise ConfigError(f"uniform probability must lie in (0, 1], got {self.p}")
        if self.variant is SchemeType.EXPONENTIAL and (self.mean is None or not self.mean > 0.0):
            raise ConfigError(f"exponential mean must be > 0, got {self.mean}")


def _parse_probability(token: str, line_number: int) -> float:
    try:
        p = float(token)
    except ValueError:
        raise GraphFormatError(f"malformed probability {token!r} at line {line_number}", line_number) from None
    if not 0.0 < p <= 1.0:
        raise ProbabilityError(f"probability out of range at line {line_number}", line_number)
    return p


def load_edge_list(source: TextIO, directed: bool = True) -> DirectedGraph:
    """
    Reads "u v" or "u v p" lines into a DirectedGraph.

    Labels are remapped to dense indices in first-seen order. Duplicate edges keep the
    first probability seen; self-loops register their node but add no edge. A bare "z z" line
    naming a new label is the isolated-node marker written by write_edge_list and is not counted.
    """

    label_index = {}
    edges = {}
    self_loops = 0
    duplicates = 0

    def _index(label: str) -> int:
        if label not in label_index:
            label_index[label] = len(label_index)
        return label_index[label]

    for line_number, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise GraphFormatError(f"malformed line {line_number}: expected 'u v' or 'u v p'", line_number)
        p = _parse_probability(parts[2], line_number) if len(parts) == 3 else MISSING
        isolated_marker = len(parts) == 2 and parts[0] == parts[1] and parts[0] not in label_index
        u, v = _index(parts[0]), _index(parts[1])
        if u == v:
            if not isolated_marker:
                self_loops += 1
            continue

        pairs = [(u, v)] if directed else [(u, v), (v, u)]
        for pair in pairs:
            if pair in edges:
                duplicates += 1
            else:
                edges[pair] = p

    if not label_index:
        raise GraphFormatError("empty input")
    if self_loops:
        logger.warning("dropped %d self-loops", self_loops)
    if duplicates:
        logger.warning("collapsed %d duplicate edges (first probability kept)", duplicates)

    pairs = list(edges)
    return DirectedGraph.from_edges(
        list(label_index),
        [u for u, _ in pairs],
        [v for _, v in pairs],
        np.array(list(edges.values()), dtype=np.float64),
    )


def write_edge_list(g: DirectedGraph, stream: TextIO) -> None:
    """Writes g back in the ingestion format; isolated nodes become 'z z' lines"""

    stream.write(f"# n={g.n} m={g.m}\n")
    for u, v, p in zip(g.sources.tolist(), g.targets.tolist(), g.probabilities.tolist()):
        if np.isnan(p):
            stream.write(f"{g.labels[u]} {g.labels[v]}\n")
        else:
            stream.write(f"{g.labels[u]} {g.labels[v]} {p!r}\n")
    isolated = np.flatnonzero((g.in_degree == 0) & (g.out_degree == 0))
    for z in isolated.tolist():
        stream.write(f"{g.labels[z]} {g.labels[z]}\n")


@contextlib.contextmanager
def open_edge_source(path: str) -> Iterator[TextIO]:
    """Opens a local path, a .gz file or an http(s) URL as a text stream"""

    if path.startswith(("http://", "https://")):
        http = urllib3.PoolManager()
        response = http.request("GET", path, preload_content=False)
        try:
            if response.status != 200:
                raise GraphFormatError(f"could not fetch {path}: HTTP {response.status}")
            logger.info("streaming edge list from %s", path)
            if path.endswith(".gz"):
                yield io.TextIOWrapper(gzip.GzipFile(fileobj=response), encoding="utf-8")
            else:
                yield io.TextIOWrapper(response, encoding="utf-8")
        finally:
            response.release_conn()
    elif path.endswith(".gz"):
        with gzip.open(path, "rt", encoding="utf-8") as stream:
            yield stream
    else:
        with open(path, "r", encoding="utf-8") as stream:
            yield stream


def load_frequency_table(source: TextIO, g: DirectedGraph) -> dict:
    """Reads 'u v count' lines into {(u_index, v_index): count}"""

    table = {}
    for line_number, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise GraphFormatError(f"malformed line {line_number}: expected 'u v count'", line_number)
        try:
            u, v = g.label_index[parts[0]], g.label_index[parts[1]]
        except KeyError as missing:
            raise GraphFormatError(f"unknown node label {missing.args[0]!r} at line {line_number}", line_number) from None
        try:
            count = float(parts[2])
        except ValueError:
            raise GraphFormatError(f"malformed count {parts[2]!r} at line {line_number}", line_number) from None
        if not count > 0.0:
            raise ProbabilityError(f"action count must be > 0 at line {line_number}", line_number)
        table[(u, v)] = table.get((u, v), 0.0) + count
    return table


def assign_probabilities(g: DirectedGraph, scheme: ProbabilityScheme) -> DirectedGraph:
    """Returns g with every edge probability rewritten according to scheme"""

    if scheme.variant is SchemeType.UNIFORM:
        probabilities = np.full(g.m, scheme.p)

    elif scheme.variant is SchemeType.WEIGHTED_CASCADE:
        # every edge target has in-degree >= 1
        probabilities = 1.0 / g.in_degree[g.targets]

    elif scheme.variant is SchemeType.EXPONENTIAL:
        rng = np.random.Generator(np.random.PCG64(scheme.rng_seed))
        draws = rng.exponential(1.0, size=g.m)
        probabilities = np.clip(scheme.mean * draws, np.finfo(np.float64).eps, 1.0)

    elif scheme.variant is SchemeType.FROM_FILE:
        g.require_probabilities()
        probabilities = g.probabilities.copy()

    elif scheme.variant is SchemeType.FREQUENCY_WEIGHTED:
        if scheme.frequencies is None:
            raise ConfigError("frequency_weighted needs an action-count table")
        counts = np.empty(g.m)
        for e, (u, v) in enumerate(zip(g.sources.tolist(), g.targets.tolist())):
            try:
                counts[e] = scheme.frequencies[(u, v)]
            except KeyError:
                raise ProbabilityError(f"no action count for edge {g.labels[u]} {g.labels[v]}") from None
        # per target: weights sum to min(1, raw sum)
        totals = np.bincount(g.targets, weights=counts, minlength=g.n)
        probabilities = counts / np.maximum(totals[g.targets], 1.0)

    else:
        raise ConfigError(f"unknown probability scheme {scheme.variant}")

    logger.info("assigned %s probabilities to %d edges", scheme.variant.value, g.m)
    return g.with_probabilities(probabilities)


def from_networkx(digraph: nx.DiGraph, probability_key: str = "p") -> DirectedGraph:
    """Converts a networkx DiGraph; edges without the probability attribute stay unassigned"""

    nodes = list(digraph.nodes)
    index = {node: i for i, node in enumerate(nodes)}
    sources, targets, probabilities = [], [], []
    for u, v, p in digraph.edges(data=probability_key, default=MISSING):
        if u == v:
            continue
        sources.append(index[u])
        targets.append(index[v])
        probabilities.append(p)
    return DirectedGraph.from_edges([str(node) for node in nodes], sources, targets, probabilities)


def generate_graph(kind: str, n: int, m: Optional[int] = None, seed: int = 0) -> DirectedGraph:
    """Synthetic digraph for desk-scale experiments: 'gnm' (needs m) or 'scale_free'"""

    if n < 1:
        raise ConfigError(f"synthetic graph needs n >= 1, got {n}")
    if kind == "gnm":
        if m is None:
            raise ConfigError("gnm generator needs m")
        digraph = nx.gnm_random_graph(n, m, seed=seed, directed=True)
    elif kind == "scale_free":
        digraph = nx.DiGraph(nx.scale_free_graph(n, seed=seed))
    else:
        raise ConfigError(f"unknown graph generator {kind!r}")
    logger.info("generated %s graph with %d nodes and %d edges", kind, digraph.number_of_nodes(), digraph.number_of_edges())
    return from_networkx(digraph)

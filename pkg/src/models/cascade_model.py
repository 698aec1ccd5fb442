# Filename: cascade_model.py

"""Model of the multi-cascade diffusion: cascade configuration, synchronous rounds and Monte-Carlo influence."""

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

from src.models.activation_model import ActivationRules, ActivationSpec
from src.models.errors import ConfigError
from src.models.graph_model import DirectedGraph
from src.models.rng_model import Stream, seed_sequence

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Cascade:
    """An existing cascade and its fixed seed set"""

    name: str
    seeds: frozenset


@dataclass(frozen=True)
class CascadeConfig:
    """
    Existing cascades, the new cascade and the activation functions.

    Cascade ids follow list order: existing cascades are 0..L-1 and the new cascade is L.

    :param existing: Existing cascades C_e with their seed sets
    :type existing: tuple[Cascade, ...]
    :param activation: Activation specification applied at every node
    :type activation: ActivationSpec
    :param new_name: Name of the new cascade
    :type new_name: str
    :param candidates: Candidate seed nodes V_c, None for all nodes
    :type candidates: frozenset
    """

    existing: tuple = ()
    activation: ActivationSpec = field(default_factory=ActivationSpec)
    new_name: str = "c_new"
    candidates: Optional[frozenset] = None

    def __post_init__(self) -> None:
        names = [cascade.name for cascade in self.existing] + [self.new_name]
        if len(set(names)) != len(names):
            raise ConfigError(f"cascade names must be distinct: {names}")

    @property
    def n_cascades(self) -> int:
        return len(self.existing) + 1

    @property
    def new_id(self) -> int:
        return len(self.existing)

    @property
    def names(self) -> tuple:
        return tuple(cascade.name for cascade in self.existing) + (self.new_name,)

    @property
    def existing_seeds(self) -> frozenset:
        """Union of every existing cascade's seeds"""
        return frozenset().union(*(cascade.seeds for cascade in self.existing))

    def existing_mask(self, n: int) -> np.ndarray:
        mask = np.zeros(n, dtype=bool)
        if self.existing:
            mask[list(self.existing_seeds)] = True
        return mask

    def candidate_list(self, n: int) -> list:
        """V_c as an ascending list"""
        return sorted(self.candidates) if self.candidates is not None else list(range(n))

    def without_existing(self) -> "CascadeConfig":
        """Same new cascade and activation with no competitors"""
        return replace(self, existing=())

    def validate(self, g: DirectedGraph) -> None:
        """Checks every seed and candidate against the node range"""

        for cascade in self.existing:
            outside = [s for s in cascade.seeds if not 0 <= s < g.n]
            if outside:
                raise ConfigError(f"cascade {cascade.name!r} has seeds outside the graph: {outside[:5]}")
        if self.candidates is not None:
            outside = [v for v in self.candidates if not 0 <= v < g.n]
            if outside:
                raise ConfigError(f"candidate nodes outside the graph: {outside[:5]}")

    def compile(self, g: DirectedGraph) -> ActivationRules:
        """Activation rules with priority orders drawn for g"""
        return ActivationRules(self.activation, g, self.n_cascades, self.new_id)


@dataclass
class DiffusionState:
    """
    Write-once node states of one diffusion run.

    Nodes absent from states are inactive (state None, activation time infinite).

    :param states: Node to winning cascade id
    :type states: dict[int, int]
    :param times: Node to activation round
    :type times: dict[int, int]
    :param frontier: Nodes activated in the last completed round
    :type frontier: list[int]
    """

    states: dict = field(default_factory=dict)
    times: dict = field(default_factory=dict)
    frontier: list = field(default_factory=list)
    rounds: int = 0

    def state_of(self, v: int) -> Optional[int]:
        return self.states.get(v)

    def time_of(self, v: int) -> float:
        return self.times.get(v, math.inf)

    def count(self, cascade: int) -> int:
        return sum(1 for state in self.states.values() if state == cascade)

    def active_nodes(self, cascade: int) -> list:
        return sorted(v for v, state in self.states.items() if state == cascade)

    def _activate(self, v: int, cascade: int, round_index: int) -> None:
        # write-once
        assert v not in self.states
        self.states[v] = cascade
        self.times[v] = round_index
        self.frontier.append(v)


def spread(rules: ActivationRules, seeds_by_cascade: Sequence[Iterable[int]],
           successors: Callable[[int], tuple], flip_rng: Optional[np.random.Generator] = None,
           activation_rng: Optional[np.random.Generator] = None) -> DiffusionState:
    """
    Synchronous rounds of the diffusion process.

    successors(u) returns parallel lists (targets, probabilities) in ascending edge index.
    Coin flips are drawn per frontier node for all its out-edges; edges with p >= 1 always fire,
    so flip_rng may be None on live-edge graphs. Offers to already active nodes are skipped.
    """

    state = DiffusionState()
    offers = defaultdict(list)
    for cascade, seeds in enumerate(seeds_by_cascade):
        for s in sorted(set(seeds)):
            offers[s].append((s, cascade))
    for v in sorted(offers):
        offered = offers[v]
        winner = offered[0][1] if len(offered) == 1 else rules.resolve(v, offered, activation_rng)
        state._activate(v, winner, 0)

    round_index = 0
    while state.frontier:
        round_index += 1
        frontier, state.frontier = sorted(state.frontier), []
        offers = defaultdict(list)
        for u in frontier:
            targets, probabilities = successors(u)
            if not targets:
                continue
            draws = flip_rng.random(len(targets)).tolist() if flip_rng is not None else None
            cascade = state.states[u]
            for i, v in enumerate(targets):
                if v in state.states:
                    continue
                p = probabilities[i]
                if p < 1.0 and (draws is None or draws[i] >= p):
                    continue
                offers[v].append((u, cascade))
        for v in sorted(offers):
            offered = offers[v]
            winner = offered[0][1] if len(offered) == 1 else rules.resolve(v, offered, activation_rng)
            state._activate(v, winner, round_index)
        if state.frontier:
            state.rounds = round_index
    state.frontier = []
    return state


def _trial_generators(seed: Union[int, np.random.SeedSequence]) -> tuple:
    """Splits one seed into the edge-flip stream and the activation stream"""

    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(int(seed))
    flips, activation = seed.spawn(2)
    return np.random.Generator(np.random.PCG64(flips)), np.random.Generator(np.random.PCG64(activation))


def seeds_by_cascade(cfg: CascadeConfig, new_seeds: Iterable[int]) -> list:
    return [cascade.seeds for cascade in cfg.existing] + [frozenset(new_seeds)]


def diffuse(g: DirectedGraph, cfg: CascadeConfig, new_seeds: Iterable[int],
            rng_seed: Union[int, np.random.SeedSequence], rules: Optional[ActivationRules] = None) -> DiffusionState:
    """One forward diffusion on g with new_seeds as the new cascade's seeds"""

    new_seeds = frozenset(new_seeds)
    if cfg.candidates is not None and not new_seeds <= cfg.candidates:
        raise ConfigError(f"seeds outside the candidate set: {sorted(new_seeds - cfg.candidates)[:5]}")
    g.require_probabilities()
    rules = rules or cfg.compile(g)
    flips, activation = _trial_generators(rng_seed)
    return spread(rules, seeds_by_cascade(cfg, new_seeds), g.successors, flips, activation)


@dataclass(frozen=True)
class InfluenceEstimate:
    """
    Monte-Carlo estimate of f(S) and of the not-new-active count.

    :param mean: Mean number of new-cascade-active nodes
    :param stderr: Sample standard deviation over sqrt(trials)
    :param not_active_mean: Mean number of nodes not active in the new cascade
    :param trials: Number of trials
    :param per_node: Activation frequency of every node, when requested
    """

    mean: float
    stderr: float
    not_active_mean: float
    trials: int
    per_node: Optional[np.ndarray] = field(default=None, compare=False, repr=False)

    def to_dict(self) -> dict:
        return {"mean": self.mean, "stderr": self.stderr, "trials": self.trials}


def run_trial(g: DirectedGraph, cfg: CascadeConfig, rules: ActivationRules, new_seeds: frozenset,
              seed: np.random.SeedSequence) -> list:
    """Nodes active in the new cascade after one trial"""

    flips, activation = _trial_generators(seed)
    state = spread(rules, seeds_by_cascade(cfg, new_seeds), g.successors, flips, activation)
    return state.active_nodes(cfg.new_id)


def summarize_trials(n: int, active_per_trial: Sequence[Sequence[int]], per_node: bool = False) -> InfluenceEstimate:
    """Merges trial outcomes, in trial order, into an InfluenceEstimate"""

    trials = len(active_per_trial)
    counts = np.array([len(active) for active in active_per_trial], dtype=np.float64)
    mean = float(counts.mean())
    stderr = float(counts.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    frequencies = None
    if per_node:
        frequencies = np.zeros(n)
        for active in active_per_trial:
            frequencies[list(active)] += 1.0
        frequencies /= trials
    return InfluenceEstimate(mean, stderr, float(n - mean), trials, frequencies)


def estimate_influence(g: DirectedGraph, cfg: CascadeConfig, new_seeds: Iterable[int], trials: int,
                       rng_seed: int, workers: Optional[int] = None, per_node: bool = False) -> InfluenceEstimate:
    """
    Monte-Carlo estimate of the new cascade's influence.

    Trial t runs on the stream seed_sequence(rng_seed, EVALUATION, t), so the estimate does not
    depend on the worker count, and two seed sets evaluated with one rng_seed share their coin flips.
    """

    if trials < 1:
        raise ConfigError(f"trials must be >= 1, got {trials}")
    new_seeds = frozenset(new_seeds)
    if cfg.candidates is not None and not new_seeds <= cfg.candidates:
        raise ConfigError(f"seeds outside the candidate set: {sorted(new_seeds - cfg.candidates)[:5]}")
    g.require_probabilities()
    if not new_seeds:
        return summarize_trials(g.n, [[] for _ in range(trials)], per_node)

    from src.threads.worker_pool import WorkerPool

    seeds = [seed_sequence(rng_seed, Stream.EVALUATION, t) for t in range(trials)]
    with WorkerPool(g, cfg, workers) as pool:
        active_per_trial = pool.run_trials(new_seeds, seeds)
    estimate = summarize_trials(g.n, active_per_trial, per_node)
    logger.info("influence of %d seeds over %d trials: %.3f (stderr %.3f)", len(new_seeds), trials,
                estimate.mean, estimate.stderr)
    return estimate


def seed_overlap(first: Iterable[int], second: Iterable[int]) -> float:
    """Fraction of the first seed set shared with the second"""

    first, second = set(first), set(second)
    if not first:
        return 1.0 if not second else 0.0
    return len(first & second) / len(first)

# Filename: oracle_model.py

"""
Exact ground truth on tiny instances.

Enumerates every live/dead edge realization to compute the new cascade's influence exactly,
searches the optimal seed set exhaustively and runs the tuple-sampler validation suites
(unbiasedness, sandwich ordering and the tightness cases) against it.
"""

import itertools
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from src.models.activation_model import ActivationRules, ActivationType
from src.models.cascade_model import CascadeConfig, seeds_by_cascade, spread
from src.models.errors import ConfigError, OracleGuardError
from src.models.graph_model import DirectedGraph
from src.models.rng_model import Stream, seed_sequence
from src.models.sampling_model import TupleSampler, eval_g, eval_lower, eval_upper

logger = logging.getLogger(__name__)

MAX_EDGES = 20
MAX_SUBSETS = 100_000
# Realizations whose probabilities are computed in one vectorized block
BLOCK = 4096
TIE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class Realization:
    """
    One outcome of every edge's coin flip.

    Bit e of mask is set when edge e is live.

    :param mask: Live-edge bitmask over edge indices
    :type mask: int
    :param probability: Pr[T] = prod of p_e over live edges times prod of (1 - p_e) over dead edges
    :type probability: float
    """

    mask: int
    probability: float

    def live_edges(self, m: int) -> list:
        return [e for e in range(m) if self.mask >> e & 1]


def _check_instance(g: DirectedGraph, cfg: CascadeConfig) -> None:
    if g.m > MAX_EDGES:
        raise OracleGuardError(f"{g.m} edges exceed the enumeration guard of {MAX_EDGES}")
    if cfg.activation.variant is ActivationType.RANDOM:
        raise ConfigError("the oracle needs a deterministic activation function; random activation is rejected")
    g.require_probabilities()


def iter_realizations(g: DirectedGraph) -> Iterator[Realization]:
    """All 2^m realizations in ascending bitmask order"""

    if g.m > MAX_EDGES:
        raise OracleGuardError(f"{g.m} edges exceed the enumeration guard of {MAX_EDGES}")
    probabilities = np.asarray(g.probabilities, dtype=np.float64)
    bits = np.arange(g.m, dtype=np.int64)
    total = 1 << g.m
    for start in range(0, total, BLOCK):
        masks = np.arange(start, min(start + BLOCK, total), dtype=np.int64)
        live = (masks[:, None] >> bits) & 1
        block = np.prod(np.where(live == 1, probabilities, 1.0 - probabilities), axis=1)
        for mask, probability in zip(masks.tolist(), block.tolist()):
            yield Realization(mask, probability)


class _LiveGraph:
    """Successor lists of one realization, every live edge with probability 1"""

    def __init__(self, g: DirectedGraph, live_edges: Iterable[int]) -> None:
        self._successors = defaultdict(lambda: ([], []))
        for e in live_edges:
            targets, probabilities = self._successors[int(g.sources[e])]
            targets.append(int(g.targets[e]))
            probabilities.append(1.0)

    def successors(self, u: int) -> tuple:
        return self._successors.get(u, ((), ()))


def _influence_on(rules: ActivationRules, cfg: CascadeConfig, live: _LiveGraph, new_seeds: frozenset) -> int:
    state = spread(rules, seeds_by_cascade(cfg, new_seeds), live.successors)
    return state.count(cfg.new_id)


def exact_influences(g: DirectedGraph, cfg: CascadeConfig, seed_sets: Sequence[Iterable[int]]) -> list:
    """Exact f(S) for several seed sets in one pass over the realizations"""

    _check_instance(g, cfg)
    seed_sets = [frozenset(s) for s in seed_sets]
    if cfg.candidates is not None:
        for s in seed_sets:
            if not s <= cfg.candidates:
                raise ConfigError(f"seeds outside the candidate set: {sorted(s - cfg.candidates)[:5]}")
    rules = cfg.compile(g)
    totals = [0.0] * len(seed_sets)
    mass = 0.0
    for realization in iter_realizations(g):
        mass += realization.probability
        if realization.probability == 0.0:
            continue
        live = _LiveGraph(g, realization.live_edges(g.m))
        for i, seeds in enumerate(seed_sets):
            if seeds:
                totals[i] += realization.probability * _influence_on(rules, cfg, live, seeds)
    logger.debug("enumerated %d realizations, total probability %.12f", 1 << g.m, mass)
    return totals


def exact_influence(g: DirectedGraph, cfg: CascadeConfig, seeds: Iterable[int]) -> float:
    """Exact f(S) by enumeration of all 2^m realizations"""

    return exact_influences(g, cfg, [seeds])[0]


def exact_optimal(g: DirectedGraph, cfg: CascadeConfig, k: int) -> tuple:
    """
    Exhaustive argmax of f over the k-subsets of the candidates.

    Subsets are visited in lexicographic order and a later subset only wins when it is strictly
    better, so ties go to the lexicographically smallest set.
    """

    if k < 0:
        raise ConfigError(f"k must be >= 0, got {k}")
    candidates = cfg.candidate_list(g.n)
    if k > len(candidates):
        raise ConfigError(f"k={k} exceeds the {len(candidates)} candidate nodes")
    subsets = math.comb(len(candidates), k)
    if subsets > MAX_SUBSETS:
        raise OracleGuardError(f"{subsets} seed sets exceed the search guard of {MAX_SUBSETS}")
    if k == 0:
        return frozenset(), 0.0

    combos = list(itertools.combinations(candidates, k))
    values = exact_influences(g, cfg, combos)
    best, best_value = combos[0], values[0]
    for combo, value in zip(combos[1:], values[1:]):
        if value > best_value + TIE_TOLERANCE:
            best, best_value = combo, value
    return frozenset(best), best_value


@dataclass
class SuiteResult:
    """Outcome of one validation suite"""

    name: str
    passed: bool
    checked: int = 0
    violations: int = 0
    details: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "checked": self.checked, "violations": self.violations,
                "details": self.details}


@dataclass
class OracleCheckReport:
    tuples: int
    seed_sets: list
    suites: list

    @property
    def passed(self) -> bool:
        return all(suite.passed for suite in self.suites)

    def to_dict(self, labels: Optional[Sequence[str]] = None) -> dict:
        def _names(seeds) -> list:
            return [labels[v] if labels is not None else v for v in sorted(seeds)]

        return {
            "passed": self.passed,
            "tuples": self.tuples,
            "seed_sets": [_names(s) for s in self.seed_sets],
            "suites": {suite.name: suite.to_dict() for suite in self.suites},
        }


def check_seed_sets(cfg: CascadeConfig, n: int, pairs: int = 5) -> list:
    """Every candidate singleton plus the first few candidate pairs"""

    candidates = cfg.candidate_list(n)
    sets = [frozenset([v]) for v in candidates]
    sets.extend(frozenset(pair) for pair in itertools.islice(itertools.combinations(candidates, 2), pairs))
    return sets


def _unbiasedness(n: int, exact: Sequence[float], g_values: np.ndarray, seed_sets: list, z: float) -> SuiteResult:
    suite = SuiteResult("unbiasedness", True)
    l = g_values.shape[1]
    for seeds, truth, row in zip(seed_sets, exact, g_values):
        p = float(row.mean())
        mean = n * p
        stderr = n * math.sqrt(p * (1.0 - p) / l)
        deviation = abs(mean - truth)
        ok = bool(deviation <= z * stderr) if stderr > 0 else bool(deviation <= 1e-9)
        suite.checked += 1
        if not ok:
            suite.violations += 1
            suite.passed = False
        suite.details.append({"seeds": sorted(seeds), "exact": truth, "estimate": mean, "stderr": stderr, "ok": ok})
    return suite


def _ordering(g_values: np.ndarray, upper: np.ndarray, lower: np.ndarray) -> SuiteResult:
    violations = int(np.count_nonzero((lower > g_values) | (g_values > upper)))
    return SuiteResult("sandwich", violations == 0, int(g_values.size), violations)


def _tightness(cfg: CascadeConfig, g_values: np.ndarray, upper: np.ndarray, lower: np.ndarray) -> SuiteResult:
    checks = []
    if cfg.activation.variant is ActivationType.DOMINATING:
        checks.append(("upper == g", upper, g_values))
    if cfg.activation.variant is ActivationType.DOMINATED:
        checks.append(("lower == g", lower, g_values))
    if not cfg.existing:
        checks.append(("upper == lower", upper, lower))

    suite = SuiteResult("tightness", True)
    if not checks:
        suite.details.append({"skipped": "no tight case applies to this configuration"})
        return suite
    for name, left, right in checks:
        violations = int(np.count_nonzero(left != right))
        suite.checked += int(left.size)
        suite.violations += violations
        suite.details.append({"identity": name, "violations": violations})
    suite.passed = suite.violations == 0
    return suite


def run_oracle_checks(g: DirectedGraph, cfg: CascadeConfig, tuples: int, rng_seed: int, z: float = 3.0,
                      sampler: Optional[TupleSampler] = None) -> OracleCheckReport:
    """
    Validates the tuple sampler against exact enumeration.

    Samples tuples from the oracle-check stream and, for every candidate singleton and a few
    pairs, compares the mean of n * eval_g with the exact influence (within z standard errors),
    counts sandwich-ordering violations per tuple and checks the identities that hold exactly
    for dominating, dominated and competitor-free configurations. sampler replaces the
    default TupleSampler.
    """

    if tuples < 1:
        raise ConfigError(f"tuples must be >= 1, got {tuples}")
    _check_instance(g, cfg)
    seed_sets = check_seed_sets(cfg, g.n)
    exact = exact_influences(g, cfg, seed_sets)

    sampler = sampler or TupleSampler(g, cfg)
    sample = sampler.sample(seed_sequence(rng_seed, Stream.ORACLE_CHECK), tuples)
    rules = cfg.compile(g)
    g_values = np.array([[eval_g(rr, cfg, s, rules) for rr in sample] for s in seed_sets], dtype=np.int8)
    # the shortcut reads lower and upper themselves, so the ordering suites need the full simulation
    simulated = np.array([[eval_g(rr, cfg, s, rules, shortcut=False) for rr in sample] for s in seed_sets],
                         dtype=np.int8)
    upper = np.array([[eval_upper(rr, s) for rr in sample] for s in seed_sets], dtype=np.int8)
    lower = np.array([[eval_lower(rr, s) for rr in sample] for s in seed_sets], dtype=np.int8)

    suites = [
        _unbiasedness(g.n, exact, g_values, seed_sets, z),
        _ordering(simulated, upper, lower),
        _tightness(cfg, simulated, upper, lower),
    ]
    for suite in suites:
        logger.info("%s: %s (%d checked, %d violations)", suite.name, "PASS" if suite.passed else "FAIL",
                    suite.checked, suite.violations)
    return OracleCheckReport(tuples, seed_sets, suites)

# Filename: solver_model.py

"""Model that selects the new cascade's seeds: greedy coverage, the sandwich strategy and the Reverse Sandwich run."""

import heapq
import logging
import math
import time
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.special import gammaln

from src.models.activation_model import ActivationRules
from src.models.cascade_model import CascadeConfig, InfluenceEstimate, estimate_influence
from src.models.errors import ConfigError, EmptyCollectionError, ResourceLimitError
from src.models.graph_model import DirectedGraph
from src.models.rng_model import RNG_ALGORITHM, Stream
from src.models.sampling_model import EstimatorKind, TupleCollection

logger = logging.getLogger(__name__)

GREEDY_RATIO = 1.0 - 1.0 / math.e
EPSILON0_CAP = 0.999


@dataclass(frozen=True)
class ErrorBudget:
    epsilon0: float
    epsilon1: float
    epsilon2: float


@dataclass(frozen=True)
class SolverParams:
    """
    Budget, accuracy and failure-odds parameters of a solver run.

    Either a unified epsilon (epsilon1 = epsilon2 = epsilon, epsilon0 = K * epsilon1 capped at 0.999)
    or explicit epsilon0/epsilon1/epsilon2 must be given.

    :param k: Seed budget of the new cascade
    :type k: int
    :param epsilon: Unified error
    :type epsilon: float
    :param N: Failure-odds parameter, success probability at least 1 - 1/N
    :type N: float
    :param K: Multiplier with epsilon0 = K * epsilon1
    :type K: float
    :param rng_seed: Root seed of every solver stream
    :type rng_seed: int
    :param max_tuples: Cap on any planned tuple count
    :type max_tuples: int
    :param workers: Requested worker processes (capped by MCIM_THREADS)
    :type workers: int
    :param evaluation_trials: Monte-Carlo trials for the report's influence record, 0 to skip
    :type evaluation_trials: int
    :param sample_multiplier: Scales NR-Greedy's tuple count
    :type sample_multiplier: float
    """

    k: int
    epsilon: Optional[float] = 0.1
    epsilon0: Optional[float] = None
    epsilon1: Optional[float] = None
    epsilon2: Optional[float] = None
    N: float = 1000.0
    K: float = 100.0
    rng_seed: int = 0
    max_tuples: int = 50_000_000
    workers: Optional[int] = None
    evaluation_trials: int = 0
    sample_multiplier: float = 1.0

    def __post_init__(self) -> None:
        if self.k < 0:
            raise ConfigError(f"k must be >= 0, got {self.k}")
        for name in ("epsilon", "epsilon0", "epsilon1", "epsilon2"):
            value = getattr(self, name)
            if value is not None and not 0.0 < value < 1.0:
                raise ConfigError(f"{name} must lie in (0, 1), got {value}")
        if self.epsilon is None and None in (self.epsilon1, self.epsilon2):
            raise ConfigError("give either epsilon or both epsilon1 and epsilon2")
        if not self.N > 1.0:
            raise ConfigError(f"N must be > 1, got {self.N}")
        if not self.K > 0.0:
            raise ConfigError(f"K must be > 0, got {self.K}")
        if self.max_tuples < 1:
            raise ConfigError(f"max_tuples must be >= 1, got {self.max_tuples}")
        if self.evaluation_trials < 0:
            raise ConfigError(f"evaluation trials must be >= 0, got {self.evaluation_trials}")
        if not self.sample_multiplier >= 1.0:
            raise ConfigError(f"sample_multiplier must be >= 1, got {self.sample_multiplier}")

    def errors(self) -> ErrorBudget:
        """Resolves the unified epsilon policy into (epsilon0, epsilon1, epsilon2)"""

        epsilon1 = self.epsilon1 if self.epsilon1 is not None else self.epsilon
        epsilon2 = self.epsilon2 if self.epsilon2 is not None else self.epsilon
        epsilon0 = self.epsilon0
        if epsilon0 is None:
            epsilon0 = self.K * epsilon1
            if epsilon0 >= EPSILON0_CAP:
                logger.warning("K * epsilon1 = %.3f is not below 1; capping epsilon0 at %.3f", epsilon0, EPSILON0_CAP)
                epsilon0 = EPSILON0_CAP
        return ErrorBudget(epsilon0, epsilon1, epsilon2)


@dataclass(frozen=True)
class SandwichResult:
    """
    Outcome of the sandwich strategy on one collection.

    estimates maps "upper_seeds"/"lower_seeds" to their {exact_g, upper, lower} estimator values.

    :param seeds: Chosen seeds S*
    :param upper_seeds: Greedy seeds for the upper bound
    :param lower_seeds: Greedy seeds for the lower bound
    :param chosen: "upper" or "lower"
    :param estimates: Estimator values at both greedy sets
    :param gamma_lower: (1 - 1/e) * G(upper seeds) / upper estimate(upper seeds)
    :param l: Collection size
    :param f_lo: Lower bound on the optimum used to size the collection
    """

    seeds: tuple
    upper_seeds: tuple
    lower_seeds: tuple
    chosen: str
    estimates: dict
    gamma_lower: float
    l: int
    f_lo: Optional[float] = None


@dataclass
class SolverReport:
    """
    Result of one solver or baseline run.

    :param algorithm: "rs", "nr_greedy" or "maxinf"
    :param seeds: Chosen seed indices, in selection order
    :param l: Number of tuples in the main collection
    :param f_lo: Lower bound on the optimum
    :param gamma_lower: Computable branch of the data-dependent ratio, None where it does not apply
    :param influence: Monte-Carlo influence of the seeds under the true configuration
    :param sandwich: Sandwich details (rs, maxinf)
    :param timings: Wall-time per phase, seconds
    :param collection: Tuple statistics of the main collection
    :param errors: Resolved error budget
    :param estimate: G(seeds) on the main collection
    """

    algorithm: str
    seeds: tuple
    l: int
    f_lo: float
    gamma_lower: Optional[float] = None
    influence: Optional[InfluenceEstimate] = None
    sandwich: Optional[SandwichResult] = None
    timings: dict = field(default_factory=dict)
    collection: Optional[dict] = None
    errors: Optional[ErrorBudget] = None
    estimate: Optional[float] = None

    def to_dict(self, labels: Optional[Sequence[str]] = None) -> dict:
        """JSON-ready record; seeds are written as original labels when labels are given"""

        def _names(seeds: Iterable[int]) -> list:
            return [labels[v] if labels is not None else v for v in seeds]

        record = {
            "algorithm": self.algorithm,
            "seeds": _names(self.seeds),
            "l": self.l,
            "f_lo": self.f_lo,
            "gamma_lower": self.gamma_lower,
            "estimate": self.estimate,
            "influence": self.influence.to_dict() if self.influence else None,
            "not_active_mean": self.influence.not_active_mean if self.influence else None,
            "timings": {phase: round(seconds, 6) for phase, seconds in self.timings.items()},
            "collection": self.collection,
            "errors": asdict(self.errors) if self.errors else None,
            "rng": RNG_ALGORITHM,
        }
        if self.sandwich is not None:
            record["sandwich"] = {
                "upper_seeds": _names(self.sandwich.upper_seeds),
                "lower_seeds": _names(self.sandwich.lower_seeds),
                "chosen": self.sandwich.chosen,
                "estimates": self.sandwich.estimates,
            }
        return record


def log_binomial(n: int, k: int) -> float:
    """ln C(n, k) through log-gamma"""

    if not 0 <= k <= n:
        raise ConfigError(f"need 0 <= k <= n, got n={n}, k={k}")
    return float(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1))


def _target_size(k: int, candidates: Sequence[int]) -> int:
    return min(k, len(candidates))


def greedy_max_coverage(coll: TupleCollection, k: int, kind: EstimatorKind,
                        candidates: Optional[Sequence[int]] = None, lazy: bool = True) -> list:
    """
    Greedy maximum coverage over the upper or lower seed sets.

    Picks the candidate with the largest marginal number of newly covered tuples, smallest node
    id on ties, until min(k, |candidates|) seeds are chosen. The lazy variant keeps stale gains
    in a heap; coverage is submodular, so it picks exactly what the plain scan picks.
    """

    if kind is EstimatorKind.EXACT_G:
        raise ConfigError("greedy coverage runs on the upper or lower bound only")
    if not coll.l:
        raise EmptyCollectionError("cannot run greedy coverage on an empty collection")
    candidates = coll.config.candidate_list(coll.n) if candidates is None else sorted(set(candidates))
    target = _target_size(k, candidates)
    covered = np.zeros(coll.l, dtype=bool)

    def _gain(v: int) -> int:
        ids = coll.covering(v, kind)
        return int(np.count_nonzero(~covered[ids])) if len(ids) else 0

    seeds = []
    if lazy:
        heap = [(-_gain(v), v, 0) for v in candidates]
        heapq.heapify(heap)
        while len(seeds) < target and heap:
            negative_gain, v, computed_at = heapq.heappop(heap)
            if computed_at != len(seeds):
                heapq.heappush(heap, (-_gain(v), v, len(seeds)))
                continue
            if -negative_gain < 0:
                break
            seeds.append(v)
            covered[coll.covering(v, kind)] = True
    else:
        remaining = list(candidates)
        while len(seeds) < target:
            best, best_gain = None, -1
            for v in remaining:
                gain = _gain(v)
                if gain > best_gain:
                    best, best_gain = v, gain
            if best_gain < 0:
                break
            seeds.append(best)
            remaining.remove(best)
            covered[coll.covering(best, kind)] = True
    return seeds


def _estimates(coll: TupleCollection, seeds: Sequence[int]) -> dict:
    counts = {
        "exact_g": coll.count(seeds, EstimatorKind.EXACT_G),
        "upper": coll.count(seeds, EstimatorKind.UPPER),
        "lower": coll.count(seeds, EstimatorKind.LOWER),
    }
    return counts


def sandwich(coll: TupleCollection, k: int, candidates: Optional[Sequence[int]] = None) -> SandwichResult:
    """
    Greedy on the upper and on the lower bound, keep whichever scores higher on G.

    Greedy never runs on G itself: G is not submodular, so lazy evaluation would be unsound.
    """

    upper_seeds = greedy_max_coverage(coll, k, EstimatorKind.UPPER, candidates)
    lower_seeds = greedy_max_coverage(coll, k, EstimatorKind.LOWER, candidates)
    upper_counts = _estimates(coll, upper_seeds)
    lower_counts = _estimates(coll, lower_seeds)

    if lower_counts["exact_g"] > upper_counts["exact_g"]:
        chosen, seeds = "lower", lower_seeds
    else:
        chosen, seeds = "upper", upper_seeds

    # G <= upper estimate tuple by tuple, so an empty upper coverage means G is 0 too
    if upper_counts["upper"]:
        gamma_lower = GREEDY_RATIO * (upper_counts["exact_g"] / upper_counts["upper"])
    else:
        gamma_lower = GREEDY_RATIO

    scale = coll.n / coll.l
    estimates = {
        "upper_seeds": {kind: scale * count for kind, count in upper_counts.items()},
        "lower_seeds": {kind: scale * count for kind, count in lower_counts.items()},
    }
    logger.info("sandwich: G(upper)=%.3f G(lower)=%.3f, chose %s, gamma lower bound %.4f",
                estimates["upper_seeds"]["exact_g"], estimates["lower_seeds"]["exact_g"], chosen, gamma_lower)
    return SandwichResult(tuple(seeds), tuple(upper_seeds), tuple(lower_seeds), chosen, estimates, gamma_lower, coll.l)


def _opt_lower_floor(coll: TupleCollection, k: int, candidates: Sequence[int]) -> float:
    best_singleton = 0.0
    if coll.l:
        best_singleton = max((len(coll.covering(v, EstimatorKind.LOWER)) for v in candidates), default=0)
        best_singleton = coll.n * best_singleton / coll.l
    return float(min(coll.n, max(k, best_singleton)))


def estimate_opt_lower(g: DirectedGraph, cfg: CascadeConfig, params: SolverParams, pool=None,
                       rules: Optional[ActivationRules] = None) -> float:
    """
    Lower bound f_lo on the best achievable lower-bound coverage E[n * lower(S)].

    Guesses x = n/2, n/4, ... and, for each guess, grows a collection to
    (2 + 2*eps0/3) * (ln C(n,k) + ln(N * log2 n)) * n / (eps0^2 * x) tuples, runs greedy on the
    lower bound and accepts the first guess whose coverage estimate F reaches (1 + eps0) * x;
    then f_lo = F / (1 + eps0). Falls back to max(k, best singleton lower estimate) when no
    guess is certified. Uses its own stream, independent of the main collection.
    """

    if pool is None:
        from src.threads.worker_pool import WorkerPool

        with WorkerPool(g, cfg, params.workers) as own_pool:
            return estimate_opt_lower(g, cfg, params, own_pool, rules)

    n, k = g.n, params.k
    candidates = cfg.candidate_list(n)
    epsilon = params.errors().epsilon0
    coll = TupleCollection(g, cfg, rules)
    if n < 2:
        return _opt_lower_floor(coll, k, candidates)

    rounds = int(math.floor(math.log2(n)))
    lam = ((2.0 + 2.0 * epsilon / 3.0)
           * (log_binomial(n, k) + math.log(params.N) + math.log(math.log2(n)))
           * n / epsilon ** 2)
    next_chunk = 0
    for i in range(1, rounds + 1):
        x = n / 2.0 ** i
        theta = int(math.ceil(lam / x))
        if theta > params.max_tuples:
            raise ResourceLimitError(f"f_lo estimation needs {theta} tuples, above the cap of {params.max_tuples}")
        if theta > coll.l:
            tuples, next_chunk = pool.sample(params.rng_seed, Stream.OPT_LOWER, theta - coll.l, next_chunk)
            coll.extend(tuples)
        seeds = greedy_max_coverage(coll, k, EstimatorKind.LOWER, candidates)
        coverage = coll.estimate(seeds, EstimatorKind.LOWER)
        logger.debug("f_lo round %d: x=%.2f, %d tuples, lower coverage %.3f", i, x, coll.l, coverage)
        if coverage >= (1.0 + epsilon) * x:
            return coverage / (1.0 + epsilon)

    floor = _opt_lower_floor(coll, k, candidates)
    logger.warning("no guess certified the lower-bound optimum; using the floor f_lo=%.3f", floor)
    return floor


def sample_bounds(n: int, k: int, params: SolverParams) -> tuple:
    """(l1, l2) before the division by f_lo"""

    errors = params.errors()
    log_n = math.log(params.N)
    l1 = n * (log_binomial(n, k) + log_n) * (2.0 + errors.epsilon1) / errors.epsilon1 ** 2
    l2 = 2.0 * n * log_n / errors.epsilon2 ** 2
    return l1, l2


def plan_sample_size(n: int, k: int, params: SolverParams, f_lo: float) -> int:
    """l = ceil(max(l1, l2) / f_lo), refused above params.max_tuples"""

    if not f_lo > 0.0:
        raise ConfigError(f"f_lo must be > 0, got {f_lo}")
    l1, l2 = sample_bounds(n, k, params)
    planned = max(l1, l2) / f_lo
    if not math.isfinite(planned) or planned > params.max_tuples:
        raise ResourceLimitError(f"planned {planned:.4g} tuples, above the cap of {params.max_tuples}")
    return int(math.ceil(planned))


def _check_budget(cfg: CascadeConfig, g: DirectedGraph, k: int) -> None:
    cfg.validate(g)
    available = len(cfg.candidate_list(g.n))
    if k > available:
        raise ConfigError(f"k={k} exceeds the {available} candidate nodes")


def attach_influence(report: SolverReport, g: DirectedGraph, cfg: CascadeConfig, params: SolverParams) -> SolverReport:
    """Adds the Monte-Carlo influence record under cfg when evaluation trials are requested"""

    if params.evaluation_trials:
        started = time.perf_counter()
        report.influence = estimate_influence(g, cfg, report.seeds, params.evaluation_trials, params.rng_seed,
                                              params.workers)
        report.timings["evaluate"] = time.perf_counter() - started
    return report


def empty_report(algorithm: str, g: DirectedGraph, cfg: CascadeConfig, params: SolverParams) -> SolverReport:
    """k = 0: no seeds, nothing sampled"""

    gamma = GREEDY_RATIO if algorithm != "nr_greedy" else None
    report = SolverReport(algorithm, (), 0, 0.0, gamma, errors=params.errors(), estimate=0.0)
    return attach_influence(report, g, cfg, params)


def run_rs(g: DirectedGraph, cfg: CascadeConfig, params: SolverParams) -> SolverReport:
    """
    Reverse Sandwich: f_lo estimation, sample planning, main collection, sandwich.

    The report carries the computable ratio branch; the formal guarantee itself is not checked here.
    """

    from src.threads.worker_pool import WorkerPool

    _check_budget(cfg, g, params.k)
    if params.k == 0:
        return empty_report("rs", g, cfg, params)

    timings = {}
    rules = cfg.compile(g)
    with WorkerPool(g, cfg, params.workers) as pool:
        started = time.perf_counter()
        f_lo = estimate_opt_lower(g, cfg, params, pool, rules)
        timings["opt_lower"] = time.perf_counter() - started
        l = plan_sample_size(g.n, params.k, params, f_lo)
        logger.info("f_lo=%.3f, planning %d tuples", f_lo, l)

        started = time.perf_counter()
        tuples, _ = pool.sample(params.rng_seed, Stream.COLLECTION, l)
        coll = TupleCollection(g, cfg, rules, tuples)
        timings["collection"] = time.perf_counter() - started
    stats = coll.stats()
    logger.info("collection: %s", stats)

    started = time.perf_counter()
    result = replace(sandwich(coll, params.k), f_lo=f_lo)
    timings["sandwich"] = time.perf_counter() - started

    report = SolverReport("rs", result.seeds, l, f_lo, result.gamma_lower, sandwich=result, timings=timings,
                          collection=stats, errors=params.errors(),
                          estimate=result.estimates[f"{result.chosen}_seeds"]["exact_g"])
    return attach_influence(report, g, cfg, params)

# Filename: baselines_model.py

"""Comparison algorithms: plain greedy on the unbiased tuple estimator, and competition-oblivious selection."""

import logging
import math
import time
from dataclasses import replace

from src.models.cascade_model import CascadeConfig
from src.models.errors import ResourceLimitError
from src.models.graph_model import DirectedGraph
from src.models.rng_model import Stream
from src.models.sampling_model import EstimatorKind, TupleCollection, eval_g
from src.models.solver_model import (SolverParams, SolverReport, _check_budget, attach_influence,
                                     empty_report, estimate_opt_lower, run_rs, sample_bounds)

logger = logging.getLogger(__name__)

# Candidates scanned between two progress records
PROGRESS_EVERY = 500


def nr_greedy_select(coll: TupleCollection, k: int, candidates=None) -> list:
    """
    Plain greedy on the tuple count of G, no lazy evaluation.

    A candidate v can only change the tuples whose upper set contains v, so each marginal gain
    re-evaluates just those tuples. Stops when the best marginal gain is negative.
    """

    candidates = coll.config.candidate_list(coll.n) if candidates is None else sorted(set(candidates))
    target = min(k, len(candidates))
    values = [0] * coll.l
    seeds = []
    remaining = list(candidates)

    while len(seeds) < target:
        best, best_gain, best_values = None, None, None
        for scanned, v in enumerate(remaining, start=1):
            trial_seeds = frozenset(seeds) | {v}
            touched = coll.covering(v, EstimatorKind.UPPER).tolist()
            updated = {tid: eval_g(coll.tuples[tid], coll.config, trial_seeds, coll.rules) for tid in touched}
            gain = sum(updated[tid] - values[tid] for tid in touched)
            if best_gain is None or gain > best_gain:
                best, best_gain, best_values = v, gain, updated
            if scanned % PROGRESS_EVERY == 0:
                logger.debug("step %d: scanned %d of %d candidates", len(seeds) + 1, scanned, len(remaining))
        if best_gain < 0:
            break
        seeds.append(best)
        remaining.remove(best)
        for tid, value in best_values.items():
            values[tid] = value
        logger.info("nr_greedy step %d: picked %d, marginal %d tuples", len(seeds), best, best_gain)
    return seeds


def run_nr_greedy(g: DirectedGraph, cfg: CascadeConfig, params: SolverParams) -> SolverReport:
    """
    NR-Greedy: l = ceil(l2 * sample_multiplier / f_lo) tuples, then plain greedy on G.

    f_lo comes from the same estimation as the Reverse Sandwich run.
    """

    from src.threads.worker_pool import WorkerPool

    _check_budget(cfg, g, params.k)
    if params.k == 0:
        return empty_report("nr_greedy", g, cfg, params)

    timings = {}
    rules = cfg.compile(g)
    with WorkerPool(g, cfg, params.workers) as pool:
        started = time.perf_counter()
        f_lo = estimate_opt_lower(g, cfg, params, pool, rules)
        timings["opt_lower"] = time.perf_counter() - started

        _, l2 = sample_bounds(g.n, params.k, params)
        planned = l2 * params.sample_multiplier / f_lo
        if not math.isfinite(planned) or planned > params.max_tuples:
            raise ResourceLimitError(f"planned {planned:.4g} tuples, above the cap of {params.max_tuples}")
        l = int(math.ceil(planned))
        logger.info("f_lo=%.3f, planning %d tuples", f_lo, l)

        started = time.perf_counter()
        tuples, _ = pool.sample(params.rng_seed, Stream.COLLECTION, l)
        coll = TupleCollection(g, cfg, rules, tuples)
        timings["collection"] = time.perf_counter() - started

    started = time.perf_counter()
    seeds = nr_greedy_select(coll, params.k)
    timings["greedy"] = time.perf_counter() - started

    report = SolverReport("nr_greedy", tuple(seeds), l, f_lo, timings=timings, collection=coll.stats(),
                          errors=params.errors(), estimate=coll.estimate(seeds, EstimatorKind.EXACT_G))
    return attach_influence(report, g, cfg, params)


def run_maxinf(g: DirectedGraph, cfg: CascadeConfig, params: SolverParams) -> SolverReport:
    """
    MaxInf: the Reverse Sandwich pipeline with the existing cascades removed.

    The chosen seeds are evaluated under the original configuration.
    """

    oblivious = run_rs(g, cfg.without_existing(), replace(params, evaluation_trials=0))
    oblivious.algorithm = "maxinf"
    oblivious.estimate = None
    return attach_influence(oblivious, g, cfg, params)

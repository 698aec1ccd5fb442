# Filename: worker_pool.py

"""Worker pool that runs tuple sampling and Monte-Carlo trials concurrently with the solver."""

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Optional, Sequence

import numpy as np

from src.models.cascade_model import CascadeConfig, run_trial
from src.models.errors import ConfigError
from src.models.graph_model import DirectedGraph
from src.models.rng_model import Stream, seed_sequence
from src.models.sampling_model import CHUNK_SIZE, TupleSampler

logger = logging.getLogger(__name__)

THREADS_ENV = "MCIM_THREADS"


def resolve_workers(requested: Optional[int] = None) -> int:
    """Worker count: the request, capped by MCIM_THREADS (default: CPU count)"""

    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            cap = int(raw)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    else:
        cap = os.cpu_count() or 1
    cap = max(1, cap)
    return max(1, min(requested, cap)) if requested else cap


class _Worker:
    """
    Per-process state: the graph, the configuration, compiled activation rules and a sampler.

    :param graph: Graph shared read-only by every task
    :type graph: DirectedGraph
    :param config: Cascade configuration
    :type config: CascadeConfig
    """

    def __init__(self, graph: DirectedGraph, config: CascadeConfig) -> None:
        self.graph = graph
        self.config = config
        self.rules = config.compile(graph)
        self.sampler = TupleSampler(graph, config)

    def sample_chunk(self, task: tuple) -> list:
        seed, count = task
        return self.sampler.sample(seed, count)

    def trial(self, task: tuple) -> list:
        new_seeds, seed = task
        return run_trial(self.graph, self.config, self.rules, new_seeds, seed)


# One instance per child process, set by the pool initializer
_process_worker = None


def _init_process(graph: DirectedGraph, config: CascadeConfig) -> None:
    global _process_worker
    _process_worker = _Worker(graph, config)


def _sample_chunk(task: tuple) -> list:
    return _process_worker.sample_chunk(task)


def _trial(task: tuple) -> list:
    return _process_worker.trial(task)


class WorkerPool:
    """
    Process pool bound to one graph and one cascade configuration.

    With a single worker everything runs in-process. Results always come back in task order,
    and every task carries its own seed, so outputs do not depend on the worker count.

    :param graph: Graph handed to every worker once, at start-up
    :type graph: DirectedGraph
    :param config: Cascade configuration handed to every worker
    :type config: CascadeConfig
    :param workers: Requested worker count, capped by MCIM_THREADS
    :type workers: int
    """

    def __init__(self, graph: DirectedGraph, config: CascadeConfig, workers: Optional[int] = None) -> None:
        self.graph = graph
        self.config = config
        self.workers = resolve_workers(workers)
        self._executor = None
        self._local = None

    def __enter__(self) -> "WorkerPool":
        if self.workers > 1:
            logger.debug("starting %d sampling workers", self.workers)
            self._executor = ProcessPoolExecutor(max_workers=self.workers, initializer=_init_process,
                                                 initargs=(self.graph, self.config))
        else:
            self._local = _Worker(self.graph, self.config)
        return self

    def __exit__(self, *exc_info) -> None:
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None
        self._local = None

    def _map(self, process_fn, local_fn, tasks: Sequence[tuple]) -> list:
        if self._executor is None and self._local is None:
            raise RuntimeError("WorkerPool used outside its context")
        if self._executor is not None and len(tasks) > 1:
            chunksize = max(1, len(tasks) // (self.workers * 4))
            return list(self._executor.map(process_fn, tasks, chunksize=chunksize))
        if self._local is None:
            self._local = _Worker(self.graph, self.config)
        return [local_fn(task) for task in tasks]

    def sample(self, root_seed: int, stream: Stream, count: int, first_chunk: int = 0) -> tuple:
        """
        count RR-tuples from chunk streams first_chunk, first_chunk+1, ...

        Returns the tuples in chunk order and the next unused chunk index.
        """

        tasks = []
        chunk = first_chunk
        remaining = count
        while remaining > 0:
            size = min(CHUNK_SIZE, remaining)
            tasks.append((seed_sequence(root_seed, stream, chunk), size))
            remaining -= size
            chunk += 1
        tuples = []
        for batch in self._map(_sample_chunk, lambda task: self._local.sample_chunk(task), tasks):
            tuples.extend(batch)
        return tuples, chunk

    def run_trials(self, new_seeds: frozenset, seeds: Sequence[np.random.SeedSequence]) -> list:
        """Active node lists of one diffusion per seed, in seed order"""

        tasks = [(new_seeds, seed) for seed in seeds]
        return self._map(_trial, lambda task: self._local.trial(task), tasks)

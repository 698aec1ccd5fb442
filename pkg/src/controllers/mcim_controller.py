# Filename: mcim_controller.py

"""Controller that connects the command line (view) to the solver, baselines, evaluation and oracle models."""

import logging
import time
from typing import List, Optional

from src.models.baselines_model import run_maxinf, run_nr_greedy
from src.models.cascade_model import estimate_influence, seed_overlap
from src.models.errors import ConfigError, McimError
from src.models.oracle_model import run_oracle_checks
from src.models.rng_model import RNG_ALGORITHM
from src.models.run_config_model import ALGORITHMS, load_run, read_seed_file
from src.models.solver_model import run_rs

logger = logging.getLogger(__name__)

SOLVERS = {"rs": run_rs, "nr_greedy": run_nr_greedy, "maxinf": run_maxinf}

SWEEP_FIELDS = ["algorithm", "k", "seed_fraction", "rng_seed", "seeds", "influence_mean", "influence_stderr",
                "not_active_mean", "trials", "gamma_lower", "l", "f_lo", "overlap", "seconds"]

ORACLE_FAILED = 1


class McimController:
    """
    A class that represents the controller for the Model-View-Controller(MVC) design pattern.

    Controller receives a parsed command from the view, puts the models to work and hands the
    report (or the error) back to the view.

    :param view: Object of the McimView class (View)
    :type view: McimView
    """

    def __init__(self, view_Obj: object) -> None:
        """Controller Initializer"""

        self.view = view_Obj
        self.commands = {
            "solve": self._cmd_solve,
            "evaluate": self._cmd_evaluate,
            "sweep": self._cmd_sweep,
            "oracle-check": self._cmd_oracle_check,
        }

    def run(self, argv: Optional[List[str]] = None) -> int:
        """Parses argv, runs the command and returns the process exit code"""

        args = self.view.parseArgs(argv)
        return self.dispatch(args)

    def dispatch(self, args) -> int:
        """Runs an already parsed command; McimError becomes an error record"""

        try:
            return self.commands[args.command](args)
        except McimError as error:
            logger.error("%s failed: %s", args.command, error.message)
            return self.view.errorRecord(error)
        except OSError as error:
            return self.view.errorRecord(ConfigError(f"{error.strerror or error}: {error.filename or ''}".strip()))

    def _cmd_solve(self, args) -> int:
        """Dispatches to the configured algorithm and writes its JSON report"""

        config, g, cfg = load_run(args.config)
        logger.info("solving with %s, k=%d", config.algorithm, config.params.k)
        report = SOLVERS[config.algorithm](g, cfg, config.params)

        record = report.to_dict(g.labels)
        record["graph"] = g.summary(config.scheme)
        record["config"] = config.echo()
        self.view.writeJson(record, args.out)
        return 0

    def _cmd_evaluate(self, args) -> int:
        """Monte-Carlo influence and not-active count of a seed file under the full configuration"""

        config, g, cfg = load_run(args.config)
        seeds = read_seed_file(g, args.seeds)
        trials = args.trials if args.trials is not None else config.trials
        influence = estimate_influence(g, cfg, seeds, trials, config.rng_seed, config.params.workers)

        record = {
            "seeds": [g.labels[v] for v in sorted(seeds)],
            "influence": influence.to_dict(),
            "not_active_mean": influence.not_active_mean,
            "graph": g.summary(config.scheme),
            "config": config.echo(),
            "rng": RNG_ALGORITHM,
        }
        self.view.writeJson(record, args.out)
        return 0

    def _sweep_algorithms(self, args, default: str) -> list:
        if not args.algorithms:
            return [default]
        algorithms = [name.strip() for name in args.algorithms.split(",") if name.strip()]
        unknown = [name for name in algorithms if name not in ALGORITHMS]
        if unknown:
            raise ConfigError(f"unknown algorithms in --algorithms: {', '.join(unknown)}")
        return algorithms

    def _cmd_sweep(self, args) -> int:
        """
        One CSV row per (seed fraction, k, algorithm), appended as soon as it is computed.

        overlap is the share of seeds each algorithm has in common with the first algorithm at the same k.
        """

        config, g, _ = load_run(args.config)
        algorithms = self._sweep_algorithms(args, config.algorithm)
        fractions = args.seed_fractions or [None]

        for fraction in fractions:
            run_config = config.with_seed_fraction(fraction) if fraction is not None else config
            cfg = run_config.build_cascades(g)
            for k in args.k_list:
                params = run_config.with_k(k).params
                reference = None
                for algorithm in algorithms:
                    started = time.perf_counter()
                    report = SOLVERS[algorithm](g, cfg, params)
                    seconds = time.perf_counter() - started
                    if reference is None:
                        reference = report.seeds
                    influence = report.influence
                    row = {
                        "algorithm": algorithm,
                        "k": k,
                        "seed_fraction": fraction if fraction is not None else "",
                        "rng_seed": config.rng_seed,
                        "seeds": " ".join(g.labels[v] for v in report.seeds),
                        "influence_mean": influence.mean if influence else "",
                        "influence_stderr": influence.stderr if influence else "",
                        "not_active_mean": influence.not_active_mean if influence else "",
                        "trials": influence.trials if influence else "",
                        "gamma_lower": report.gamma_lower if report.gamma_lower is not None else "",
                        "l": report.l,
                        "f_lo": report.f_lo,
                        "overlap": seed_overlap(report.seeds, reference),
                        "seconds": round(seconds, 3),
                    }
                    self.view.appendCsvRows([row], SWEEP_FIELDS, args.out)
                    logger.info("sweep row: %s k=%d fraction=%s influence=%s", algorithm, k, fraction,
                                row["influence_mean"])
        return 0

    def _cmd_oracle_check(self, args) -> int:
        """Unbiasedness, sandwich-ordering and tightness suites; exit code 1 on any failure"""

        config, g, cfg = load_run(args.config)
        report = run_oracle_checks(g, cfg, args.tuples, config.rng_seed, args.z)
        record = report.to_dict(g.labels)
        record["config"] = config.echo()
        self.view.writeJson(record, args.out)
        return 0 if report.passed else ORACLE_FAILED

# Filename: mcim_view.py

"""View that is solely focused on the command-line surface: arguments in, reports and error records out."""

# Import argparse for the command-line front door
import argparse
# Import csv for the sweep rows and json for the reports
import csv
import json
import os
import sys
from typing import Iterable, List, Optional, TextIO

from src.models.errors import McimError

LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR"]


def _int_list(text: str) -> List[int]:
    try:
        return [int(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> List[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


class McimView:
    """
    A class that represents the view for the Model-View-Controller(MVC) design pattern.

    Parses the command line and writes JSON reports, CSV sweep rows and error records.
    Reports go to the --out file or to standard output; error records always go to standard error.

    :param stdout: Stream for reports without --out
    :type stdout: TextIO
    :param stderr: Stream for error records
    :type stderr: TextIO
    """

    COMMANDS = ["solve", "evaluate", "sweep", "oracle-check"]

    def __init__(self, stdout: Optional[TextIO] = None, stderr: Optional[TextIO] = None) -> None:
        """View Initializer"""

        self.stdout = stdout or sys.stdout
        self.stderr = stderr or sys.stderr
        self.parser = self._create_parser()

    def _create_parser(self) -> argparse.ArgumentParser:
        """Creates the parser with one subcommand per command"""

        parser = argparse.ArgumentParser(prog="mcim", description="Multi-cascade influence maximization")
        parser.add_argument("--log-level", choices=LOG_LEVELS, default=os.environ.get("MCIM_LOG_LEVEL", "INFO").upper(),
                            help="log level of the standard-error log (default: MCIM_LOG_LEVEL or INFO)")
        commands = parser.add_subparsers(dest="command", required=True)

        solve = commands.add_parser("solve", help="select seeds for the new cascade")
        solve.add_argument("--config", required=True)
        solve.add_argument("--out", help="report path, standard output when omitted")

        evaluate = commands.add_parser("evaluate", help="Monte-Carlo influence of a seed file")
        evaluate.add_argument("--config", required=True)
        evaluate.add_argument("--seeds", required=True, help="file with one seed label per line")
        evaluate.add_argument("--trials", type=int, help="overrides evaluate.trials")
        evaluate.add_argument("--out")

        sweep = commands.add_parser("sweep", help="one CSV row per (algorithm, k)")
        sweep.add_argument("--config", required=True)
        sweep.add_argument("--k-list", type=_int_list, required=True)
        sweep.add_argument("--out", required=True, help="CSV path, rows are appended")
        sweep.add_argument("--algorithms", default=None,
                           help="comma-separated subset of rs,nr_greedy,maxinf (default: the config's algorithm)")
        sweep.add_argument("--seed-fractions", type=_float_list, default=None,
                           help="re-draw every existing cascade at each fraction")

        oracle = commands.add_parser("oracle-check", help="validate the tuple sampler against exact enumeration")
        oracle.add_argument("--config", required=True)
        oracle.add_argument("--tuples", type=int, default=100_000)
        oracle.add_argument("--z", type=float, default=3.0, help="allowed standard errors")
        oracle.add_argument("--out")
        return parser

    def parseArgs(self, argv: Optional[List[str]] = None) -> argparse.Namespace:
        """Parses argv (sys.argv[1:] when None)"""

        return self.parser.parse_args(argv)

    def writeJson(self, record: dict, out: Optional[str] = None) -> None:
        """Writes one JSON report, keys sorted so identical runs give identical bytes"""

        text = json.dumps(record, sort_keys=True, indent=2) + "\n"
        if out:
            with open(out, "w", encoding="utf-8") as stream:
                stream.write(text)
        else:
            self.stdout.write(text)
            self.stdout.flush()

    def appendCsvRows(self, rows: Iterable[dict], fieldnames: List[str], out: str) -> None:
        """Appends rows to a CSV file, writing the header only when the file is new or empty"""

        write_header = not os.path.exists(out) or os.path.getsize(out) == 0
        with open(out, "a", newline="", encoding="utf-8") as stream:
            writer = csv.DictWriter(stream, fieldnames=fieldnames)
            if write_header:
                writer.writeheader()
            for row in rows:
                writer.writerow(row)

    def errorRecord(self, error: McimError) -> int:
        """Writes a single-line JSON error record to standard error and returns the exit code"""

        self.stderr.write(json.dumps(error.record(), sort_keys=True) + "\n")
        self.stderr.flush()
        return error.exit_code

# Filename: main.py

"""Entry point: configures logging and hands the command line to the controller."""

import logging
import sys

from src.controllers.mcim_controller import McimController
from src.views.mcim_view import McimView

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def main(argv=None) -> int:
    view = McimView()
    args = view.parseArgs(argv)
    logging.basicConfig(stream=sys.stderr, level=args.log_level, format=LOG_FORMAT)
    return McimController(view).dispatch(args)


if __name__ == "__main__":
    sys.exit(main())

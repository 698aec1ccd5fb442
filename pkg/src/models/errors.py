# Filename: errors.py

"""Exception hierarchy shared by the models, the controller and the view."""

from typing import Optional


class McimError(Exception):
    """
    Base class of every error the solver raises on purpose.

    The controller catches this class at the command boundary and the view turns
    it into a machine-parsable error record.

    :param message: Human readable description naming the offending value
    :type message: str
    """

    exit_code = 2

    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message

    def record(self) -> dict:
        """Returns the error as a JSON-ready dictionary"""

        return {"error": type(self).__name__, "message": self.message}


class GraphFormatError(McimError):
    """
    Malformed edge-list input.

    :param line: 1-based line number of the offending line, if any
    :type line: int
    """

    def __init__(self, message: str, line: Optional[int] = None) -> None:
        super().__init__(message)
        self.line = line

    def record(self) -> dict:
        record = super().record()
        if self.line is not None:
            record["line"] = self.line
        return record


class ProbabilityError(GraphFormatError):
    """Edge probability outside (0, 1] or missing where one is required."""


class ConfigError(McimError):
    """Invalid run configuration, cascade configuration or solver parameters."""


class ActivationError(McimError):
    """An activation function could not resolve an offer set."""


class OracleGuardError(McimError):
    """Instance is too large for exhaustive enumeration."""


class EmptyCollectionError(McimError):
    """An estimator or greedy call received an empty tuple collection."""


class ResourceLimitError(McimError):
    """A planned sample size or enumeration exceeds the configured cap."""

    exit_code = 3

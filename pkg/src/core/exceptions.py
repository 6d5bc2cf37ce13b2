"""
Error hierarchy shared by the services and the command line.
"""
from typing import Any, Optional


class PeelingError(Exception):
    """Base class of every error raised on purpose by this package"""


class DomainError(PeelingError, ValueError):
    """An argument lies outside the domain of an operation"""


class ConfigError(PeelingError, ValueError):
    """An experiment configuration cannot be run as given"""


class ContractViolation(PeelingError, RuntimeError):
    """A state was used in a way its invariants forbid"""


class CensoredTrialError(PeelingError, RuntimeError):
    """A trial hit its step budget before the stopping rule fired"""

    def __init__(self, message: str, steps: int):
        super().__init__(message)
        self.steps = steps


class InconclusiveResult(PeelingError):
    """An estimator ran out of budget or evidence; the partial result rides along"""

    def __init__(self, message: str, partial: Optional[Any] = None):
        super().__init__(message)
        self.partial = partial


class OutputError(PeelingError, OSError):
    """Writing a record or a stream failed"""

    def __init__(self, message: str, path: str):
        super().__init__(f"{message} ({path})")
        self.path = path

"""Exception types shared across the package."""


class CodedStreamError(Exception):
    """Base class for all package-specific errors."""


class InvalidArgumentError(CodedStreamError, ValueError):
    """An argument violates a documented precondition."""


class DegenerateWorkerError(CodedStreamError, ValueError):
    """A worker with zero mean task time cannot enter the load-split solve."""


class UnstableSystemError(CodedStreamError, RuntimeError):
    """Requested a steady-state delay for a queue with utilization >= 1."""


class NumericalFailureError(CodedStreamError, RuntimeError):
    """A numerical routine failed to converge; message carries diagnostics."""


class SubsetBudgetError(CodedStreamError, RuntimeError):
    """Exhaustive subset validation would exceed the configured budget."""


class DecodeFailureError(CodedStreamError, RuntimeError):
    """The requested row subset cannot reproduce the all-ones combination."""


class ConstructionError(CodedStreamError, ValueError):
    """Code-matrix construction parameters admit no supported layout."""


class ConfigError(CodedStreamError, ValueError):
    """An experiment configuration file is malformed or inconsistent."""

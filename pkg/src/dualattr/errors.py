"""Exception types shared across the toolkit.

Callers can catch ``DualattrError`` to handle any toolkit failure; the
subclasses distinguish bad configuration from violated call contracts
and from numerical breakdown during training.
"""


class DualattrError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(DualattrError):
    """A configuration value or schema reference is invalid."""


class ContractError(DualattrError):
    """A documented precondition of an operation was violated."""


class ShapeError(ContractError):
    """Tensor shapes are incompatible for the requested primitive."""


class NumericalError(DualattrError):
    """A computation produced non-finite values."""


class MetricUndefinedError(DualattrError):
    """The requested metric is undefined for the given inputs."""


class CheckpointError(DualattrError):
    """A checkpoint is missing, malformed, or inconsistent with its config."""

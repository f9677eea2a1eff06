"""
Exception hierarchy for the mgpll package.

Every error carries a short ``category`` token. The command-line scripts
print it as ``error[<category>]: <message>`` so failures are machine-parsable.
"""

from typing import Optional


class MgpllError(Exception):
    """Base class for all errors raised by mgpll."""
    category = "mgpll"


class ShapeError(MgpllError, ValueError):
    """Array dimensions do not match what an operation expects."""
    category = "shape"


class NonFiniteError(MgpllError, FloatingPointError):
    """NaN or Inf entered or left a numerical operation."""
    category = "non_finite"


class StaleTapeError(MgpllError, RuntimeError):
    """Backward pass requested on a tape recorded before the state changed."""
    category = "stale_tape"


class BatchNormError(MgpllError, ValueError):
    """Train-mode batch normalization was given a single row."""
    category = "batch_norm"


class ConfigError(MgpllError, ValueError):
    """Invalid configuration value."""
    category = "config"


class DatasetError(MgpllError, ValueError):
    """A PL dataset violates its invariants or cannot support an operation."""
    category = "dataset"


class DatasetFormatError(DatasetError):
    """A dataset file could not be parsed."""
    category = "dataset_format"

    def __init__(self, path, line: Optional[int], message: str):
        self.path = path
        self.line = line
        self.message = message
        location = f"{path}:{line}" if line is not None else f"{path}"
        super().__init__(f"{location}: {message}")


class NonFiniteLossError(NonFiniteError):
    """Training produced a NaN/Inf loss term and was aborted."""
    category = "non_finite_loss"

    def __init__(self, epoch: int, iteration: int, term: str):
        self.epoch = epoch
        self.iteration = iteration
        self.term = term
        super().__init__(
            f"non-finite {term} at epoch {epoch}, iteration {iteration}"
        )


class MetricError(MgpllError, ValueError):
    """A metric cannot be computed on the given inputs."""
    category = "metric"


class CheckpointError(MgpllError, RuntimeError):
    """A checkpoint file is unreadable or has an unsupported version."""
    category = "checkpoint"

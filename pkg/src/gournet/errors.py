"""Exception hierarchy shared across the engine.

The CLI maps these onto exit codes: usage problems exit 1, data problems
(bad files, bad configs, bad shapes) exit 2, numeric failures exit 3.
"""


class GourNetError(Exception):
    """Base class for all engine errors."""


class ShapeError(GourNetError):
    """Tensor shapes are incompatible with the requested operation."""


class DomainError(GourNetError):
    """An input value lies outside an operation's mathematical domain."""


class ConfigError(GourNetError):
    """An architecture config failed to parse or validate."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DataError(GourNetError):
    """A dataset, image file, or manifest could not be used."""


class CheckpointError(GourNetError):
    """A checkpoint file is missing, corrupt, or mismatched."""


class TrainingError(GourNetError):
    """Training hit a non-recoverable numeric condition."""

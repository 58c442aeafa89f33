"""Exception types shared across the package."""


class MolConsensusError(Exception):
    """Base class for all package errors."""


class DomainError(MolConsensusError, ValueError):
    """An argument is outside the mathematical domain of the operation."""


class DivergenceError(MolConsensusError, ValueError):
    """The requested integral diverges (zero distance in 2-D/3-D media)."""


class ModeError(MolConsensusError, ValueError):
    """A normalization mode is incompatible with the given matrix."""


class ConvergenceError(MolConsensusError, RuntimeError):
    """An iterative numerical method failed to converge."""


class ConfigError(MolConsensusError, ValueError):
    """Invalid configuration or geometry document.

    `path` is the dotted key path of the offending field, e.g. "medium.D".
    """

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")

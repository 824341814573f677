"""Error hierarchy shared by every layer; routes turn these into exit codes."""


class NcOodError(Exception):
    """Base class for all domain errors."""

    exit_code: int = 1


class ConfigurationError(NcOodError):
    """Invalid parameters, unknown config keys or contract misuse."""

    exit_code = 2


class ConfigMismatchError(ConfigurationError):
    """A resumed run was given a config different from the original run's."""


class DataError(NcOodError):
    """Unreadable, malformed or inconsistent data files and populations."""

    exit_code = 3


class CheckpointFormatError(DataError):
    """Checkpoint has a bad magic tag, unsupported version or truncated payload."""


class NumericError(NcOodError):
    """Numerical failure: degenerate inputs, failed gradient checks."""

    exit_code = 4


class DimensionError(NumericError):
    """Operand shapes do not agree."""


class TapeError(NumericError):
    """Invalid use of the differentiation tape."""

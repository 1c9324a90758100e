"""Exception taxonomy shared across the package."""


class StgnnError(Exception):
    """Base class for every error raised by this package."""


class ShapeError(StgnnError):
    """Operand shapes are incompatible."""


class GeometryError(StgnnError):
    """An operation would produce an empty or invalid layout."""


class ContractError(StgnnError):
    """A documented precondition was violated."""


class ConfigError(StgnnError):
    """Invalid configuration value or combination."""


class DataError(StgnnError):
    """Malformed dataset file or manifest."""


class MetricError(StgnnError):
    """Metrics are undefined for the given inputs."""


class HarnessError(StgnnError):
    """The evaluation protocol could not complete."""

"""Exception hierarchy for holomem."""


class HolomemError(Exception):
    """Base class for all library errors."""


class CapacityError(HolomemError, ValueError):
    """A sector index or system size exceeds the configured limit."""


class DegenerateScheduleError(HolomemError, ValueError):
    """The total control amplitude vanishes, so the mixing angle is undefined."""


class ProtocolSetupError(HolomemError, ValueError):
    """A schedule does not satisfy the write/read endpoint conditions."""


class DesignError(HolomemError, ValueError):
    """A requested geometric phase cannot be reached within the pulse family."""


class ConfigError(HolomemError, ValueError):
    """Invalid run configuration."""


class AccuracyWarning(UserWarning):
    """A numerical step is too coarse for the requested accuracy."""

"""Exception types shared across the simulator."""


class PoolSwitchError(Exception):
    """Base class for all simulator errors."""


class ConfigError(PoolSwitchError):
    """Invalid configuration: bad port index, unresolvable chain, bad parameter."""


class ClassificationError(PoolSwitchError):
    """A flow matched no forwarding rule and no default rule exists."""


class InvariantError(PoolSwitchError):
    """An internal invariant was violated; the run is not trustworthy past this point."""


class UndefinedMetricError(PoolSwitchError):
    """A statistic was requested whose denominator is zero."""

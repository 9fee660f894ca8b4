"""Exception and warning types raised by ssbtma."""


class TmaError(Exception):
    """Base class for all ssbtma errors."""


class InvalidArgument(TmaError, ValueError):
    pass


class UnsupportedSteering(TmaError):
    """Closed-form steering is only defined for arrays along the z-axis."""


class DegenerateDesign(TmaError):
    """The design radiates no power (every element switched off)."""


class MetricsUndefined(TmaError):
    """Pattern has no interior main lobe, so SLL/FNBW cannot be extracted."""


class ConfigError(TmaError):
    """Malformed or inconsistent run configuration."""


class CoincidentElementsWarning(UserWarning):
    pass

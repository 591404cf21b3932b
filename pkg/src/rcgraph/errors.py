"""Exception hierarchy.

Everything raised on bad input derives from :class:`RCGraphError` (itself a
``ValueError``), so the CLI can map it to the validation exit code.
"""


class RCGraphError(ValueError):
    pass


class InvalidModelError(RCGraphError):
    """An edge-probability model has a lambda-value outside ``[0, n]``."""


class DegenerateProbabilityError(RCGraphError):
    """An edge probability is exactly 0 or 1 where an interior value is needed."""


class DomainError(RCGraphError):
    """A scalar argument lies outside the domain of the formula."""


class UndefinedNormalizerError(RCGraphError):
    """The Lindeberg normalizer ``s_n`` is zero."""


class EnumerationTooLargeError(RCGraphError):
    pass


class ConfigError(RCGraphError):
    """Experiment or CLI configuration failed validation."""

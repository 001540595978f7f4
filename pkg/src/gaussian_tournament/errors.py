"""Exception hierarchy.

Every failure raised by the package derives from :class:`ArtifactError` and
carries the offending quantities as attributes so callers (and the CLI) can
report them without parsing messages.
"""


class ArtifactError(ValueError):
    """Base class; ``details`` holds the structured payload."""

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details

    def __getattr__(self, name):
        details = self.__dict__.get("details", {})
        if name in details:
            return details[name]
        raise AttributeError(name)


class DimensionError(ArtifactError):
    pass


class NotPSDError(ArtifactError):
    pass


class InsufficientSamplesError(ArtifactError):
    pass


class InadmissibleDeltaError(ArtifactError):
    pass


class NonFiniteInputError(ArtifactError):
    pass


class EntropyConditionError(ArtifactError):
    """The packing count at the requested scale exceeds the entropy budget."""


class BudgetExceededError(ArtifactError):
    """Too many multipliers / levels for the available confidence budget."""


class ConfigError(ArtifactError):
    pass


class PartitionError(ArtifactError):
    pass

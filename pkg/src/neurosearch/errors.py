"""Exception types shared across the package."""


class NeurosearchError(Exception):
    """Base class for all package errors."""


class DomainError(NeurosearchError):
    """Input violates an operation precondition (bad shape, range, value)."""


class ConfigurationError(NeurosearchError):
    """Configuration is internally inconsistent (e.g. aliasing refresh rate)."""


class EncodingError(DomainError):
    """A query character has no pinyin mapping."""

    def __init__(self, characters):
        self.characters = list(characters)
        super().__init__(f"no pinyin mapping for: {''.join(self.characters)}")


class NoDecision(NeurosearchError):
    """Recognition confidence below threshold; caller may retry with a longer window."""

    def __init__(self, result=None, message="confidence below threshold"):
        self.result = result
        super().__init__(message)


class PhaseError(NeurosearchError):
    """Event is not valid for the session's current phase; state unchanged."""

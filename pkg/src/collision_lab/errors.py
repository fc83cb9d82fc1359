"""Exception types shared across the library."""


class DomainError(ValueError):
    """An argument is outside the mathematical domain of an operation."""


class CapacityError(RuntimeError):
    """A configured size cap would be exceeded; raised instead of degrading."""


class BracketingError(ValueError):
    """A root solver was given an interval without a sign change."""

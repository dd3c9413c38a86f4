"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument is outside the mathematical domain of an operation."""


class PreconditionError(ValueError):
    """A documented precondition of an operation is violated."""


class DegenerateBodyError(PreconditionError):
    """Input does not have nonempty interior in its ambient space."""


class ResourceLimitError(RuntimeError):
    """An enumeration or search would exceed its documented budget."""


class InconsistencyError(RuntimeError):
    """An internal consistency guarantee failed; indicates a bug upstream."""

"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class VerificationError(RuntimeError):
    """A numerical verification sweep failed (tolerance breach or no
    admissible parameter found)."""

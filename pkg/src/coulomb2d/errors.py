"""Exception types shared across the package.

The CLI maps these onto exit codes, so each one names a failure class
rather than a module.
"""


class DomainError(ValueError):
    """Input lies outside the mathematical domain of an operation."""


class AdmissibilityError(DomainError):
    """Potential fails the positivity/confinement requirements."""


class PreconditionError(ValueError):
    """Caller violated a documented precondition (normalization, consistency)."""


class ConvergenceError(RuntimeError):
    """An iterative solve did not reach its tolerance."""


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""

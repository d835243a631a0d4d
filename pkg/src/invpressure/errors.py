"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A run configuration is malformed or references unknown names."""


class GuardError(RuntimeError):
    """A resource guard (word count, tree size, DP cells) was exceeded."""


class PreconditionError(ValueError):
    """A mathematical precondition fails (e.g. a scaling weight is not positive)."""

"""Exception types shared across the package.

The CLI maps these onto distinct exit codes, so keeping the categories
separate matters more than the class hierarchy itself.
"""


class InputError(ValueError):
    """Malformed or incompatible input data (files, partitions, degenerate graphs)."""


class PolicyError(ValueError):
    """Invalid parameter value or an inconsistent policy combination."""


class GuardError(RuntimeError):
    """A resource guard tripped (instance too large for an exhaustive routine)."""

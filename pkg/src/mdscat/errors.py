"""Exception types shared across the package.

The CLI maps :class:`ConfigError` to exit code 2 and :class:`DataError` to
exit code 3.
"""


class ConfigError(ValueError):
    """Invalid parameters: depths, fractions, region shapes, variant rules."""


class DataError(ValueError):
    """Malformed or missing input data."""


class StructureError(ValueError):
    """Pyramid or feature arrays whose shapes do not fit together."""


class InvariantError(RuntimeError):
    """An internal guarantee was violated; indicates a bug upstream."""

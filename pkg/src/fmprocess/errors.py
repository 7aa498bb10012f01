"""Exception hierarchy.

Two families matter to callers (and to the CLI exit codes):

* :class:`ValidationError` -- the input is well formed but violates a
  mathematical contract (not a contraction, not co-invariant, not
  stationary, ...).  Carries the offending ``residual``.
* :class:`InputError` -- the input is malformed (wrong shapes, wrong
  multiplicity, unparsable schema).
"""


class FMError(Exception):
    """Base class for all package errors."""


class InputError(FMError, ValueError):
    """Malformed input: shapes, multiplicities or schema."""


class DimensionError(InputError):
    pass


class MultiplicityError(InputError):
    pass


class SchemaError(InputError):
    pass


class DepthError(FMError, ValueError):
    """A request reaches beyond the valid domain of a truncated object."""


class ValidationError(FMError, ValueError):
    """A numerical contract is violated; ``residual`` quantifies by how much."""

    def __init__(self, message, residual=None):
        if residual is not None:
            message = f"{message} (residual {residual:.3e})"
        super().__init__(message)
        self.residual = residual


class NotPSDError(ValidationError):
    pass


class ContractionError(ValidationError):
    pass


class IsometryError(ValidationError):
    pass


class CoinvarianceError(ValidationError):
    pass


class WanderingError(ValidationError):
    pass


class SupportError(ValidationError):
    pass


class StationarityError(ValidationError):
    pass


class InvarianceError(ValidationError):
    pass


class NotUnitalError(ValidationError):
    pass


class ConvergenceError(ValidationError):
    pass

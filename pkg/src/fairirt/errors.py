"""Exception hierarchy.

Every error carries a short machine-parsable ``category`` that the CLI prints
as ``error[<category>]: <message>``.
"""


class FairIRTError(Exception):
    category = "error"


class InputError(FairIRTError, ValueError):
    """Bad values or records supplied by the caller."""

    category = "input"


class GridError(InputError):
    """Prediction records do not cover the model x individual grid."""

    category = "grid"


class ConstraintError(FairIRTError, ValueError):
    """An operation was called on parameters that violate its precondition."""

    category = "constraint"


class FitError(FairIRTError, ArithmeticError):
    """Non-finite loss or gradient during fitting."""

    category = "numeric"


class FormatError(FairIRTError, ValueError):
    """Malformed, truncated, or wrongly-versioned file."""

    category = "format"

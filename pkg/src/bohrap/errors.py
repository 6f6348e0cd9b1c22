"""Exception hierarchy shared across the toolkit.

Exit codes used by the CLI are attached to the classes so the dispatcher
does not need a mapping table.
"""


class BohrapError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1


class ValidationError(BohrapError):
    """Invalid input: malformed config, bad frequency text, illegal parameters."""

    exit_code = 2


class BasisMismatchError(ValidationError):
    """Operands reference different symbol bases."""


class BudgetError(BohrapError):
    """A computation would exceed its configured budget."""

    exit_code = 3


class SupportCapError(BudgetError):
    """Polynomial support would grow past the configured cap."""


class InternalInconsistencyError(BohrapError):
    """An exact invariant failed; this signals a bug, not bad input."""

    exit_code = 4

"""Exception types shared across the package.

The CLI maps them to exit codes: invalid input -> 2, violated internal
invariant -> 3.
"""


class InvalidInput(ValueError):
    """A caller handed us data that violates a documented precondition."""


class InvariantViolation(RuntimeError):
    """An internal consistency check failed; indicates a construction bug."""

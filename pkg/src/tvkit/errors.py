"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed or out-of-contract input (maps to CLI exit code 2)."""


class NumericFailure(ArithmeticError):
    """A numerical routine could not meet its contract (CLI exit code 3)."""


class SingularPointError(NumericFailure):
    """Density evaluated exactly at a critical value, where it is infinite."""

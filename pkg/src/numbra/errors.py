"""Exception types shared across the package.

File-system failures are left to the builtin OSError hierarchy; everything
raised here is a logical error in inputs or state.
"""


class NumbraError(Exception):
    """Base class for all package-specific errors."""


class DomainError(NumbraError, ValueError):
    """An argument violates a documented precondition."""


class MissingTokenError(NumbraError, KeyError):
    """A character of a number has no vector in the embedding table."""

    def __init__(self, token: str):
        self.token = token
        super().__init__(f"no embedding for token {token!r}")

    def __str__(self) -> str:  # KeyError would quote the args tuple
        return self.args[0]


class MalformedSequenceError(NumbraError):
    """A token sequence has unbalanced or misplaced number markers."""


class FormatError(NumbraError):
    """An embedding file does not follow the documented text format."""


class DivergenceError(NumbraError):
    """Training produced a non-finite loss."""

"""Exception types raised across the package."""


class InvalidInputError(ValueError):
    """Arguments violate a documented precondition."""


class NumericalFailureError(ArithmeticError):
    """A decomposition failed to converge or produced non-finite values."""


class FormatError(ValueError):
    """A stack or scene file is malformed.

    ``offset`` is the byte offset (stack files) or line number (scene files)
    where the problem was detected, when known.
    """

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at offset {offset})"
        super().__init__(message)
        self.offset = offset

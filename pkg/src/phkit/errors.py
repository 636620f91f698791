"""Exception hierarchy.

Everything raised deliberately by the package derives from :class:`PHError`.
The CLI maps :class:`DataError` to exit code 1; programming errors such as
shape mismatches surface as ``ValueError`` subclasses so they behave like
ordinary numpy/scipy failures when the library is used directly.
"""


class PHError(Exception):
    """Base class for all package errors."""


class DataError(PHError):
    """Input data is unreadable, malformed, or violates a domain invariant."""


class ParseError(DataError):
    """A CSV cell or row could not be parsed.

    ``row`` and ``column`` are one-based, matching what a user sees in an
    editor; either may be ``None`` when the error is not cell-specific.
    """

    def __init__(self, message, row=None, column=None, path=None):
        where = []
        if path is not None:
            where.append(str(path))
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        prefix = ", ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)
        self.row = row
        self.column = column
        self.path = path


class ShapeError(PHError, ValueError):
    """Matrix operands have nonconforming shapes."""


class IndexRangeError(PHError, IndexError):
    """A row or column index lies outside the matrix."""


class StructureError(PHError, ValueError):
    """A matrix lacks a structural property an operation requires
    (for example, upper-triangular with unit diagonal)."""


class EmptyFieldError(PHError, ValueError):
    """No Morse pair can be selected because the working matrix is zero."""


class UnsupportedModeError(PHError):
    """The requested output cannot be derived from this kind of reduction."""


class UnknownPredicateError(PHError, KeyError):
    """A weight predicate name is not registered."""


class BenchmarkMismatch(PHError):
    """Two benchmark variants produced different persistence diagrams."""

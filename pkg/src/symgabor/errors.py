"""Exception types shared by all modules."""


class SymGaborError(Exception):
    """Base class for all errors raised by this package."""


class NonInvertible(SymGaborError):
    pass


class DimensionMismatch(SymGaborError):
    pass


class TooLarge(SymGaborError):
    pass


class OddDimension(SymGaborError):
    pass


class NotSymplectic(SymGaborError):
    pass


class NotFree(SymGaborError):
    pass


class SearchFailed(SymGaborError):
    pass


class IllConditioned(SymGaborError):
    pass


class NotPositiveDefinite(SymGaborError):
    pass


class NotDiagonalK(SymGaborError):
    pass


class ZeroDEntry(SymGaborError):
    pass


class ZeroEntry(SymGaborError):
    pass


class GridMismatch(SymGaborError):
    pass


class NotAFrame(SymGaborError):
    pass


class NotConverged(SymGaborError):
    pass


class NotRelated(SymGaborError):
    pass


class ParseError(SymGaborError):
    """Malformed matrix document or entry expression.

    ``row`` and ``col`` locate the offending entry (None for document-level
    problems) and ``pos`` is the character offset inside the entry string.
    """

    def __init__(self, reason, row=None, col=None, pos=None):
        self.reason = reason
        self.row = row
        self.col = col
        self.pos = pos
        where = []
        if row is not None:
            where.append(f"row {row}")
        if col is not None:
            where.append(f"col {col}")
        if pos is not None:
            where.append(f"char {pos}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + reason)


class DimensionError(ParseError):
    pass

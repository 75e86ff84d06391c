"""Exception hierarchy shared by every psdmm module."""


class PSDMMError(Exception):
    """Base class for all library errors."""


class ZeroInverse(PSDMMError, ZeroDivisionError):
    pass


class FieldTooSmall(PSDMMError, ValueError):
    pass


class ModulusMismatch(PSDMMError, ValueError):
    pass


class DimensionMismatch(PSDMMError, ValueError):
    pass


class IndivisibleDimensions(PSDMMError, ValueError):
    pass


class RaggedBlocks(PSDMMError, ValueError):
    pass


class DuplicatePoints(PSDMMError, ValueError):
    pass


class CountMismatch(PSDMMError, ValueError):
    pass


class SingularSystem(PSDMMError, ArithmeticError):
    """The generalized Vandermonde system has no unique solution.

    Callers are expected to resample points or widen the responder set.
    """


class NotEnoughResponses(PSDMMError, ValueError):
    pass


class NonMdsExponents(PSDMMError, ValueError):
    pass


class ConfigInvalid(PSDMMError, ValueError):
    pass

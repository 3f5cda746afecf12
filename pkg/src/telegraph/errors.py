"""Exception hierarchy shared by every module of the package."""


class TelegraphError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(TelegraphError, ValueError):
    pass


class NonFinite(TelegraphError, ValueError):
    pass


class BranchCut(TelegraphError, ValueError):
    """An eigenvalue sits on the closed negative real axis, so no principal root exists."""


class ConvergenceFailure(TelegraphError, ArithmeticError):
    pass


class Singular(TelegraphError, ArithmeticError):
    pass


class DomainError(TelegraphError, ValueError):
    """Re(s) is outside the half-plane where the requested object is defined."""


class ShortCircuit(DomainError):
    """Immittance matrices do not exist for a line of zero length."""


class ValidationFailure(TelegraphError, ValueError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ParseError(TelegraphError, ValueError):
    pass


class UnknownCheck(TelegraphError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown check"


class SelfCheckMismatch(TelegraphError, ArithmeticError):
    """Blockwise and direct ABCD evaluations disagree beyond tolerance."""

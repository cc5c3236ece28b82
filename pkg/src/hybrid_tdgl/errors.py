"""Exception hierarchy shared by every module of the package."""


class TDGLError(Exception):
    """Base class for all package errors."""


class DomainError(TDGLError, ValueError):
    """An argument lies outside the mathematical domain of a function."""


class QuadratureFailure(TDGLError, ArithmeticError):
    """Panel quadrature did not reach its tolerance or produced non-finite values."""


class NoRootInBracket(TDGLError, ValueError):
    """The bracketing interval shows no sign change."""


class ShapeError(TDGLError, ValueError):
    """Fields live on different or inconsistent grids."""


class ConfigError(TDGLError, ValueError):
    """Invalid configuration; ``key`` names the offending entry when known."""

    def __init__(self, message, key=None):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


class SolveFailure(TDGLError, ArithmeticError):
    """A Krylov solve stagnated before reaching the residual target."""

    def __init__(self, message, residual=float("nan"), step=None):
        self.residual = residual
        self.step = step
        super().__init__(message)


class NumericalBlowup(TDGLError, ArithmeticError):
    """A state or right-hand side became non-finite."""

    def __init__(self, message, step=None):
        self.step = step
        super().__init__(message)

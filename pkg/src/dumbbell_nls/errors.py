"""Exception hierarchy shared by the solver modules and the CLI."""


class DumbbellError(Exception):
    """Base class for all package errors."""


class NonCommensurateGrid(DumbbellError, ValueError):
    """N*L/pi is not an integer, so the segment cannot be meshed with spacing 2*pi/N."""


class NonFiniteSample(DumbbellError, ValueError):
    pass


class GridMismatch(DumbbellError, ValueError):
    pass


class ConvergenceFailure(DumbbellError, RuntimeError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class BracketingFailure(DumbbellError, RuntimeError):
    pass


class ModulusOutOfRange(DumbbellError, ValueError):
    pass


class QuadratureNearPole(DumbbellError, ValueError):
    pass


class NoRoot(DumbbellError, RuntimeError):
    pass


class SolverFailure(DumbbellError, RuntimeError):
    """Nonlinear iteration failed; ``state`` holds the last iterate when available."""

    def __init__(self, message, state=None, history=None):
        super().__init__(message)
        self.state = state
        self.history = history if history is not None else []


class MaxIterExceeded(SolverFailure):
    pass


class CollapseToZero(SolverFailure):
    pass


class SingularJacobian(SolverFailure):
    pass


class BranchEnd(DumbbellError):
    """Continuation could not proceed past ``lam``; not fatal, the table is still valid."""

    def __init__(self, message, lam=None):
        super().__init__(message)
        self.lam = lam

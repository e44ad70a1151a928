"""Exception types. Every error carries the name of the module that raised it."""


class HJBError(Exception):
    module = "hjb"

    def __init__(self, message="", module=None):
        super().__init__(message)
        if module is not None:
            self.module = module

    def __str__(self):
        return f"[{self.module}] {super().__str__()}"


class DomainError(HJBError, ValueError):
    """A parameter lies outside its admissible range."""

    module = "model"


class ConfigError(HJBError, ValueError):
    module = "config"


class GridMismatchError(HJBError, ValueError):
    module = "grid"


class ExprSyntaxError(HJBError, ValueError):
    """Parse failure; ``offset`` is the byte offset into the UTF-8 source."""

    module = "expr"

    def __init__(self, message, offset):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset
        self.reason = message


class ExprEvalError(HJBError, ArithmeticError):
    module = "expr"


class SolverError(HJBError, RuntimeError):
    """Linear solve did not reach the requested tolerance."""

    module = "poisson"

    def __init__(self, message, residual):
        super().__init__(f"{message} (final relative residual {residual:.3e})")
        self.residual = residual


class StructuralError(HJBError, RuntimeError):
    """The iteration broke an ordering property it must keep."""

    module = "iterate"

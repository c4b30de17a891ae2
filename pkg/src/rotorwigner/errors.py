"""Exception types shared across the package.

The CLI maps these onto stable exit codes (see cli.EXIT_CODES).
"""


class RotorError(Exception):
    """Base class for all library errors."""


class DomainError(RotorError, ValueError):
    """Invalid quantum numbers, mismatched bases, or out-of-contract arguments."""


class BasisMismatchError(DomainError):
    """Operands live on different bases."""


class PoleError(DomainError):
    """Angle-representation evaluation at a coordinate pole (sin beta = 0)."""


class ConfigurationError(RotorError, ValueError):
    """A resolution/order/window parameter is below the documented minimum."""


class ToleranceError(RotorError, RuntimeError):
    """A numerical sanity bound was breached; carries a diagnostics dict."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class IntegrationError(RotorError, RuntimeError):
    """Time integration failed (norm drift or step failure)."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class SingularityError(RotorError, RuntimeError):
    """A classical trajectory ran into the sin(beta) pole guard."""


class ParseError(RotorError, ValueError):
    """A state/config/grid file violates its schema."""

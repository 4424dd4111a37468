"""Exception hierarchy shared by every slnn module."""

from __future__ import annotations


class SLNNError(Exception):
    """Base class for all errors raised by slnn."""


class DomainError(SLNNError, ValueError):
    """An argument lies outside the domain where the operation is defined."""


class InvalidOrderError(SLNNError, ValueError):
    """Basis order outside ``1..max_order``."""


class DimensionError(SLNNError, ValueError):
    """Weight vector and basis evaluation have incompatible lengths."""


class InvalidArgumentError(SLNNError, ValueError):
    pass


class ExprSyntaxError(SLNNError, ValueError):
    """Malformed expression source.

    ``offset`` is the byte offset into the source where parsing failed.
    """

    def __init__(self, message: str, offset: int, source: str = ""):
        self.offset = offset
        self.source = source
        super().__init__(f"{message} at offset {offset}")


class UnknownIdentifierError(ExprSyntaxError):
    def __init__(self, name: str, offset: int, source: str = ""):
        self.name = name
        ExprSyntaxError.__init__(self, f"unknown identifier {name!r}", offset, source)


class EvalDomainError(DomainError):
    """Expression evaluation left the real domain (ln/sqrt of negatives, x/0)."""

    def __init__(self, message: str, subtree: str):
        self.subtree = subtree
        super().__init__(f"{message} in subexpression {subtree!r}")


class SingularityError(DomainError):
    """Residual requested at the singular point eta = 0."""


class ProblemSchemaError(SLNNError, ValueError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class UnknownProblemError(SLNNError, LookupError):
    def __init__(self, name: str, available):
        self.name = name
        self.available = tuple(available)
        super().__init__(
            f"unknown problem {name!r}; available built-ins: {', '.join(self.available)}"
        )

    def __str__(self) -> str:
        return self.args[0]


class DivergenceError(SLNNError, ArithmeticError):
    """Training produced a non-finite loss or gradient.

    Carries the iteration index and the last weights whose loss was finite.
    """

    def __init__(self, iteration: int, last_weights, last_loss: float):
        self.iteration = iteration
        self.last_weights = last_weights
        self.last_loss = last_loss
        super().__init__(
            f"non-finite loss or gradient at iteration {iteration} "
            f"(last finite loss {last_loss!r})"
        )


class NotComputableError(SLNNError, ValueError):
    pass

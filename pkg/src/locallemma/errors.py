"""Exception hierarchy shared across the package."""


class LocalLemmaError(Exception):
    """Base class for all package errors."""


class DomainError(LocalLemmaError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class WDomainError(DomainError):
    """Lambert W argument outside [-1/e, 0)."""


class SizeGuardError(LocalLemmaError, ValueError):
    """An exponential-cost enumeration was requested above its size cap."""


class IndeterminateError(LocalLemmaError, RuntimeError):
    """An interval comparison still straddles the threshold at the precision cap."""


class DepthExceededError(LocalLemmaError, RuntimeError):
    """Branching-process sampling reached the generation cap before extinction."""


class ParseError(LocalLemmaError, ValueError):
    """A structured input file failed to parse.

    Carries 1-based ``line`` and ``column`` of the offending token when known.
    """

    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(message)
        self.line = line
        self.column = column

    def __str__(self) -> str:
        base = super().__str__()
        if self.line:
            return f"line {self.line}, column {self.column}: {base}"
        return base

"""Exception taxonomy shared by all modules.

The CLI maps these onto exit codes: ParseError exits 2 (bad input text),
everything else derived from EmuprobError exits 1 with a reason line.
"""


class EmuprobError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(EmuprobError):
    """Input text is not a well-formed universe/permutation file."""


class ValidationError(EmuprobError):
    """Well-formed input violates schema constraints.

    Carries the full list of violations, not just the first one found.
    """

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class DomainError(EmuprobError):
    """An argument is outside the operation's domain (unknown state, bad word, ...)."""


class ContractError(EmuprobError):
    """A documented precondition does not hold (non-branching set, wrong chain class, ...)."""


class ResourceError(EmuprobError):
    """A configured enumeration or growth cap would be exceeded."""


class ConvergenceError(EmuprobError):
    """Iterative solver did not converge within its iteration budget."""

    def __init__(self, message, iterations):
        super().__init__(message)
        self.iterations = iterations


class InternalError(EmuprobError):
    """Invariant violated inside the library; indicates a bug, not bad input."""

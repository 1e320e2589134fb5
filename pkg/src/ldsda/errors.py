"""Exception hierarchy shared across the package."""


class LdsdaError(Exception):
    """Base class for all package errors."""


class DomainError(LdsdaError, ArithmeticError):
    """An expression was evaluated outside its mathematical domain."""


class UnboundVariable(LdsdaError, KeyError):
    """A variable index has no value in the evaluation point."""


class ModelError(LdsdaError):
    """Invalid operation while building a model."""


class DuplicateName(ModelError):
    pass


class UndeclaredVariable(ModelError):
    pass


class ArityTooSmall(ModelError):
    pass


class ModelFrozen(ModelError):
    pass


class ReformulationError(LdsdaError):
    pass


class MissingExactlyOne(ReformulationError):
    pass


class DuplicateBoolean(ReformulationError):
    pass


class OutOfBounds(ReformulationError, IndexError):
    """A lattice point lies outside the external-variable box."""


class IncompleteAssignment(LdsdaError):
    pass


class UnresolvedBooleans(LdsdaError):
    """Logic propagation left Booleans undecided after fixing the external variables."""

    def __init__(self, undecided):
        self.undecided = tuple(undecided)
        super().__init__(f"Booleans left undecided after propagation: {self.undecided}")


class DimensionMismatch(LdsdaError, ValueError):
    pass


class InfeasibleStart(LdsdaError):
    """The initial lattice point does not yield a feasible subproblem."""


class BudgetExhausted(LdsdaError):
    """The subproblem-solve budget ran out before the search finished."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class InvalidParams(LdsdaError, ValueError):
    pass

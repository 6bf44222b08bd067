"""Exception hierarchy shared by all modules."""


class SDLabError(Exception):
    """Base class for every error raised by sdlab."""


class NotMember(SDLabError, ValueError):
    """An element does not lie in the character group H_a."""


class NotDivisible(SDLabError, ArithmeticError):
    """Halving (or p-division) leaves the group."""


class DomainError(SDLabError, ValueError):
    """A characteristic function was evaluated outside its domain."""


class ClosureViolation(SDLabError):
    """A set that must be a subgroup (at box scale) is not closed."""


class NotPeriodic(SDLabError, ValueError):
    """A cyclic restriction is not periodic with the claimed period."""


class PreconditionViolated(SDLabError):
    """The inputs do not satisfy the hypotheses of a check."""


class BudgetExceeded(SDLabError):
    """An enumeration would visit more points than the configured cap."""


class NotHomomorphism(SDLabError, ValueError):
    """An integer matrix does not define a homomorphism of the finite group."""


class InvalidParams(SDLabError, ValueError):
    """Construction parameters outside the admissible range."""

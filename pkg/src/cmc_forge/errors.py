"""Exception types shared across the package."""


class CMCError(Exception):
    pass


class ContractError(CMCError, ValueError):
    """Arguments violate an operation's preconditions (shapes, ranges)."""


class DomainError(ContractError):
    pass


class EmptyQuadric(ContractError):
    pass


class OutOfRange(ContractError):
    pass


class OutOfValidity(ContractError):
    pass


class InvalidBracket(CMCError):
    pass


class DoubleRoot(CMCError):
    def __init__(self, root, msg=None):
        self.root = root
        super().__init__(msg or f"double root at t0={root!r}; solution is constant")


class BadRoot(CMCError):
    pass


class NotCoercive(CMCError):
    pass


class SingularDenominator(CMCError):
    pass


class BasePointOffQuadric(ContractError):
    pass


class DomainExceeded(ContractError):
    pass


class FamilyMismatch(ContractError):
    pass


class Unattainable(CMCError):
    pass


class NonTangent(ContractError):
    pass


class BoundaryU(ContractError):
    pass


class NoSignChange(CMCError):
    pass

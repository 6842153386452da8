"""Exception hierarchy shared by every ddwalk module."""


class DDWalkError(Exception):
    """Base class for all ddwalk errors."""


# construction / validation
class DuplicateEntry(DDWalkError, ValueError):
    pass


class SelfLoop(DDWalkError, ValueError):
    pass


class DimensionMismatch(DDWalkError, ValueError):
    pass


class OpinionOutOfRange(DDWalkError, ValueError):
    pass


class NegativeWeight(DDWalkError, ValueError):
    pass


# oracle
class BudgetExhausted(DDWalkError, RuntimeError):
    pass


class IndexOutOfRange(DDWalkError, IndexError):
    pass


class NonPositiveSigma(DDWalkError, ValueError):
    pass


# solver
class InvalidParameters(DDWalkError, ValueError):
    pass


class NonTerminatingRisk(DDWalkError, RuntimeError):
    """The walk cannot be guaranteed to halt (non-strict row, zero row, step cap hit)."""


# reference
class TooLarge(DDWalkError, ValueError):
    pass


class NotSymmetric(DDWalkError, ValueError):
    pass


class SingularNonSymmetric(DDWalkError, ValueError):
    pass


class NonConvergence(DDWalkError, RuntimeError):
    pass


# hardgen
class ExpanderNotFound(DDWalkError, RuntimeError):
    pass


class GapViolation(DDWalkError, AssertionError):
    pass


# io / cli
class ParseError(DDWalkError, ValueError):
    pass


class InvalidParams(DDWalkError, ValueError):
    pass


class TooLargeForGroundTruth(DDWalkError, ValueError):
    pass


class NotStrictlyDD(DDWalkError, ValueError):
    pass

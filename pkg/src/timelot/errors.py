"""Exception hierarchy shared by every timelot module."""


class TimelotError(ValueError):
    """Base class for all errors raised by timelot."""


# lottery construction
class EmptySupport(TimelotError):
    pass


class ProbabilitySumError(TimelotError):
    pass


class OutOfDomain(TimelotError):
    pass


class DomainMismatch(TimelotError):
    pass


class NotATimeLottery(TimelotError):
    pass


# models
class ValidationError(TimelotError):
    """A model parameter or file violates a catalog constraint."""


class CurvatureDomainError(TimelotError):
    pass


class UnsupportedLotteryShape(TimelotError):
    pass


class NonPositiveComponent(TimelotError):
    pass


# checks
class ModeUnsupported(TimelotError):
    pass


# solvers
class SolverError(TimelotError):
    pass


class NoSolution(SolverError):
    pass


class NonMonotoneEvaluation(SolverError):
    pass


class MaxIterExceeded(SolverError):
    pass


class Unbracketed(SolverError):
    pass


# experiments
class HypothesisFailed(TimelotError):
    def __init__(self, which: str, detail: str = ""):
        self.which = which
        msg = f"hypothesis failed: {which}"
        super().__init__(f"{msg} ({detail})" if detail else msg)


# cli
class ParseError(TimelotError):
    pass

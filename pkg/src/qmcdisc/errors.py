"""Exception hierarchy shared by all modules."""


class QMCError(Exception):
    """Base class for library errors."""


class InvalidParameter(QMCError, ValueError):
    """A precondition on an argument is violated."""


class NumericFailure(QMCError, ArithmeticError):
    """An iterative numerical routine did not converge."""


class ConstructionInvalid(QMCError):
    """A generated object failed its own construction-time verification."""


class BudgetExceeded(QMCError):
    """The requested computation is larger than the configured budget."""


class ScheduleFailure(QMCError):
    """The incremental greedy algorithm found no element meeting its threshold.

    Attributes:
        step: 1-based step index at which the threshold test failed.
        deficit: how far the best element fell short of ``-eps_n``.
    """

    def __init__(self, step, deficit):
        super().__init__(f"IA schedule violated at step {step} (deficit {deficit:.3e})")
        self.step = step
        self.deficit = deficit

"""Exceptions raised across herdwatch, grouped by how the CLI reports them"""


class HerdwatchError(Exception):
    """Base class for all herdwatch errors"""

    exit_code = 1


class MalformedInputError(HerdwatchError, ValueError):
    """Input files, tensors or configs that break a documented format or invariant"""

    exit_code = 2


class EmptyDataError(HerdwatchError, ValueError):
    """Inputs that parse but carry nothing to evaluate (e.g. no ground truth)"""

    exit_code = 3


class DegenerateInputError(HerdwatchError, ArithmeticError):
    """Numerically degenerate inputs such as zero-norm vectors or zero variance"""

    exit_code = 4

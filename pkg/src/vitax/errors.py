"""Exception hierarchy shared by every vitax module."""


class VitaxError(Exception):
    """Base class for all vitax errors."""


class MalformedModel(VitaxError, ValueError):
    pass


class DimensionMismatch(VitaxError, ValueError):
    pass


class NonFiniteWeight(VitaxError, ValueError):
    pass


class ClassOutOfRange(VitaxError, ValueError):
    pass


class SameClass(VitaxError, ValueError):
    pass


class DegenerateLogits(VitaxError, ValueError):
    pass


class ZeroDenominator(VitaxError, ZeroDivisionError):
    pass


class UnsupportedNorm(VitaxError, ValueError):
    pass


class PredictionMismatch(VitaxError, ValueError):
    pass


class EmptyDonorPool(VitaxError, ValueError):
    pass


class SolverError(VitaxError, RuntimeError):
    """A reachability solver could not produce bounds."""


class SplitBudgetExceeded(SolverError):
    """The exact solver needed more ReLU splits than its budget allows."""


class InfeasibleLP(SolverError):
    pass


class MalformedInput(VitaxError, ValueError):
    """A dataset, subset or result file does not follow its format."""
